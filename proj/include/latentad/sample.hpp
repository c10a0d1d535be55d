#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace latentad {

enum class Provenance { synthetic, panel_derived, user_supplied };

std::string to_string(Provenance p);

/// Observations (Y, X, W): an outcome and two noisy measures of the same
/// latent regressor. All three columns have equal length and finite entries.
struct Sample {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> w;
  Provenance provenance = Provenance::user_supplied;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }

  /// Throws InvalidInput on length mismatch or a non-finite entry.
  void validate() const;
};

double mean(std::span<const double> v);
/// (n-1)-denominator standard deviation; 0 for a single value.
double sample_sd(std::span<const double> v);

/// Writes `Y,X,W` with 17 significant digits. `comments` become leading
/// `# ` lines.
void write_sample_csv(const std::string& path, const Sample& s,
                      const std::vector<std::string>& comments = {});
Sample read_sample_csv(const std::string& path);

}  // namespace latentad
