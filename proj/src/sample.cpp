#include "latentad/sample.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"

namespace latentad {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::synthetic: return "synthetic";
    case Provenance::panel_derived: return "panel-derived";
    case Provenance::user_supplied: return "user-supplied";
  }
  return "unknown";
}

void Sample::validate() const {
  if (y.size() != x.size() || w.size() != x.size()) {
    throw InvalidInput("sample columns have unequal lengths (Y=" + std::to_string(y.size()) +
                       ", X=" + std::to_string(x.size()) + ", W=" + std::to_string(w.size()) +
                       ")");
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(y[j]) || !std::isfinite(x[j]) || !std::isfinite(w[j])) {
      throw InvalidInput("sample row " + std::to_string(j + 1) + " has a non-finite entry");
    }
  }
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("mean of an empty column");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double a : v) ss += (a - m) * (a - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void write_sample_csv(const std::string& path, const Sample& s,
                      const std::vector<std::string>& comments) {
  s.validate();
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "Y,X,W\n";
  for (std::size_t j = 0; j < s.size(); ++j) {
    out << csv::format_double(s.y[j]) << ',' << csv::format_double(s.x[j]) << ','
        << csv::format_double(s.w[j]) << '\n';
  }
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

Sample read_sample_csv(const std::string& path) {
  const auto table = csv::read(path);
  auto column = [&](const char* name) -> std::size_t {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return i;
    throw InvalidInput("'" + path + "' has no column named " + name);
  };
  const auto iy = column("Y"), ix = column("X"), iw = column("W");
  Sample s;
  s.provenance = Provenance::user_supplied;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto get = [&](std::size_t i) {
      const auto v = csv::parse_double(row[i]);
      if (!v || !std::isfinite(*v)) {
        throw InvalidInput("'" + path + "' data row " + std::to_string(r + 1) + ", column " +
                           table.header[i] + ": not a finite number");
      }
      return *v;
    };
    s.y.push_back(get(iy));
    s.x.push_back(get(ix));
    s.w.push_back(get(iw));
  }
  return s;
}

}  // namespace latentad
