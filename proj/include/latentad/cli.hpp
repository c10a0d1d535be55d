#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latentad/estimator.hpp"
#include "latentad/ingest.hpp"

namespace latentad {

enum class Command { ingest, estimate, test, simulate, cfdump };

std::string to_string(Command c);

/// Everything a run needs, after merging the config file with the flags and
/// validating every value. `requested` keeps the merged key/value strings
/// (minus output locations and the thread count) for embedding in artifacts.
struct RunConfig {
  Command command = Command::estimate;
  std::string input;
  std::string output;
  std::map<std::string, std::string> requested;

  EstimatorSettings settings;
  double size = 0.05;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t reps = 0;
  std::vector<double> deltas;
  std::vector<std::size_t> n_list;

  PanelSchema schema;
  std::string drop_report;
  std::string summary;
};

/// Parses `key = value` lines; `#` starts a comment line. Keys may use `-` or
/// `_`. Throws InvalidConfig on a malformed line.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// argv without the program name. Returns the exit code: 0 on success, 1 on
/// a validation error (bad flag, bad value, unreadable input), 2 on a
/// numerical failure. Messages go to `err`; JSON without an --output path
/// goes to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latentad
