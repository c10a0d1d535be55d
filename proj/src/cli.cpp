#include "latentad/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "latentad/charfun.hpp"
#include "latentad/csv.hpp"
#include "latentad/error.hpp"
#include "latentad/inference.hpp"
#include "latentad/simulate.hpp"

namespace latentad {

std::string to_string(Command c) {
  switch (c) {
    case Command::ingest: return "ingest";
    case Command::estimate: return "estimate";
    case Command::test: return "test";
    case Command::simulate: return "simulate";
    case Command::cfdump: return "cfdump";
  }
  return "unknown";
}

namespace {

using Json = nlohmann::ordered_json;

enum Mask : unsigned {
  kIngest = 1u << 0,
  kEstimate = 1u << 1,
  kTest = 1u << 2,
  kSimulate = 1u << 3,
  kCfdump = 1u << 4,
  kEstimator = kEstimate | kTest | kSimulate | kCfdump,
};

struct KeySpec {
  const char* name;
  const char* help;
  unsigned commands;
  bool embedded;  // echoed into artifacts
};

const KeySpec kKeys[] = {
    {"input", "input CSV (panel for ingest, Y,X,W sample otherwise)",
     kIngest | kEstimate | kTest | kCfdump, true},
    {"output", "output path; for simulate, the file prefix (default: sim)",
     kIngest | kEstimate | kTest | kSimulate | kCfdump, false},
    {"c", "coefficient of W in Y - cW (default 1)", kEstimator, true},
    {"bandwidth", "positive bandwidth or 'auto' (default auto)", kEstimator, true},
    {"bandwidth-scale", "multiplier for the automatic bandwidth (default 1)", kEstimator, true},
    {"kernel", "flat_top or polynomial_order2 (default flat_top)", kEstimator, true},
    {"grid-points", "odd number of frequency nodes (default 4097)", kEstimator, true},
    {"rho", "denominator floor or 'auto' for n^-1/2 (default auto)", kEstimator, true},
    {"xi-weight", "kernel_ft_squared or kernel_ft (default kernel_ft_squared)", kTest | kSimulate, true},
    {"threads", "worker threads; results do not depend on it (default 1)", kEstimator, false},
    {"size", "nominal test size (default 0.05)", kTest | kSimulate, true},
    {"seed", "unsigned seed (default 0)", kSimulate, true},
    {"reps", "replications per cell", kSimulate, true},
    {"deltas", "comma-separated deltas in [0, 0.5]", kSimulate, true},
    {"n", "comma-separated sample sizes", kSimulate, true},
    {"id-column", "unit id column (default id)", kIngest, true},
    {"waves", "four comma-separated wave labels (default 2013,2015,2017,2019)", kIngest, true},
    {"income-prefix", "income column prefix (default income_)", kIngest, true},
    {"consumption-prefix", "consumption column prefix (default consumption_)", kIngest, true},
    {"income-columns", "four comma-separated income columns (overrides the prefix)", kIngest,
     true},
    {"consumption-columns", "four comma-separated consumption columns", kIngest, true},
    {"drop-report", "write the drop report JSON here", kIngest, false},
    {"summary", "write summary statistics CSV here", kIngest, false},
};

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : kKeys)
    if (name == k.name) return &k;
  return nullptr;
}

unsigned mask_of(Command c) {
  switch (c) {
    case Command::ingest: return kIngest;
    case Command::estimate: return kEstimate;
    case Command::test: return kTest;
    case Command::simulate: return kSimulate;
    case Command::cfdump: return kCfdump;
  }
  return 0;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_key(std::string k) {
  for (auto& ch : k)
    if (ch == '_') ch = '-';
  return k;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what,
                            const std::string& got) {
  throw InvalidConfig("--" + key + ": expected " + what + ", got '" + got + "'");
}

double parse_real(const std::string& key, const std::string& v) {
  const auto d = csv::parse_double(v);
  if (!d || !std::isfinite(*d)) bad_value(key, "a finite real", v);
  return *d;
}

double parse_positive(const std::string& key, const std::string& v) {
  const auto d = csv::parse_double(v);
  if (!d || !std::isfinite(*d) || *d <= 0.0) bad_value(key, "a positive real", v);
  return *d;
}

std::optional<double> parse_auto_positive(const std::string& key, const std::string& v) {
  if (trim(v) == "auto") return std::nullopt;
  const auto d = csv::parse_double(v);
  if (!d || !std::isfinite(*d) || *d <= 0.0) bad_value(key, "a positive real or 'auto'", v);
  return *d;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v, std::uint64_t min) {
  const std::string t = trim(v);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || out < min) {
    bad_value(key, min > 0 ? "an integer >= " + std::to_string(min) : "an unsigned integer", v);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_real(key, s));
  if (out.empty()) bad_value(key, "a comma-separated list of reals", v);
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(parse_unsigned(key, s, 2));
  if (out.empty()) bad_value(key, "a comma-separated list of sample sizes", v);
  return out;
}

std::array<std::string, 4> parse_four(const std::string& key, const std::string& v) {
  const auto items = split_list(v);
  if (items.size() != 4) bad_value(key, "four comma-separated entries", v);
  std::array<std::string, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (items[i].empty()) bad_value(key, "four non-empty entries", v);
    out[i] = items[i];
  }
  return out;
}

RunConfig build_run_config(Command cmd, const std::map<std::string, std::string>& values) {
  RunConfig rc;
  rc.command = cmd;
  auto get = [&](const char* k) -> const std::string* {
    const auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  };
  for (const auto& [k, v] : values) {
    const KeySpec* spec = find_key(k);
    if (spec && spec->embedded) rc.requested[k] = v;
  }
  if (auto v = get("input")) rc.input = *v;
  if (auto v = get("output")) rc.output = *v;

  auto& s = rc.settings;
  if (auto v = get("c")) s.c = parse_real("c", *v);
  if (auto v = get("bandwidth")) s.bandwidth = parse_auto_positive("bandwidth", *v);
  if (auto v = get("bandwidth-scale")) s.bandwidth_scale = parse_positive("bandwidth-scale", *v);
  if (auto v = get("kernel")) {
    try {
      s.kernel = KernelSpec::parse(trim(*v));
    } catch (const std::invalid_argument&) {
      bad_value("kernel", "flat_top or polynomial_order2", *v);
    }
  }
  if (auto v = get("grid-points")) {
    const auto g = parse_unsigned("grid-points", *v, 3);
    if (g % 2 == 0) bad_value("grid-points", "an odd integer >= 3", *v);
    s.grid_points = g;
  }
  if (auto v = get("rho")) s.rho = parse_auto_positive("rho", *v);
  if (auto v = get("xi-weight")) {
    try {
      s.xi_weight = parse_xi_weight(trim(*v));
    } catch (const std::invalid_argument&) {
      bad_value("xi-weight", "kernel_ft or kernel_ft_squared", *v);
    }
  }
  if (auto v = get("threads")) {
    rc.threads = parse_unsigned("threads", *v, 1);
    s.threads = rc.threads;
  }
  if (auto v = get("size")) {
    rc.size = parse_real("size", *v);
    if (!(rc.size > 0.0 && rc.size < 1.0)) bad_value("size", "a real in (0, 1)", *v);
  }
  if (auto v = get("seed")) rc.seed = parse_unsigned("seed", *v, 0);
  if (auto v = get("reps")) rc.reps = parse_unsigned("reps", *v, 1);
  if (auto v = get("deltas")) {
    rc.deltas = parse_real_list("deltas", *v);
    for (double d : rc.deltas)
      if (d < 0.0 || d > 0.5) bad_value("deltas", "values in [0, 0.5]", *v);
  }
  if (auto v = get("n")) rc.n_list = parse_size_list("n", *v);

  std::array<int, 4> waves = rc.schema.waves;
  if (auto v = get("waves")) {
    const auto items = parse_four("waves", *v);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto d = csv::parse_double(items[i]);
      if (!d || *d != std::floor(*d) || std::abs(*d) > 1e9) bad_value("waves", "integer labels", *v);
      waves[i] = static_cast<int>(*d);
      if (i > 0 && waves[i] <= waves[i - 1]) bad_value("waves", "strictly increasing labels", *v);
    }
  }
  rc.schema = PanelSchema::with_prefixes(
      waves, get("income-prefix") ? *get("income-prefix") : "income_",
      get("consumption-prefix") ? *get("consumption-prefix") : "consumption_",
      get("id-column") ? *get("id-column") : "id");
  if (auto v = get("income-columns")) rc.schema.income_columns = parse_four("income-columns", *v);
  if (auto v = get("consumption-columns"))
    rc.schema.consumption_columns = parse_four("consumption-columns", *v);
  if (auto v = get("drop-report")) rc.drop_report = *v;
  if (auto v = get("summary")) rc.summary = *v;

  const bool needs_input = cmd != Command::simulate;
  if (needs_input && rc.input.empty()) throw InvalidConfig("--input is required for " + to_string(cmd));
  if ((cmd == Command::ingest || cmd == Command::cfdump) && rc.output.empty()) {
    throw InvalidConfig("--output is required for " + to_string(cmd));
  }
  if (cmd == Command::simulate) {
    if (rc.deltas.empty()) throw InvalidConfig("--deltas is required for simulate");
    if (rc.n_list.empty()) throw InvalidConfig("--n is required for simulate");
    if (rc.reps == 0) throw InvalidConfig("--reps is required for simulate");
    if (rc.output.empty()) rc.output = "sim";
  }
  return rc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

Json requested_json(const RunConfig& rc) {
  Json j = Json::object();
  for (const auto& [k, v] : rc.requested) j[k] = v;
  return j;
}

Json resolved_json(const EstimatorConfig& cfg, const EstimatorSettings& s, std::size_t n) {
  Json j;
  j["n"] = n;
  j["c"] = cfg.c;
  j["bandwidth"] = cfg.bandwidth.value();
  j["bandwidth_rule"] = s.bandwidth ? "explicit" : "scale*sd(X)*n^(-1/6)";
  j["bandwidth_scale"] = s.bandwidth_scale;
  j["kernel"] = cfg.kernel.label();
  j["grid_points"] = cfg.grid.size();
  j["t_max"] = cfg.grid[cfg.grid.size() - 1];
  j["rho"] = cfg.rho;
  j["rho_rule"] = s.rho ? "explicit" : "n^(-1/2)";
  j["xi_weight"] = to_string(cfg.xi_weight);
  return j;
}

std::vector<std::string> comment_lines(const RunConfig& rc) {
  std::vector<std::string> out{"command=" + to_string(rc.command)};
  for (const auto& [k, v] : rc.requested) out.push_back(k + "=" + v);
  return out;
}

void emit_json(const RunConfig& rc, const Json& doc, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (rc.output.empty()) {
    out << text;
  } else {
    write_text(rc.output, text);
  }
}

Json summary_json(const SummaryTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"variable", r.name}, {"n", r.n}, {"mean", r.mean}, {"sd", r.sd},
                    {"degenerate", r.degenerate}});
  }
  return rows;
}

void do_ingest(const RunConfig& rc, std::ostream& out) {
  const PanelTable panel = parse_panel_csv(rc.input, rc.schema);
  if (panel.units.empty()) throw InvalidInput("panel file '" + rc.input + "' has no units");
  const auto [sample, report] = build_differences(panel);

  auto comments = comment_lines(rc);
  comments.push_back("provenance=" + to_string(sample.provenance));
  comments.push_back("units=" + std::to_string(report.units));
  comments.push_back("retained=" + std::to_string(report.retained));
  comments.push_back("dropped=" + std::to_string(report.dropped));
  comments.push_back("differences=raw log differences, no residualization");
  write_sample_csv(rc.output, sample, comments);

  const auto panel_stats = summary_stats(panel);
  const auto sample_stats = summary_stats(sample);
  if (!rc.drop_report.empty()) {
    Json j;
    j["command"] = "ingest";
    j["config"] = requested_json(rc);
    j["units"] = report.units;
    j["retained"] = report.retained;
    j["dropped"] = report.dropped;
    Json reasons = Json::object();
    for (const auto& [k, v] : report.reasons) reasons[k] = v;
    j["reasons"] = reasons;
    j["sample_summary"] = summary_json(sample_stats);
    write_text(rc.drop_report, j.dump(2) + "\n");
  }
  if (!rc.summary.empty()) {
    SummaryTable all = panel_stats;
    for (const auto& r : sample_stats.rows) all.rows.push_back(r);
    std::string text;
    for (const auto& c : comment_lines(rc)) text += "# " + c + "\n";
    write_text(rc.summary, text + all.to_csv());
  }
  out << "Panel waves (means, sd in parentheses)\n"
      << panel_stats.to_text() << "\nConstructed sample, n = " << sample.size() << "\n"
      << sample_stats.to_text() << "\nretained " << report.retained << " of " << report.units
      << " units\n";
  for (const auto& [k, v] : report.reasons) out << "  dropped " << v << ": " << k << "\n";
}

void do_estimate(const RunConfig& rc, std::ostream& out) {
  const Sample sample = read_sample_csv(rc.input);
  const EstimatorConfig cfg = resolve_config(rc.settings, sample);
  const ThetaEstimate est = estimate_theta(sample, cfg);
  Json doc;
  doc["command"] = "estimate";
  doc["config"] = requested_json(rc);
  doc["resolved"] = resolved_json(cfg, rc.settings, sample.size());
  Json r;
  r["theta_hat"] = est.theta_hat;
  r["imag_residual"] = est.imag_residual;
  r["diagnostics"] = est.diagnostics;
  doc["result"] = r;
  emit_json(rc, doc, out);
}

void do_test(const RunConfig& rc, std::ostream& out) {
  const Sample sample = read_sample_csv(rc.input);
  const EstimatorConfig cfg = resolve_config(rc.settings, sample);
  const TestResult t = run_test(sample, cfg, rc.size);
  Json doc;
  doc["command"] = "test";
  doc["config"] = requested_json(rc);
  Json res = resolved_json(cfg, rc.settings, sample.size());
  res["size"] = rc.size;
  doc["resolved"] = res;
  Json r;
  r["hypothesis"] = "H0: theta_c >= 0 vs H1: theta_c < 0";
  r["theta_hat"] = t.theta_hat;
  r["s_hat_sq"] = t.s_hat_sq;
  r["s_hat"] = t.s_hat;
  r["std_error"] = t.std_error;
  r["z"] = t.z;
  r["p_value"] = t.p_value;
  r["p_value_two_sided"] = t.p_value_two_sided;
  r["reject"] = t.reject;
  r["decision"] = t.reject ? "reject H0" : "do not reject H0";
  r["xi_mean"] = t.xi_mean;
  r["diagnostics"] = t.diagnostics;
  doc["result"] = r;
  emit_json(rc, doc, out);
}

void do_simulate(const RunConfig& rc, std::ostream& out) {
  SimConfig cfg;
  cfg.deltas = rc.deltas;
  cfg.n_list = rc.n_list;
  cfg.reps = rc.reps;
  cfg.size = rc.size;
  cfg.seed = rc.seed;
  cfg.settings = rc.settings;
  cfg.threads = rc.threads;
  const PowerTable table = run_power_curve(cfg);
  emit_power_outputs(table, rc.output);
  out << "delta      n  rejection  mc_se\n";
  for (const auto& r : table.rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%5.3f %6zu  %9.4f  %6.4f%s\n", r.delta, r.n,
                  r.rejection_frequency, r.mc_std_error,
                  r.excluded ? "  (some replications excluded)" : "");
    out << line;
  }
  out << "wrote " << rc.output << "_power.csv and " << rc.output << "_power.svg\n";
}

void do_cfdump(const RunConfig& rc) {
  const Sample sample = read_sample_csv(rc.input);
  const EstimatorConfig cfg = resolve_config(rc.settings, sample);
  const CharFunSet cfs = estimate_charfuns(sample, cfg.c, cfg.grid, cfg.charfun_options());
  auto comments = comment_lines(rc);
  comments.push_back("resolved.bandwidth=" + csv::format_double(cfg.bandwidth.value()));
  comments.push_back("resolved.rho=" + csv::format_double(cfg.rho));
  comments.push_back("resolved.grid_points=" + std::to_string(cfg.grid.size()));
  for (const auto& w : cfs.warnings) comments.push_back("warning=" + w);
  write_charfun_csv(rc.output, cfs, comments);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("config file '" + path + "' line " + std::to_string(no) +
                          ": expected 'key = value'");
    }
    const std::string key = normalize_key(trim(t.substr(0, eq)));
    if (key.empty()) {
      throw InvalidConfig("config file '" + path + "' line " + std::to_string(no) +
                          ": empty key");
    }
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Average-derivative estimation and testing with a latent regressor"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Sub {
    Command cmd;
    CLI::App* app;
    std::map<std::string, std::string> storage;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    CLI::Option* config_opt = nullptr;
  };
  const std::pair<Command, const char*> commands[] = {
      {Command::ingest, "build a Y,X,W sample from a four-wave panel CSV"},
      {Command::estimate, "estimate theta_c and write JSON"},
      {Command::test, "test H0: theta_c >= 0 against theta_c < 0 and write JSON"},
      {Command::simulate, "Monte Carlo rejection frequencies and power chart"},
      {Command::cfdump, "dump estimated characteristic functions as CSV"},
  };
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& [cmd, desc] : commands) {
    auto sub = std::make_unique<Sub>();
    sub->cmd = cmd;
    sub->app = app.add_subcommand(to_string(cmd), desc);
    sub->config_opt =
        sub->app->add_option("--config", sub->config, "flat 'key = value' file; flags win");
    for (const auto& k : kKeys) {
      if (!(k.commands & mask_of(cmd))) continue;
      sub->options[k.name] =
          sub->app->add_option(std::string("--") + k.name, sub->storage[k.name], k.help);
    }
    subs.push_back(std::move(sub));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << " (see --help)\n";
    return 1;
  }

  try {
    for (auto& sub : subs) {
      if (!sub->app->parsed()) continue;
      std::map<std::string, std::string> values;
      if (sub->config_opt->count() > 0) {
        for (const auto& [k, v] : read_config_file(sub->config)) {
          const KeySpec* spec = find_key(k);
          if (!spec || !(spec->commands & mask_of(sub->cmd))) {
            throw InvalidConfig("config file '" + sub->config + "': key '" + k +
                                "' does not apply to " + to_string(sub->cmd));
          }
          values[k] = v;
        }
      }
      for (const auto& [k, opt] : sub->options) {
        if (opt->count() > 0) values[k] = sub->storage[k];
      }
      const RunConfig rc = build_run_config(sub->cmd, values);
      switch (rc.command) {
        case Command::ingest: do_ingest(rc, out); break;
        case Command::estimate: do_estimate(rc, out); break;
        case Command::test: do_test(rc, out); break;
        case Command::simulate: do_simulate(rc, out); break;
        case Command::cfdump: do_cfdump(rc); break;
      }
      return 0;
    }
    err << "error: no subcommand given (see --help)\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const InvalidState& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace latentad
