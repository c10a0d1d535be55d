#include "latentad/ingest.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"

namespace latentad {

void PanelTable::validate() const {
  for (std::size_t i = 1; i < waves.size(); ++i) {
    if (waves[i] <= waves[i - 1]) {
      throw InvalidInput("panel wave labels must be strictly increasing");
    }
  }
}

PanelSchema PanelSchema::with_prefixes(std::array<int, 4> waves, const std::string& income_prefix,
                                       const std::string& consumption_prefix,
                                       const std::string& id_column) {
  PanelSchema s;
  s.id_column = id_column;
  s.waves = waves;
  for (std::size_t i = 0; i < 4; ++i) {
    s.income_columns[i] = income_prefix + std::to_string(waves[i]);
    s.consumption_columns[i] = consumption_prefix + std::to_string(waves[i]);
  }
  return s;
}

namespace {

PanelSchema filled(const PanelSchema& schema) {
  PanelSchema s = schema;
  for (std::size_t i = 0; i < 4; ++i) {
    if (s.income_columns[i].empty()) s.income_columns[i] = "income_" + std::to_string(s.waves[i]);
    if (s.consumption_columns[i].empty())
      s.consumption_columns[i] = "consumption_" + std::to_string(s.waves[i]);
  }
  return s;
}

std::optional<double> cell_value(const std::string& cell) { return csv::parse_double(cell); }

std::optional<double> usable(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

}  // namespace

PanelTable parse_panel_csv(const std::string& path, const PanelSchema& schema_in) {
  const PanelSchema schema = filled(schema_in);
  const auto table = csv::read(path);
  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return i;
    throw InvalidInput("panel file '" + path + "' is missing mapped column '" + name + "'");
  };
  const std::size_t id_col = find(schema.id_column);
  std::array<std::size_t, 4> inc{}, con{};
  for (std::size_t i = 0; i < 4; ++i) {
    inc[i] = find(schema.income_columns[i]);
    con[i] = find(schema.consumption_columns[i]);
  }

  PanelTable panel;
  panel.waves = schema.waves;
  panel.validate();
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    PanelUnit u;
    u.id = row[id_col];
    if (!seen.insert(u.id).second) {
      throw InvalidInput("panel file '" + path + "' repeats unit id '" + u.id + "'");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      u.income[i] = cell_value(row[inc[i]]);
      u.consumption[i] = cell_value(row[con[i]]);
    }
    panel.units.push_back(std::move(u));
  }
  return panel;
}

void write_panel_csv(const std::string& path, const PanelTable& panel,
                     const PanelSchema& schema_in) {
  const PanelSchema schema = filled(schema_in);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << schema.id_column;
  for (const auto& c : schema.income_columns) out << ',' << c;
  for (const auto& c : schema.consumption_columns) out << ',' << c;
  out << '\n';
  auto cell = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  for (const auto& u : panel.units) {
    out << u.id;
    for (const auto& v : u.income) out << ',' << cell(v);
    for (const auto& v : u.consumption) out << ',' << cell(v);
    out << '\n';
  }
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

std::pair<Sample, DropReport> build_differences(const PanelTable& panel) {
  panel.validate();
  Sample s;
  s.provenance = Provenance::panel_derived;
  DropReport rep;
  rep.units = panel.units.size();
  auto diff = [](const std::optional<double>& a,
                 const std::optional<double>& b) -> std::optional<double> {
    const auto ua = usable(a), ub = usable(b);
    if (!ua || !ub) return std::nullopt;
    const double d = *ua - *ub;
    if (!std::isfinite(d)) return std::nullopt;
    return d;
  };
  for (const auto& u : panel.units) {
    const auto x = diff(u.income[2], u.income[0]);
    const auto w = diff(u.income[3], u.income[1]);
    const auto y = diff(u.consumption[2], u.consumption[1]);
    const char* reason = !x ? "missing X component"
                         : !w ? "missing W component"
                         : !y ? "missing Y component"
                              : nullptr;
    if (reason) {
      ++rep.dropped;
      ++rep.reasons[reason];
      continue;
    }
    s.y.push_back(*y);
    s.x.push_back(*x);
    s.w.push_back(*w);
  }
  rep.retained = s.size();
  if (rep.retained == 0) {
    throw InvalidInput("no panel unit has finite X, W and Y; all " + std::to_string(rep.units) +
                       " dropped");
  }
  return {std::move(s), rep};
}

namespace {

SummaryRow summarize(std::string name, const std::vector<double>& v) {
  if (v.empty()) throw InvalidInput("summary of empty column '" + name + "'");
  SummaryRow r;
  r.name = std::move(name);
  r.n = v.size();
  r.mean = mean(v);
  r.sd = sample_sd(v);
  r.degenerate = v.size() == 1;
  return r;
}

}  // namespace

SummaryTable summary_stats(const Sample& sample) {
  if (sample.empty()) throw InvalidInput("summary of an empty sample");
  sample.validate();
  SummaryTable t;
  t.rows.push_back(summarize("Y", sample.y));
  t.rows.push_back(summarize("X", sample.x));
  t.rows.push_back(summarize("W", sample.w));
  return t;
}

SummaryTable summary_stats(const PanelTable& panel) {
  if (panel.units.empty()) throw InvalidInput("summary of an empty panel");
  SummaryTable t;
  auto column = [&](bool income, std::size_t i) {
    std::vector<double> v;
    for (const auto& u : panel.units) {
      const auto x = usable(income ? u.income[i] : u.consumption[i]);
      if (x) v.push_back(*x);
    }
    const std::string name =
        std::string(income ? "income_" : "consumption_") + std::to_string(panel.waves[i]);
    return summarize(name, v);
  };
  for (std::size_t i = 0; i < 4; ++i) t.rows.push_back(column(true, i));
  for (std::size_t i = 0; i < 4; ++i) t.rows.push_back(column(false, i));
  return t;
}

std::string SummaryTable::to_text() const {
  std::ostringstream os;
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size() + 2);
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::fixed
       << std::setprecision(3) << std::setw(10) << r.mean << '\n';
    os << std::setw(static_cast<int>(width)) << "" << std::setw(10)
       << ("(" + [&] {
            std::ostringstream s;
            s << std::fixed << std::setprecision(3) << r.sd;
            return s.str();
          }() + ")")
       << (r.degenerate ? "  [n=1]" : "") << '\n';
  }
  return os.str();
}

std::string SummaryTable::to_csv() const {
  std::ostringstream os;
  os << "variable,n,mean,sd,degenerate\n";
  for (const auto& r : rows) {
    os << r.name << ',' << r.n << ',' << csv::format_double(r.mean) << ','
       << csv::format_double(r.sd) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace latentad
