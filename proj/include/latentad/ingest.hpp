#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latentad/sample.hpp"

namespace latentad {

/// Four consecutive survey waves (t-2, t-1, t, t+1). Columns hold log
/// income and log consumption; a missing cell is nullopt.
struct PanelUnit {
  std::string id;
  std::array<std::optional<double>, 4> income;
  std::array<std::optional<double>, 4> consumption;
};

struct PanelTable {
  std::array<int, 4> waves{};
  std::vector<PanelUnit> units;

  /// Exactly four strictly increasing wave labels.
  void validate() const;
};

/// Maps CSV headers onto the panel. Defaults follow `income_<wave>` and
/// `consumption_<wave>` naming.
struct PanelSchema {
  std::string id_column = "id";
  std::array<int, 4> waves{2013, 2015, 2017, 2019};
  std::array<std::string, 4> income_columns;
  std::array<std::string, 4> consumption_columns;

  static PanelSchema with_prefixes(std::array<int, 4> waves,
                                   const std::string& income_prefix = "income_",
                                   const std::string& consumption_prefix = "consumption_",
                                   const std::string& id_column = "id");
};

/// Unparseable numeric cells become missing. Throws InvalidInput naming the
/// first mapped column absent from the header, or the first duplicated id.
PanelTable parse_panel_csv(const std::string& path, const PanelSchema& schema);

void write_panel_csv(const std::string& path, const PanelTable& panel, const PanelSchema& schema);

struct DropReport {
  std::size_t units = 0;
  std::size_t retained = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> reasons;
};

/// X = inc(t) - inc(t-2), W = inc(t+1) - inc(t-1), Y = cons(t) - cons(t-1),
/// with waves taken by position. A unit is dropped when any constructed
/// value is missing or non-finite; the first failing variable (X, then W,
/// then Y) names the reason. Throws InvalidInput when nothing survives.
std::pair<Sample, DropReport> build_differences(const PanelTable& panel);

struct SummaryRow {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;          // (n-1) denominator
  bool degenerate = false;  // n == 1, sd reported as 0
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  /// Two lines per column: the mean, then the sd in parentheses.
  std::string to_text() const;
  std::string to_csv() const;
};

SummaryTable summary_stats(const Sample& sample);
/// Income and consumption per wave, over the non-missing finite cells.
SummaryTable summary_stats(const PanelTable& panel);

}  // namespace latentad
