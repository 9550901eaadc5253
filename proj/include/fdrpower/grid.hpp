#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdrpower/montecarlo.hpp"

namespace fdrpower {

// Declarative sweep: explicit value lists (or lo/step/hi ranges expanded at
// parse time) for theta, E[M] or r, f and n, one m and family, optional
// simulation settings, and an optional power window that picks the n list
// per (theta, r, f) cell via the average-power sample size at the window
// endpoints.
struct GridConfig {
  std::vector<double> theta;
  std::vector<double> r;        // filled from expected_m/m when given
  std::vector<double> expected_m;
  std::vector<double> f;
  std::vector<std::int64_t> n;  // explicit; or auto via power window
  std::int64_t m = 1;
  Family family = Family::FoldedT;

  bool simulate = false;
  std::int64_t reps = 1000;
  std::uint64_t seed = 0x5eedf00dULL;
  std::vector<double> thresholds = {0.75, 0.90};
  std::optional<CorrelationSpec> correlation;

  std::optional<double> power_window_lo;
  std::optional<double> power_window_hi;
  std::int64_t n_step = 5;

  static GridConfig from_json_file(const std::string& path);
  static GridConfig from_json_text(const std::string& text);
};

struct ResultRow {
  DesignPoint design;
  PowerReport report;
  std::optional<SimSummary> sim;
  std::string error;  // per-row failure, recorded instead of aborting
  double wall_seconds = 0.0;
};

std::vector<DesignPoint> expand_grid(const GridConfig& cfg);

// Evaluates every design; rows already present in `resume_from` (matched by
// the design tuple) are carried over untouched. Writes JSON-lines
// incrementally to `jsonl_path` when given.
std::vector<ResultRow> run_grid(const GridConfig& cfg, int workers = 1,
                                const std::string& jsonl_path = "");

std::string row_to_json(const ResultRow& row);
ResultRow row_from_json(const std::string& line);

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void write_jsonl(const std::vector<ResultRow>& rows, std::ostream& os);
std::vector<ResultRow> read_jsonl(std::istream& is);

// Cell-by-cell comparison of computed rows against a reference CSV whose
// header names map onto result fields; returns the number of cells out of
// tolerance and writes a JSON report.
struct CompareOutcome {
  std::int64_t cells_checked = 0;
  std::int64_t cells_failed = 0;
  std::string report_json;
};
CompareOutcome compare_report(const std::vector<ResultRow>& rows,
                              const std::string& reference_csv_path,
                              double abs_tol);

}  // namespace fdrpower
