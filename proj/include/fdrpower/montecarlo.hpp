#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fdrpower/analytic.hpp"

namespace fdrpower {

// Within-block compound-symmetry correlation for the subject-level
// generator. Statistics are two-sample z-scores there (the generating
// model has known unit marginal variance); the independent generator
// draws folded t statistics directly.
struct CorrelationSpec {
  double rho = 0.0;
  std::int64_t block_size = 100;
};

struct SimConfig {
  DesignPoint design;
  std::int64_t reps = 1000;
  std::uint64_t seed = 0x5eedf00dULL;
  std::vector<double> thresholds = {0.75, 0.90};  // lambda levels for TPF
  std::optional<double> fdf_excess;  // tail point for P{FDF > .}; default f0
  std::optional<CorrelationSpec> correlation;
};

struct ReplicateOutcome {
  std::int64_t M = 0;  // non-null tests
  std::int64_t J = 0;  // positive calls
  std::int64_t S = 0;  // true positives
  std::int64_t T = 0;  // false positives
  double tpf() const { return M > 0 ? static_cast<double>(S) / M : 0.0; }
  double fdf() const { return J > 0 ? static_cast<double>(T) / J : 0.0; }
};

struct SimSummary {
  double mean_tpf = 0.0;
  double se_mean_tpf = 0.0;
  std::map<double, double> lambda_power_hat;  // lambda -> P{TPF >= lambda}
  double fdr_hat = 0.0;                       // mean FDF
  double fdf_tail_hat = 0.0;                  // P{FDF > excess point}
  double fdf_excess_point = 0.0;
  double mean_pcf = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
};

// BH step-up: J = max{i: P_(i) <= i f/m} and the rejection mask (exactly
// the J smallest p-values, ties included).
std::int64_t bh_reject(const std::vector<double>& pvalues, double f,
                       std::vector<unsigned char>* mask = nullptr);

ReplicateOutcome simulate_replicate(const SimConfig& cfg,
                                    std::int64_t replicate_index);

// Aggregates `cfg.reps` replicates; bit-identical for identical (cfg, seed)
// at any worker count.
SimSummary run_sim(const SimConfig& cfg, int workers = 1);

}  // namespace fdrpower
