#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fdrpower/montecarlo.hpp"
#include "fdrpower/rng.hpp"

using namespace fdrpower;

namespace {

// naive step-up oracle: check every row index directly
std::int64_t bh_naive(std::vector<double> p, double f) {
  std::sort(p.begin(), p.end());
  const std::int64_t m = static_cast<std::int64_t>(p.size());
  std::int64_t best = 0;
  for (std::int64_t i = 1; i <= m; ++i) {
    if (p[static_cast<size_t>(i - 1)] <= static_cast<double>(i) * f / m)
      best = i;
  }
  return best;
}

SimConfig base_config() {
  SimConfig cfg;
  cfg.design.m = 200;
  cfg.design.r = 0.025;
  cfg.design.f = 0.15;
  cfg.design.theta = 0.6;
  cfg.design.n = 70;
  cfg.reps = 400;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("bh_reject basics") {
  CHECK(bh_reject({1.0, 1.0, 1.0}, 0.1) == 0);
  // a single test reduces to a level-f test
  CHECK(bh_reject({0.01}, 0.05) == 1);
  CHECK(bh_reject({0.06}, 0.05) == 0);

  std::vector<unsigned char> mask;
  const std::vector<double> p = {0.001, 0.8, 0.01, 0.02, 0.5};
  const std::int64_t j = bh_reject(p, 0.15, &mask);
  CHECK(j == 3);
  CHECK(mask == std::vector<unsigned char>{1, 0, 1, 1, 0});
}

TEST_CASE("bh_reject equals the naive oracle on random instances") {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform() * 20);
    std::vector<double> p(m);
    for (auto& v : p) v = rng.uniform();
    const double f = 0.02 + 0.5 * rng.uniform();
    std::vector<unsigned char> mask;
    const std::int64_t j = bh_reject(p, f, &mask);
    CHECK(j == bh_naive(p, f));
    CHECK(std::count(mask.begin(), mask.end(), 1) == j);
  }
}

TEST_CASE("replicate counts are consistent") {
  SimConfig cfg = base_config();
  for (std::int64_t i = 0; i < 100; ++i) {
    const ReplicateOutcome o = simulate_replicate(cfg, i);
    CHECK(o.T == o.J - o.S);
    CHECK(o.S <= std::min(o.J, o.M));
    CHECK(o.J <= cfg.design.m);
    CHECK(o.S >= 0);
    if (o.M == 0) CHECK(o.tpf() == 0.0);  // 0/0 convention
    if (o.J == 0) CHECK(o.fdf() == 0.0);
  }
}

TEST_CASE("same seed reproduces bit-identical summaries") {
  SimConfig cfg = base_config();
  const SimSummary a = run_sim(cfg, 1);
  const SimSummary b = run_sim(cfg, 1);
  CHECK(a.mean_tpf == b.mean_tpf);
  CHECK(a.fdr_hat == b.fdr_hat);
  CHECK(a.lambda_power_hat == b.lambda_power_hat);
}

TEST_CASE("worker count does not change the result") {
  SimConfig cfg = base_config();
  const SimSummary s1 = run_sim(cfg, 1);
  const SimSummary s4 = run_sim(cfg, 4);
  const SimSummary s16 = run_sim(cfg, 16);
  CHECK(s1.mean_tpf == s4.mean_tpf);
  CHECK(s1.mean_tpf == s16.mean_tpf);
  CHECK(s1.fdr_hat == s4.fdr_hat);
  CHECK(s1.fdf_tail_hat == s16.fdf_tail_hat);
  CHECK(s1.lambda_power_hat == s16.lambda_power_hat);
}

TEST_CASE("different seeds decorrelate") {
  SimConfig cfg = base_config();
  SimConfig cfg2 = cfg;
  cfg2.seed = 100;
  CHECK(run_sim(cfg, 1).mean_tpf != run_sim(cfg2, 1).mean_tpf);
}

TEST_CASE("empirical FDR matches (1-r) f") {
  SimConfig cfg;
  cfg.design.m = 2000;
  cfg.design.r = 0.05;
  cfg.design.f = 0.15;
  cfg.design.theta = 1.0;
  cfg.design.n = 15;
  cfg.reps = 2000;
  cfg.seed = 7;
  const SimSummary s = run_sim(cfg, 4);
  const double f0 = 0.95 * 0.15;
  // 3 MC standard errors of the mean FDF
  const double se = 0.045 / std::sqrt(static_cast<double>(cfg.reps));
  CHECK(std::fabs(s.fdr_hat - f0) < 3.0 * se + 0.003);
}

TEST_CASE("mean TPF tracks the plug-in power") {
  SimConfig cfg;
  cfg.design.m = 2000;
  cfg.design.r = 0.05;
  cfg.design.f = 0.15;
  cfg.design.theta = 1.0;
  cfg.design.n = 15;
  cfg.reps = 1500;
  cfg.seed = 21;
  const SimSummary s = run_sim(cfg, 4);
  const double pi = avg_power_ist(cfg.design.mixture(), cfg.design.f);
  CHECK(std::fabs(s.mean_tpf - pi) < 3.0 * s.se_mean_tpf + 1e-3);
}

TEST_CASE("correlated mode at rho zero matches its analytic law") {
  // subject-level z statistics: the analytic reference is the folded
  // normal model at the same noncentrality
  SimConfig cfg;
  cfg.design.m = 500;
  cfg.design.r = 0.05;
  cfg.design.f = 0.15;
  cfg.design.theta = 1.25;
  cfg.design.n = 16;
  cfg.design.family = Family::FoldedNormal;
  cfg.reps = 600;
  cfg.seed = 13;
  cfg.correlation = CorrelationSpec{0.0, 100};
  const SimSummary corr = run_sim(cfg, 4);

  SimConfig ind = cfg;
  ind.correlation.reset();
  const SimSummary indep = run_sim(ind, 4);
  const double se = std::hypot(corr.se_mean_tpf, indep.se_mean_tpf);
  CHECK(std::fabs(corr.mean_tpf - indep.mean_tpf) < 3.0 * se);

  const double pi = avg_power_ist(cfg.design.mixture(), cfg.design.f);
  CHECK(std::fabs(corr.mean_tpf - pi) < 4.0 * corr.se_mean_tpf + 2e-3);
}

TEST_CASE("block correlation disperses the TPF distribution") {
  SimConfig cfg;
  cfg.design.m = 2000;
  cfg.design.r = 0.05;
  cfg.design.f = 0.15;
  cfg.design.theta = 1.25;
  cfg.design.n = 16;
  cfg.design.family = Family::FoldedNormal;
  cfg.reps = 300;
  cfg.seed = 31;
  cfg.correlation = CorrelationSpec{0.0, 100};
  const SimSummary r0 = run_sim(cfg, 4);
  cfg.correlation->rho = 0.8;
  const SimSummary r8 = run_sim(cfg, 4);
  // means agree, spread does not
  CHECK(std::fabs(r0.mean_tpf - r8.mean_tpf) <
        4.0 * std::hypot(r0.se_mean_tpf, r8.se_mean_tpf));
  CHECK(r8.se_mean_tpf > 2.0 * r0.se_mean_tpf);
}
