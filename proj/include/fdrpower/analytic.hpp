#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "fdrpower/mixture.hpp"

namespace fdrpower {

// One design configuration for a multiple-testing experiment: m two-sided
// tests at nominal FDR f, a proportion r of them non-null with standardized
// two-group effect size theta and per-group sample size n. The test law is
// t with 2n-2 degrees of freedom and noncentrality sqrt(n/2) theta (or the
// matching folded normal when the variance is treated as known).
struct DesignPoint {
  std::int64_t m = 1;
  double r = 0.0;
  double f = 0.0;
  double theta = 0.0;
  std::int64_t n = 2;
  Family family = Family::FoldedT;

  double df() const { return 2.0 * static_cast<double>(n) - 2.0; }
  double ncp() const { return std::sqrt(0.5 * static_cast<double>(n)) * theta; }
  void validate() const;
  MixtureModel mixture() const;
};

// Raised when a bound cannot be met at the requested m.
struct InfeasibleBound : std::runtime_error {
  explicit InfeasibleBound(const std::string& what, std::int64_t min_m = -1)
      : std::runtime_error(what), min_feasible_m(min_m) {}
  std::int64_t min_feasible_m;
};

// Raised when an operation that needs gamma > 0 is applied to a design with
// no asymptotic discoveries.
struct DegenerateDesign : std::runtime_error {
  DegenerateDesign() : std::runtime_error("degenerate design: gamma = 0") {}
};

struct SearchExhausted : std::runtime_error {
  explicit SearchExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct CltVariances {
  double tau2 = 0.0;    // var of sqrt(m) (J/m - gamma)
  double sigma2 = 0.0;  // var of sqrt(m) (S/M - pi)
  double alpha2 = 0.0;  // var of sqrt(m) (T/J - f0)
};

// All analytic outputs for one design.
struct PowerReport {
  bool degenerate = false;
  double gamma = 0.0;
  double pi_pi = 0.0;      // plug-in (IST) average power
  double pi_oracle = 0.0;  // average power at the oracle threshold
  std::optional<double> pi_lower;  // finite-m lower bound (skipped if m huge)
  double f0 = 0.0;
  std::optional<CltVariances> clt;
  double lambda75 = 0.0;
  double lambda90 = 0.0;
  double lambda_eq = 0.0;
  std::optional<double> f_reduced_closed;
  std::optional<double> f_reduced_numeric;
};

// Largest root of G(u f) = u; 0 when no nonzero root exists.
double solve_gamma(const MixtureModel& mm, double f);

// Plug-in average power Fbar_A(Fbar_0^{-1}(gamma f)); 0 for degenerate designs.
double avg_power_ist(const MixtureModel& mm, double f);

// Average power of BH run at the inflated rate f/(1-r).
double oracle_power(const MixtureModel& mm, double f);

// Asymptotic variances of the PCF, TPF and FDF. Requires gamma > 0.
CltVariances clt_variances(const MixtureModel& mm, double f);

// CLT approximation of P{TPF >= lambda} at m tests.
double lambda_power(const MixtureModel& mm, double f, std::int64_t m,
                    double lambda);

// Threshold where the lambda-power equals the average power.
double lambda_eq(const MixtureModel& mm, double f, std::int64_t m);

// Upper-tail quantile of the FDF: f0 + alpha/sqrt(m) Phi^{-1}(1-p).
double fdf_quantile(const MixtureModel& mm, double f, std::int64_t m, double p);

// Reduced FDR via the closed form, with alpha and gamma evaluated at the
// given model and the original f.
double reduced_fdr_closed(const MixtureModel& mm, double f, std::int64_t m);

// Reduced FDR solving f0 = (1-r) f' + alpha/sqrt(m) Phi^{-1}(1 - (1-r) f').
// By default alpha and gamma stay fixed at the original design; with
// recompute_alpha they are re-evaluated at each candidate f'.
double reduced_fdr_numeric(const MixtureModel& mm, double f, std::int64_t m,
                           bool recompute_alpha = false);

// Finite-m lower bound on the average power (binomial mixture of beta
// order-statistic CDFs, truncated with certified mass below 1e-12).
double avg_power_lower_bound(const DesignPoint& dp);

// Smallest per-group n with avg_power >= target. Monotonicity over the
// searched bracket is verified, not assumed.
std::int64_t sample_size_avg(double theta, double r, double f, double target,
                             Family family = Family::FoldedT,
                             std::int64_t n_max = 1000000);

// Smallest per-group n with lambda_power(lambda) >= target.
std::int64_t sample_size_lambda(double theta, double r, double f,
                                std::int64_t m, double lambda, double target,
                                Family family = Family::FoldedT,
                                std::int64_t n_max = 1000000);

// Smallest n with oracle_power >= target (used by the capped lambda sizing).
std::int64_t sample_size_oracle(double theta, double r, double f, double target,
                                Family family = Family::FoldedT,
                                std::int64_t n_max = 1000000);

// Lambda-power sample size capped at ceil(1.5 x oracle-power size): design
// studies report the capped value when the uncapped solve runs away.
std::int64_t sample_size_lambda_capped(double theta, double r, double f,
                                       std::int64_t m, double lambda,
                                       double target,
                                       Family family = Family::FoldedT);

// One row of the FDF-control design study: the reduced FDR f' that bounds
// the FDF by f0 with probability 1-(1-r)f' for the lambda90-power design,
// plus the four sample sizes (average/lambda90 power at f and at f').
struct FdfStudyRow {
  double f_reduced = 0.0;       // f' from the lambda-design coupled solve
  double f_reduced_avg = 0.0;   // same solve coupled to the average-power design
  std::int64_t n_avg_f = 0;     // n for average power P at BH(f)
  std::int64_t n_avg_fp = 0;    // n for average power P at BH(f')
  std::int64_t n_lam_f = 0;     // n for lambda90-power P at BH(f)
  std::int64_t n_lam_fp = 0;    // n for lambda90-power P at BH(f')
};
FdfStudyRow fdf_study_row(std::int64_t m, double theta, double r, double f,
                          double target_power, Family family = Family::FoldedT);

// Central-difference partials of the average power in r, theta and f,
// scaled by the width of each parameter's range.
struct ScaledPartials {
  double d_r = 0.0;
  double d_theta = 0.0;
  double d_f = 0.0;
};
ScaledPartials power_partials(const DesignPoint& dp, double r_lo, double r_hi,
                              double theta_lo, double theta_hi, double f_lo,
                              double f_hi);

// Full analytic report for a design.
PowerReport power_report(const DesignPoint& dp, bool with_lower_bound = true);

}  // namespace fdrpower
