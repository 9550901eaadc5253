#include "fdrpower/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fdrpower/specfun.hpp"

namespace fdrpower {

namespace {

double require_prob_open(double v, const char* name) {
  if (!(v > 0.0) || !(v < 1.0))
    throw std::domain_error(std::string(name) + ": must lie in (0, 1)");
  return v;
}

// Smallest integer n >= 2 with pred(n) true, assuming pred eventually
// stays true; bracket by doubling, then binary search.
std::int64_t int_solve(const std::function<bool(std::int64_t)>& pred,
                       std::int64_t n_max, const char* what) {
  std::int64_t hi = 2;
  while (hi <= n_max && !pred(hi)) hi *= 2;
  if (hi > n_max) throw SearchExhausted(std::string(what) + ": no n <= n_max");
  std::int64_t lo = std::max<std::int64_t>(2, hi / 2);
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

MixtureModel make_mixture(double theta, double r, std::int64_t n,
                          Family family) {
  const double ncp = std::sqrt(0.5 * static_cast<double>(n)) * theta;
  if (family == Family::FoldedNormal) {
    return MixtureModel(r, TestDist::folded_normal(0.0),
                        TestDist::folded_normal(ncp));
  }
  const double df = 2.0 * static_cast<double>(n) - 2.0;
  return MixtureModel(r, TestDist::folded_t(df, 0.0),
                      TestDist::folded_t(df, ncp));
}

// Numeric reduced-FDR equation with gamma (hence alpha) held fixed:
//   f0 = (1-r) x + alpha(x)/sqrt(m) Phi^{-1}(1 - (1-r) x),
// alpha(x)^2 = (1-r) x (1 - (1-r) x gamma) / gamma. Returns the largest
// root in (0, f], or nothing.
std::optional<double> solve_reduced_eqn(double r, double f, double f0,
                                        std::int64_t m, double gamma) {
  const double sqm = std::sqrt(static_cast<double>(m));
  auto res = [&](double x) {
    const double fx = (1.0 - r) * x;
    const double a = std::sqrt(fx * (1.0 - fx * gamma) / gamma);
    return fx + (a / sqm) * norm_quantile(1.0 - fx) - f0;
  };
  const int kGrid = 400;
  double prev_x = f;
  double prev_v = res(f);
  for (int i = 1; i <= kGrid; ++i) {
    const double x = f * (1.0 - static_cast<double>(i) / kGrid) + 1e-7;
    const double v = res(x);
    if ((prev_v <= 0.0 && v >= 0.0) || (prev_v >= 0.0 && v <= 0.0)) {
      double lo = x, hi = prev_x;
      double vlo = v;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = res(mid);
        if ((vm <= 0.0) == (vlo <= 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
        if (hi - lo < 1e-14) break;
      }
      return 0.5 * (lo + hi);
    }
    prev_x = x;
    prev_v = v;
  }
  return std::nullopt;
}

}  // namespace

void DesignPoint::validate() const {
  if (m < 1) throw std::domain_error("DesignPoint: requires m >= 1");
  if (n < 2) throw std::domain_error("DesignPoint: requires n >= 2");
  require_prob_open(r, "DesignPoint.r");
  require_prob_open(f, "DesignPoint.f");
  if (!(theta > 0.0)) throw std::domain_error("DesignPoint: requires theta > 0");
}

MixtureModel DesignPoint::mixture() const {
  validate();
  return make_mixture(theta, r, n, family);
}

double solve_gamma(const MixtureModel& mm, double f) {
  require_prob_open(f, "f");
  auto H = [&](double u) { return mm.g_cdf(u * f) - u; };

  // Geometric scan from 1 downward brackets the sign change nearest 1;
  // concavity of G gives a single nonzero root above the scan floor.
  const int kPoints = 96;
  const double lo_u = 1e-12;
  double upper = 1.0;
  double upper_v = H(1.0);  // <= 0 always (G(f) <= 1)
  double lower = 0.0, lower_v = 0.0;
  bool found = false;
  for (int i = 1; i <= kPoints; ++i) {
    const double u =
        std::exp(std::log(lo_u) * static_cast<double>(i) / kPoints);
    const double v = H(u);
    if (v > 0.0) {
      lower = u;
      lower_v = v;
      found = true;
      break;
    }
    upper = u;
    upper_v = v;
  }
  (void)lower_v;
  (void)upper_v;
  if (!found) return 0.0;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lower + upper);
    if (mid == lower || mid == upper) break;
    if (H(mid) > 0.0)
      lower = mid;
    else
      upper = mid;
    if (upper - lower < 1e-15) break;
  }
  return 0.5 * (lower + upper);
}

double avg_power_ist(const MixtureModel& mm, double f) {
  const double g = solve_gamma(mm, f);
  if (g <= 0.0) return 0.0;
  return mm.alt_hit_rate(g * f);
}

double oracle_power(const MixtureModel& mm, double f) {
  const double fo = f / (1.0 - mm.r());
  if (!(fo < 1.0))
    throw std::domain_error("oracle_power: f/(1-r) must stay below 1");
  return avg_power_ist(mm, fo);
}

CltVariances clt_variances(const MixtureModel& mm, double f) {
  const double g = solve_gamma(mm, f);
  if (g <= 0.0) throw DegenerateDesign();
  const double r = mm.r();
  const double pi = mm.alt_hit_rate(g * f);
  const double gd = mm.g_deriv(g * f);
  const double denom = 1.0 - f * gd;

  CltVariances out;
  out.tau2 = g * (1.0 - g) / (denom * denom);
  const double v1 = r * pi - r * r * pi * pi;
  const double c01 = -r * (1.0 - r) * g * f * pi;
  const double gd1 = gd - (1.0 - r);
  const double var_x1 = v1 + gd1 * gd1 * f * f * out.tau2 +
                        2.0 * f * gd1 * (v1 + c01) / denom;
  const double cov =
      r * (1.0 - r) * (pi + f * gd1 * (g * f + pi) / denom);
  out.sigma2 =
      (var_x1 - 2.0 * pi * cov + pi * pi * r * (1.0 - r)) / (r * r);
  out.alpha2 = (1.0 - r) * f * (1.0 - (1.0 - r) * f * g) / g;
  return out;
}

double lambda_power(const MixtureModel& mm, double f, std::int64_t m,
                    double lambda) {
  const double g = solve_gamma(mm, f);
  if (g <= 0.0) return 0.0;
  const double pi = mm.alt_hit_rate(g * f);
  const CltVariances v = clt_variances(mm, f);
  if (!(v.sigma2 > 0.0)) return lambda < pi ? 1.0 : 0.0;
  return norm_cdf(std::sqrt(static_cast<double>(m)) * (pi - lambda) /
                  std::sqrt(v.sigma2));
}

double lambda_eq(const MixtureModel& mm, double f, std::int64_t m) {
  const double g = solve_gamma(mm, f);
  if (g <= 0.0) throw DegenerateDesign();
  const double pi = mm.alt_hit_rate(g * f);
  const CltVariances v = clt_variances(mm, f);
  return pi - std::sqrt(v.sigma2 / static_cast<double>(m)) * norm_quantile(pi);
}

double fdf_quantile(const MixtureModel& mm, double f, std::int64_t m,
                    double p) {
  require_prob_open(p, "p");
  const CltVariances v = clt_variances(mm, f);
  const double f0 = (1.0 - mm.r()) * f;
  return f0 + std::sqrt(v.alpha2 / static_cast<double>(m)) *
                  norm_quantile(1.0 - p);
}

double reduced_fdr_closed(const MixtureModel& mm, double f, std::int64_t m) {
  const CltVariances v = clt_variances(mm, f);
  const double r = mm.r();
  const double f0 = (1.0 - r) * f;
  const double fpp = f - std::sqrt(v.alpha2 / static_cast<double>(m)) /
                             (1.0 - r) * norm_quantile(1.0 - (1.0 - r) * f0);
  if (!(fpp > 0.0))
    throw InfeasibleBound("reduced_fdr_closed: bound infeasible at this m");
  return fpp;
}

double reduced_fdr_numeric(const MixtureModel& mm, double f, std::int64_t m,
                           bool recompute_alpha) {
  const double r = mm.r();
  const double f0 = (1.0 - r) * f;
  if (!recompute_alpha) {
    const double g = solve_gamma(mm, f);
    if (g <= 0.0) throw DegenerateDesign();
    auto root = solve_reduced_eqn(r, f, f0, m, g);
    if (!root) {
      // smallest m making the equation solvable, reported for diagnostics
      std::int64_t lo = m, hi = m;
      while (!solve_reduced_eqn(r, f, f0, hi, g) && hi < (1LL << 40)) hi *= 2;
      lo = hi / 2;
      while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (solve_reduced_eqn(r, f, f0, mid, g))
          hi = mid;
        else
          lo = mid + 1;
      }
      throw InfeasibleBound("reduced_fdr_numeric: no root in (0, f] at this m",
                            hi);
    }
    return *root;
  }

  // recompute mode: gamma (hence alpha) re-evaluated at each candidate f'
  const double sqm = std::sqrt(static_cast<double>(m));
  auto res = [&](double x) {
    const double gx = solve_gamma(mm, x);
    if (gx <= 0.0) return 1.0;  // no discoveries: bound trivially unmet
    const double fx = (1.0 - r) * x;
    const double a = std::sqrt(fx * (1.0 - fx * gx) / gx);
    return fx + (a / sqm) * norm_quantile(1.0 - fx) - f0;
  };
  double prev_x = f, prev_v = res(f);
  for (int i = 1; i <= 200; ++i) {
    const double x = f * (1.0 - i / 200.0) + 1e-7;
    const double v = res(x);
    if ((prev_v <= 0.0) != (v <= 0.0)) {
      double lo = x, hi = prev_x, vlo = v;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = res(mid);
        if ((vm <= 0.0) == (vlo <= 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_x = x;
    prev_v = v;
  }
  throw InfeasibleBound("reduced_fdr_numeric: no root in (0, f] at this m");
}

double avg_power_lower_bound(const DesignPoint& dp) {
  dp.validate();
  const MixtureModel mm = dp.mixture();
  const double m = static_cast<double>(dp.m);
  const double r = dp.r;
  const double f = dp.f;

  const double mean = m * r;
  const double sd = std::sqrt(m * r * (1.0 - r));
  const std::int64_t lo =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(mean - 10.0 * sd));
  const std::int64_t hi = std::min<std::int64_t>(
      dp.m, static_cast<std::int64_t>(std::ceil(mean + 10.0 * sd)));

  // P{P1,(s) <= s f/m} = I_{H(s f/m)}(s, l-s+1) with H the non-null hit rate.
  std::vector<double> hvals(static_cast<size_t>(hi) + 1, 0.0);
  for (std::int64_t s = 1; s <= hi; ++s)
    hvals[static_cast<size_t>(s)] =
        mm.alt_hit_rate(std::min(1.0, static_cast<double>(s) * f / m));

  const double lnr = std::log(r);
  const double ln1mr = std::log1p(-r);
  const double lgm = ln_gamma(m + 1.0);

  double total = 0.0;
  for (std::int64_t l = lo; l <= hi; ++l) {
    const double ld = static_cast<double>(l);
    const double lnpmf = lgm - ln_gamma(ld + 1.0) - ln_gamma(m - ld + 1.0) +
                         ld * lnr + (m - ld) * ln1mr;
    if (lnpmf < -40.0) continue;
    const double pmf = std::exp(lnpmf);
    double inner = 0.0;
    for (std::int64_t s = 1; s <= l; ++s) {
      inner += reg_inc_beta(hvals[static_cast<size_t>(s)],
                            static_cast<double>(s),
                            static_cast<double>(l - s + 1));
    }
    total += pmf * inner / ld;
  }
  return std::min(total, 1.0);
}

std::int64_t sample_size_avg(double theta, double r, double f, double target,
                             Family family, std::int64_t n_max) {
  require_prob_open(target, "target");
  auto power = [&](std::int64_t n) {
    return avg_power_ist(make_mixture(theta, r, n, family), f);
  };
  const std::int64_t n =
      int_solve([&](std::int64_t k) { return power(k) >= target; }, n_max,
                "sample_size_avg");
  // verify monotonicity near the solution instead of assuming it
  if (n > 2 && power(n - 1) > power(n) + 1e-9)
    throw std::runtime_error("sample_size_avg: power not monotone at solution");
  return n;
}

std::int64_t sample_size_oracle(double theta, double r, double f, double target,
                                Family family, std::int64_t n_max) {
  return sample_size_avg(theta, r, f / (1.0 - r), target, family, n_max);
}

std::int64_t sample_size_lambda(double theta, double r, double f,
                                std::int64_t m, double lambda, double target,
                                Family family, std::int64_t n_max) {
  require_prob_open(target, "target");
  auto lp = [&](std::int64_t n) {
    return lambda_power(make_mixture(theta, r, n, family), f, m, lambda);
  };
  return int_solve([&](std::int64_t k) { return lp(k) >= target; }, n_max,
                   "sample_size_lambda");
}

std::int64_t sample_size_lambda_capped(double theta, double r, double f,
                                       std::int64_t m, double lambda,
                                       double target, Family family) {
  const std::int64_t n_oracle = sample_size_oracle(theta, r, f, target, family);
  const std::int64_t cap = static_cast<std::int64_t>(
      std::ceil(1.5 * static_cast<double>(n_oracle)));
  std::int64_t uncapped;
  try {
    uncapped = sample_size_lambda(theta, r, f, m, lambda, target, family,
                                  std::max<std::int64_t>(4 * cap, 1024));
  } catch (const SearchExhausted&) {
    return cap;
  }
  return std::min(uncapped, cap);
}

FdfStudyRow fdf_study_row(std::int64_t m, double theta, double r, double f,
                          double target_power, Family family) {
  FdfStudyRow row;
  const double f0 = (1.0 - r) * f;
  row.n_avg_f = sample_size_avg(theta, r, f, target_power, family);
  row.n_lam_f =
      sample_size_lambda_capped(theta, r, f, m, 0.90, target_power, family);

  // Coupled solve: the reduced FDR is tied to the design it will be used
  // with, so gamma/alpha are evaluated at the design sized under the
  // candidate f' and the pair is iterated to a fixed point.
  auto coupled = [&](bool lambda_design) {
    double fp = f;
    std::int64_t nd = lambda_design ? row.n_lam_f : row.n_avg_f;
    for (int it = 0; it < 50; ++it) {
      const std::int64_t nd_new =
          lambda_design
              ? sample_size_lambda_capped(theta, r, fp, m, 0.90, target_power,
                                          family)
              : sample_size_avg(theta, r, fp, target_power, family);
      const double g = solve_gamma(make_mixture(theta, r, nd_new, family), fp);
      if (g <= 0.0) throw DegenerateDesign();
      auto root = solve_reduced_eqn(r, f, f0, m, g);
      if (!root)
        throw InfeasibleBound("fdf_study_row: bound infeasible at this m");
      const bool done = (nd_new == nd) && std::fabs(*root - fp) < 1e-10;
      nd = nd_new;
      fp = *root;
      if (done) break;
    }
    return std::pair<double, std::int64_t>{fp, nd};
  };

  auto [fp_lam, n_lam] = coupled(true);
  auto [fp_avg, n_avg] = coupled(false);
  row.f_reduced = fp_lam;
  row.f_reduced_avg = fp_avg;
  row.n_lam_fp = n_lam;
  row.n_avg_fp = n_avg;
  return row;
}

ScaledPartials power_partials(const DesignPoint& dp, double r_lo, double r_hi,
                              double theta_lo, double theta_hi, double f_lo,
                              double f_hi) {
  dp.validate();
  if (!(r_lo < dp.r && dp.r < r_hi) || !(theta_lo < dp.theta && dp.theta < theta_hi) ||
      !(f_lo < dp.f && dp.f < f_hi))
    throw std::domain_error("power_partials: design must lie inside the ranges");

  auto pw = [&](double r, double theta, double f) {
    return avg_power_ist(make_mixture(theta, r, dp.n, dp.family), f);
  };
  auto central = [&](double lo, double hi, double at,
                     const std::function<double(double)>& fn) {
    double h = 1e-3 * (hi - lo);
    h = std::min({h, (at - lo) * 0.5, (hi - at) * 0.5});
    return (fn(at + h) - fn(at - h)) / (2.0 * h) * (hi - lo);
  };

  ScaledPartials out;
  out.d_r = central(r_lo, r_hi, dp.r,
                    [&](double v) { return pw(v, dp.theta, dp.f); });
  out.d_theta = central(theta_lo, theta_hi, dp.theta,
                        [&](double v) { return pw(dp.r, v, dp.f); });
  out.d_f = central(f_lo, f_hi, dp.f,
                    [&](double v) { return pw(dp.r, dp.theta, v); });
  return out;
}

PowerReport power_report(const DesignPoint& dp, bool with_lower_bound) {
  dp.validate();
  const MixtureModel mm = dp.mixture();
  PowerReport rep;
  rep.f0 = (1.0 - dp.r) * dp.f;
  rep.gamma = solve_gamma(mm, dp.f);
  if (rep.gamma <= 0.0) {
    rep.degenerate = true;
    return rep;
  }
  rep.pi_pi = mm.alt_hit_rate(rep.gamma * dp.f);
  rep.pi_oracle = oracle_power(mm, dp.f);
  if (with_lower_bound) rep.pi_lower = avg_power_lower_bound(dp);
  rep.clt = clt_variances(mm, dp.f);
  rep.lambda75 = lambda_power(mm, dp.f, dp.m, 0.75);
  rep.lambda90 = lambda_power(mm, dp.f, dp.m, 0.90);
  rep.lambda_eq = lambda_eq(mm, dp.f, dp.m);
  try {
    rep.f_reduced_closed = reduced_fdr_closed(mm, dp.f, dp.m);
  } catch (const InfeasibleBound&) {
  }
  try {
    rep.f_reduced_numeric = reduced_fdr_numeric(mm, dp.f, dp.m);
  } catch (const InfeasibleBound&) {
  }
  return rep;
}

}  // namespace fdrpower
