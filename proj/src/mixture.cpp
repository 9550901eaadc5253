#include "fdrpower/mixture.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdrpower {

MixtureModel::MixtureModel(double r, TestDist null_dist,
                           std::vector<std::pair<double, TestDist>> alts)
    : r_(r), null_dist_(null_dist), alts_(std::move(alts)) {
  if (!(r > 0.0) || !(r < 1.0))
    throw std::domain_error("MixtureModel: requires 0 < r < 1");
  if (null_dist_.ncp != 0.0)
    throw std::domain_error("MixtureModel: null component must have ncp = 0");
  if (alts_.empty())
    throw std::domain_error("MixtureModel: needs at least one alternative");
  double wsum = 0.0;
  for (const auto& [w, d] : alts_) {
    if (!(w > 0.0)) throw std::domain_error("MixtureModel: weights must be > 0");
    if (!(d.ncp > 0.0))
      throw std::domain_error("MixtureModel: alternative ncp must be > 0");
    if (d.family != null_dist_.family ||
        (d.family == Family::FoldedT && d.df != null_dist_.df))
      throw std::domain_error(
          "MixtureModel: alternatives must share the null family and df");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw std::domain_error("MixtureModel: weights must sum to 1");

  // Single t/normal alternatives have a monotone likelihood ratio, so G is
  // concave. Finite mixtures should preserve it; verify on a log-spaced
  // grid rather than trust it.
  if (alts_.size() > 1) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 48; ++i) {
      const double u = std::exp(std::log(1e-8) * (1.0 - i / 49.0));
      const double gd = g_deriv(u);
      if (std::isfinite(gd)) {
        if (gd > prev * (1.0 + 1e-6)) {
          concavity_warning_ = true;
          break;
        }
        prev = gd;
      }
    }
  }
}

double MixtureModel::alt_hit_rate(double u) const {
  if (u < 0.0 || u > 1.0)
    throw std::domain_error("alt_hit_rate: requires u in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  const double x = inv_ccdf(null_dist_, u);
  double h = 0.0;
  for (const auto& [w, d] : alts_) h += w * ccdf(d, x);
  return h;
}

double MixtureModel::g_cdf(double u) const {
  if (u < 0.0 || u > 1.0)
    throw std::domain_error("g_cdf: requires u in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  return (1.0 - r_) * u + r_ * alt_hit_rate(u);
}

double MixtureModel::g0(double u) const {
  if (u < 0.0 || u > 1.0) throw std::domain_error("g0: requires u in [0, 1]");
  return (1.0 - r_) * u;
}

double MixtureModel::g1(double u) const {
  if (u < 0.0 || u > 1.0) throw std::domain_error("g1: requires u in [0, 1]");
  if (u == 0.0) return 0.0;
  return r_ * alt_hit_rate(u);
}

double MixtureModel::g_deriv(double u) const {
  if (!(u > 0.0) || !(u < 1.0))
    throw std::domain_error("g_deriv: requires u in (0, 1)");
  const double x = inv_ccdf(null_dist_, u);
  const double f0 = pdf(null_dist_, x);
  double fa = 0.0;
  for (const auto& [w, d] : alts_) fa += w * pdf(d, x);
  double ratio = fa / f0;
  if (!std::isfinite(ratio)) {
    // deep-tail fallback: central difference of the hit rate
    const double h = std::max(1e-7, 1e-4 * u);
    const double lo = std::max(u - h, u * 0.5);
    const double hi = std::min(u + h, 0.5 * (u + 1.0));
    ratio = (alt_hit_rate(hi) - alt_hit_rate(lo)) / (hi - lo);
    if (!std::isfinite(ratio))
      throw std::runtime_error("g_deriv: density ratio overflowed");
  }
  return (1.0 - r_) + r_ * ratio;
}

}  // namespace fdrpower
