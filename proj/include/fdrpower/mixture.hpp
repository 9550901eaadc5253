#pragma once

#include <utility>
#include <vector>

#include "fdrpower/dists.hpp"

namespace fdrpower {

// The p-value mixture: a proportion r of the tests follow the alternative
// law, the rest the null. G is the common CDF of the two-sided p-values,
//   G(u) = (1-r) u + r Fbar_A(Fbar_0^{-1}(u)).
class MixtureModel {
 public:
  MixtureModel(double r, TestDist null_dist,
               std::vector<std::pair<double, TestDist>> alt_components);

  // Single-alternative convenience constructor.
  MixtureModel(double r, TestDist null_dist, TestDist alt)
      : MixtureModel(r, null_dist, {{1.0, alt}}) {}

  double r() const { return r_; }
  const TestDist& null_dist() const { return null_dist_; }
  const std::vector<std::pair<double, TestDist>>& alt_components() const {
    return alts_;
  }
  // Set when the construction-time grid check could not confirm that the
  // density ratio keeps G concave.
  bool concavity_warning() const { return concavity_warning_; }

  // Power at p-value threshold u: Fbar_A(Fbar_0^{-1}(u)).
  double alt_hit_rate(double u) const;

  double g_cdf(double u) const;    // G(u)
  double g0(double u) const;       // (1-r) u
  double g1(double u) const;       // r Fbar_A(Fbar_0^{-1}(u))
  double g_deriv(double u) const;  // dG/du, density-ratio form

 private:
  double r_;
  TestDist null_dist_;
  std::vector<std::pair<double, TestDist>> alts_;
  bool concavity_warning_ = false;
};

}  // namespace fdrpower
