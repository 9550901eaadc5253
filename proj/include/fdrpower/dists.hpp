#pragma once

#include <stdexcept>

namespace fdrpower {

enum class Family { FoldedT, FoldedNormal };

// A two-sided (folded) test-statistic law: |T| with T (non)central t of
// `df` degrees of freedom and noncentrality `ncp`, or |Z| with
// Z ~ N(ncp, 1). The null member has ncp = 0.
struct TestDist {
  Family family = Family::FoldedT;
  double df = 1.0;   // used by FoldedT only
  double ncp = 0.0;  // nonnegative

  static TestDist folded_t(double df, double ncp) {
    if (!(df > 0.0)) throw std::domain_error("TestDist: requires df > 0");
    if (ncp < 0.0) throw std::domain_error("TestDist: requires ncp >= 0");
    return {Family::FoldedT, df, ncp};
  }
  static TestDist folded_normal(double ncp) {
    if (ncp < 0.0) throw std::domain_error("TestDist: requires ncp >= 0");
    return {Family::FoldedNormal, 0.0, ncp};
  }
};

// CDF of the (signed) noncentral t distribution; reduces to the central t
// when ncp = 0. Absolute error ~1e-12.
double nct_cdf(double t, double df, double ncp);

// Upper tail P{T > t} of the noncentral t, computed without cancellation.
double nct_sf(double t, double df, double ncp);

// Central t helpers.
double t_sf(double t, double df);   // P{T > t}
double t_pdf(double t, double df);

// Folded-law operations. x >= 0 throughout.
double ccdf(const TestDist& d, double x);      // P{|X| > x}
double inv_ccdf(const TestDist& d, double p);  // x with ccdf(x) = p, 0 < p <= 1
double pdf(const TestDist& d, double x);       // density of |X| at x

}  // namespace fdrpower
