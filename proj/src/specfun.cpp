#include "fdrpower/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdrpower {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos approximation, g = 7, 9 terms.
const double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double ln_gamma_lanczos(double x) {
  // valid for x > 0.5
  double a = kLanczos[0];
  double t = x + 6.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i - 1.0);
  return 0.5 * std::log(2.0 * kPi) + (x - 0.5) * std::log(t) - t + std::log(a);
}

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision or close enough
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("ln_gamma: requires x > 0");
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(kPi / std::sin(kPi * x)) - ln_gamma_lanczos(1.0 - x);
  }
  return ln_gamma_lanczos(x);
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta: requires a > 0 and b > 0");
  if (x < 0.0 || x > 1.0)
    throw std::domain_error("reg_inc_beta: requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(x, a, b) / a;
  }
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double inv_reg_inc_beta(double p, double a, double b) {
  if (p < 0.0 || p > 1.0)
    throw std::domain_error("inv_reg_inc_beta: requires p in [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  // Bisection gets within ~1e-13 of the root; Newton polishes.
  double lo = 0.0, hi = 1.0;
  double x = 0.5;
  for (int it = 0; it < 60; ++it) {
    x = 0.5 * (lo + hi);
    if (reg_inc_beta(x, a, b) < p)
      lo = x;
    else
      hi = x;
  }
  x = 0.5 * (lo + hi);
  const double ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
  for (int it = 0; it < 3; ++it) {
    const double f = reg_inc_beta(x, a, b) - p;
    const double ln_pdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - ln_beta;
    const double step = f * std::exp(-ln_pdf);
    double xn = x - step;
    if (xn <= 0.0 || xn >= 1.0) break;
    x = xn;
  }
  return x;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

double norm_sf(double z) { return 0.5 * std::erfc(z * 0.7071067811865475244); }

double norm_pdf(double z) {
  return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

double norm_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("norm_quantile: requires p in (0, 1)");

  // Acklam's rational approximation followed by one Halley step.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the erfc-based CDF.
  const double e = norm_cdf(x) - p;
  const double u = e / norm_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace fdrpower
