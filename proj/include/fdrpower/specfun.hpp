#pragma once

// Self-contained special functions backing every distribution in this
// library. No external math dependencies so results are bit-stable
// across platforms.

namespace fdrpower {

// ln Gamma(x), x > 0. Relative error below 1e-13 on [1e-3, 1e6].
double ln_gamma(double x);

// Regularized incomplete beta I_x(a, b), 0 <= x <= 1, a > 0, b > 0.
double reg_inc_beta(double x, double a, double b);

// Inverse of reg_inc_beta in x: returns x with I_x(a,b) = p to ~1e-12.
double inv_reg_inc_beta(double p, double a, double b);

// Standard normal CDF, survival function, density and quantile.
double norm_cdf(double z);
double norm_sf(double z);
double norm_pdf(double z);
double norm_quantile(double p);  // requires 0 < p < 1

}  // namespace fdrpower
