#pragma once

namespace synthweave {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse standard normal CDF for u in (0, 1). Rational initial guess
/// refined with Newton steps against normal_cdf; absolute round-trip
/// error |normal_cdf(normal_quantile(u)) - u| stays below 1e-14 away
/// from the extreme tails. Throws std::domain_error outside (0, 1).
double normal_quantile(double u);

}  // namespace synthweave
