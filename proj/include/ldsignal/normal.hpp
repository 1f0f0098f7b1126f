#pragma once

namespace ldsignal {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate in relative terms for large x.
double normal_sf(double x);
double log_normal_sf(double x);
double log_normal_cdf(double x);
// x such that normal_sf(x) == p, for p in (0, 1).
double normal_isf(double p);

}  // namespace ldsignal
