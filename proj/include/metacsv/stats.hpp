#ifndef METACSV_STATS_HPP
#define METACSV_STATS_HPP

namespace metacsv::stats {

/// Standard normal CDF, evaluated through erfc. Accurate to ~1e-15.
double normal_cdf(double x);

/// Upper tail of the standard normal, 1 - Phi(x).
double normal_sf(double x);

/// Two-sided normal p-value for a z statistic: 2 * (1 - Phi(|z|)).
double two_sided_p(double z);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise;
/// both iterated to a relative tolerance of 1e-15 (well below the 1e-12
/// the callers need).
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Chi-square survival function with df degrees of freedom,
/// Q(df/2, x/2). df == 0 degenerates to 1 at x <= 0 and 0 beyond.
double chi_square_sf(double x, double df);

}  // namespace metacsv::stats

#endif
