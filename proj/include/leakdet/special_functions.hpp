#pragma once

namespace leakdet::special {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_q(double a, double x);

/// Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x).
double regularized_gamma_p(double a, double x);

/// Survival function of a central chi-square with 1 degree of freedom:
/// P[X > x] = Q(1/2, x/2). Equals erfc(sqrt(x/2)).
double chi2_survival(double x);

/// Inverse of chi2_survival on (0, 1]; chi2_survival_inv(1) = 0.
/// Bracketing bisection to 1e-12.
double chi2_survival_inv(double p);

/// Survival function of a noncentral chi-square with 1 degree of freedom
/// and noncentrality lambda, as the Poisson mixture
///   sum_j e^{-lambda/2} (lambda/2)^j / j! * Q(j + 1/2, x/2),
/// truncated once the remaining Poisson mass drops below 1e-14.
double noncentral_chi2_survival(double lambda, double x);

/// Upper-tail standard normal quantile: z with P[Z > z] = p, p in (0, 1).
double normal_upper_quantile(double p);

}  // namespace leakdet::special
