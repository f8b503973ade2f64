#include "leakdet/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace leakdet::special {

namespace {

constexpr int max_iterations = 1000;
constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double tiny = std::numeric_limits<double>::min() / eps;

// P(a,x) by power series, valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < max_iterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * eps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("regularized gamma: series did not converge");
}

// Q(a,x) by modified Lentz continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= max_iterations; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error(
        "regularized gamma: continued fraction did not converge");
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::domain_error("regularized gamma: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::domain_error("regularized gamma: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_survival(double x) {
    if (x < 0.0) throw std::domain_error("chi2_survival: x must be >= 0");
    return regularized_gamma_q(0.5, 0.5 * x);
}

double chi2_survival_inv(double p) {
    if (!(p > 0.0) || p > 1.0)
        throw std::domain_error("chi2_survival_inv: p must be in (0, 1]");
    if (p == 1.0) return 0.0;

    double lo = 0.0;
    double hi = 1.0;
    while (chi2_survival(hi) > p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e7)
            throw std::runtime_error("chi2_survival_inv: bracket overflow");
    }
    // survival is strictly decreasing; bisect until the bracket is tighter
    // than 1e-12 in both absolute and relative terms
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_survival(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double noncentral_chi2_survival(double lambda, double x) {
    if (lambda < 0.0 || x < 0.0)
        throw std::domain_error(
            "noncentral_chi2_survival: need lambda >= 0, x >= 0");
    if (x == 0.0) return 1.0;

    const double half_lambda = 0.5 * lambda;
    const double y = 0.5 * x;

    // Poisson mixture sum_j w_j Q(j + 1/2, y), summed outward from the
    // Poisson mode so the weights never underflow for large lambda.
    // Gamma recurrence: Q(a+1, y) = Q(a, y) + y^a e^-y / Gamma(a+1).
    const int j0 = static_cast<int>(half_lambda);
    const double log_w0 =
        half_lambda == 0.0
            ? 0.0
            : -half_lambda + j0 * std::log(half_lambda) - std::lgamma(j0 + 1.0);
    const double w0 = std::exp(log_w0);
    const double q0 = regularized_gamma_q(j0 + 0.5, y);
    // u_j = y^{j+1/2} e^-y / Gamma(j + 3/2), the Q(j+1/2) -> Q(j+3/2) step
    const double u0 =
        std::exp((j0 + 0.5) * std::log(y) - y - std::lgamma(j0 + 1.5));

    double sum = w0 * q0;
    double poisson_mass = w0;

    // upward sweep j0+1, j0+2, ...
    double w = w0, q = q0, u = u0;
    for (int j = j0; j < j0 + 200000; ++j) {
        w *= half_lambda / (j + 1.0);
        q += u;
        u *= y / (j + 1.5);
        sum += w * q;
        poisson_mass += w;
        if (w < 1e-15 && 1.0 - poisson_mass < 1e-14) break;
    }
    // downward sweep j0-1, ..., 0
    if (j0 >= 1) {
        w = w0;
        q = q0;
        u = u0 * (j0 + 0.5) / y;  // y^{j0-1/2} e^-y / Gamma(j0 + 1/2)
        for (int j = j0; j >= 1; --j) {
            w *= j / half_lambda;
            q -= u;
            u *= (j - 0.5) / y;
            sum += w * (q > 0.0 ? q : 0.0);
            poisson_mass += w;
            if (w < 1e-15 && 1.0 - poisson_mass < 1e-14) break;
        }
    }
    return sum < 1.0 ? sum : 1.0;
}

double normal_upper_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("normal_upper_quantile: p must be in (0, 1)");
    // P[Z > z] = chi2_survival(z^2) / 2 for z >= 0
    if (p == 0.5) return 0.0;
    if (p < 0.5) return std::sqrt(chi2_survival_inv(2.0 * p));
    return -std::sqrt(chi2_survival_inv(2.0 * (1.0 - p)));
}

}  // namespace leakdet::special
