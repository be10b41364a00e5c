// Independent reference implementations used to freeze expected values.
// Everything here is deliberately written against the definitions, not the
// library code paths it checks.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Monomial coefficients of the Legendre polynomial P_n via the three-term
// recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
inline std::vector<double> legendre_coeffs(int n) {
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n) + 1);
    p[0] = {1.0};
    if (n >= 1)
        p[1] = {0.0, 1.0};
    for (int k = 1; k < n; ++k) {
        std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
        for (std::size_t i = 0; i < p[static_cast<std::size_t>(k)].size(); ++i)
            next[i + 1] += (2.0 * k + 1.0) * p[static_cast<std::size_t>(k)][i] / (k + 1.0);
        for (std::size_t i = 0; i < p[static_cast<std::size_t>(k - 1)].size(); ++i)
            next[i] -= static_cast<double>(k) * p[static_cast<std::size_t>(k - 1)][i] / (k + 1.0);
        p[static_cast<std::size_t>(k) + 1] = std::move(next);
    }
    return p[static_cast<std::size_t>(n)];
}

// Normalized for the uniform density on [-1,1]: E[P_n^2] = 1/(2n+1).
inline std::vector<double> normalized_legendre_coeffs(int n) {
    auto c = legendre_coeffs(n);
    const double scale = std::sqrt(2.0 * n + 1.0);
    for (double& x : c)
        x *= scale;
    return c;
}

// Probabilists' Hermite He_n via He_{n+1} = x He_n - n He_{n-1}.
inline std::vector<double> hermite_coeffs(int n) {
    std::vector<std::vector<double>> h(static_cast<std::size_t>(n) + 1);
    h[0] = {1.0};
    if (n >= 1)
        h[1] = {0.0, 1.0};
    for (int k = 1; k < n; ++k) {
        std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
        for (std::size_t i = 0; i < h[static_cast<std::size_t>(k)].size(); ++i)
            next[i + 1] += h[static_cast<std::size_t>(k)][i];
        for (std::size_t i = 0; i < h[static_cast<std::size_t>(k - 1)].size(); ++i)
            next[i] -= static_cast<double>(k) * h[static_cast<std::size_t>(k - 1)][i];
        h[static_cast<std::size_t>(k) + 1] = std::move(next);
    }
    return h[static_cast<std::size_t>(n)];
}

// Normalized for the standard normal: E[He_n^2] = n!.
inline std::vector<double> normalized_hermite_coeffs(int n) {
    auto c = hermite_coeffs(n);
    double fact = 1.0;
    for (int k = 2; k <= n; ++k)
        fact *= k;
    const double scale = 1.0 / std::sqrt(fact);
    for (double& x : c)
        x *= scale;
    return c;
}

// Analytic raw moments of uniform[-1,1] and the standard normal.
inline std::vector<double> uniform_moments(int order) {
    std::vector<double> mu(static_cast<std::size_t>(2 * order) + 1, 0.0);
    for (int k = 0; k <= 2 * order; k += 2)
        mu[static_cast<std::size_t>(k)] = 1.0 / (k + 1.0);
    return mu;
}

inline std::vector<double> normal_moments(int order) {
    std::vector<double> mu(static_cast<std::size_t>(2 * order) + 1, 0.0);
    mu[0] = 1.0;
    for (int k = 2; k <= 2 * order; k += 2) {
        double dfact = 1.0; // (k-1)!!
        for (int j = k - 1; j > 1; j -= 2)
            dfact *= j;
        mu[static_cast<std::size_t>(k)] = dfact;
    }
    return mu;
}

// Plain power-sum evaluation of a monomial-coefficient polynomial.
inline double eval_monomial(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        acc += coeffs[k] * std::pow(x, static_cast<double>(k));
    return acc;
}

// Central finite difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x,
                                 double step = 1e-6) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

// Central finite difference of f along one coordinate.
inline double central_difference_dim(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x, int dim, double step = 1e-6) {
    Eigen::VectorXd hi = x, lo = x;
    hi(dim) += step;
    lo(dim) -= step;
    return (f(hi) - f(lo)) / (2.0 * step);
}

} // namespace oracles
