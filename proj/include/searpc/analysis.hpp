#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "searpc/basis.hpp"
#include "searpc/regression.hpp"

namespace searpc {

struct OutputSummary {
    double mean = 0.0;
    double variance = 0.0;
    Eigen::VectorXd sobol_first_order;
    std::optional<double> ks_distance;

    nlohmann::json to_json() const;
};

/// Kernel density estimate on a regular grid; trapezoidal integral is 1.
struct DensityEstimate {
    Eigen::VectorXd grid;
    Eigen::VectorXd density;
    double bandwidth = 0.0;
};

/// mean = lambda_0 * Psi_0, variance = sum_{j>=1} gamma_j lambda_j^2.
std::pair<double, double> analytic_moments(const PceModel& model, const MultivariateBasis& basis);

/// S_j = sum over terms where input j is active of gamma_k lambda_k^2,
/// divided by the variance. Interaction terms count towards every active
/// input; strict_first_order restricts the numerator to terms active in
/// input j alone.
Eigen::VectorXd sobol_first_order(const PceModel& model, const MultivariateBasis& basis,
                                  bool strict_first_order = false);

/// Normalized mean absolute gradient per input: S_k = sum_m |g_mk| / sum_{i,m} |g_mi|.
Eigen::VectorXd mc_sensitivity_heatmap(const Eigen::MatrixXd& gradients);

/// Gaussian KDE with Silverman bandwidth h = 0.9 min(sd, IQR/1.34) n^{-1/5}
/// on a 512-point grid spanning [min - 3h, max + 3h].
DensityEstimate kernel_density(const Eigen::VectorXd& values, int grid_size = 512);

/// Evaluates the surrogate over Monte Carlo points and smooths the result.
DensityEstimate surrogate_density(const MultivariateBasis& basis, const PceModel& model,
                                  const Eigen::MatrixXd& mc_points, int grid_size = 512);

/// Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Sample skewness and excess-free kurtosis (raw standardized 4th moment).
std::pair<double, double> sample_skewness_kurtosis(const Eigen::VectorXd& values);

} // namespace searpc
