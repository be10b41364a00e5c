#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "searpc/moments.hpp"

namespace searpc {

struct ModelOutput {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// A test model with analytic gradient. Pure function of the input point.
struct Model {
    std::string name;
    int dims = 0;
    std::function<ModelOutput(const Eigen::VectorXd&)> evaluate;
};

/// M = 1 + xi_1 + (1/n_u) sum xi_i^3.
Model cubic_model(int dims);

/// M = sum sin(xi_i - 0.5).
Model sinusoidal_model(int dims);

/// Looks up a built-in model by name ("cubic" or "sinusoidal").
Model builtin_model(const std::string& name, int dims);

enum class DistributionKind { Normal, Uniform, GaussianMixture, Gev, TruncatedNormal };

/// Parametric description of one input distribution.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::Normal;
    // normal / truncated-normal: mean, sd; uniform: lower, upper;
    // gev: location, scale, shape; mixture: components + weights.
    double mean = 0.0;
    double sd = 1.0;
    double lower = 0.0;
    double upper = 1.0;
    double location = 0.0;
    double scale = 1.0;
    double shape = 0.0;
    std::vector<std::pair<double, double>> components; // (mean, sd)
    std::vector<double> weights;

    void validate() const;
    nlohmann::json to_json() const;
    static DistributionSpec from_json(const nlohmann::json& j);

    /// The two-Gaussian mixture and the Gumbel-branch GEV used throughout
    /// the synthetic studies, plus plain named kinds.
    static DistributionSpec named(const std::string& name);
};

/// Draws i.i.d. samples from one DistributionSpec. Owns its RNG state; not
/// meant to be shared across threads.
class Sampler {
public:
    Sampler(DistributionSpec spec, std::uint64_t seed);

    double draw();
    Eigen::VectorXd draw_many(Eigen::Index n);

private:
    DistributionSpec spec_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// n x dims matrix of independent draws, one DistributionSpec per column.
Eigen::MatrixXd sample_matrix(const std::vector<DistributionSpec>& dists, Eigen::Index n,
                              std::uint64_t seed);

/// Standard normal CDF / quantile (Acklam's rational approximation with a
/// Newton polish).
double normal_cdf(double x);
double normal_quantile(double p);

/// Raw moments mu_0..mu_{2p} of a normal with mean m, sd s truncated to
/// [a, b], by the standardized-moment recurrence. Exact up to roundoff.
MomentSet truncated_normal_moments(double m, double s, double a, double b, int order);

/// Mean and standard deviation of the truncated normal, for standardization.
std::pair<double, double> truncated_normal_mean_sd(double m, double s, double a, double b);

} // namespace searpc
