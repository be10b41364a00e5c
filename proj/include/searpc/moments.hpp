#pragma once

#include <span>
#include <vector>

namespace searpc {

/// Raw statistical moments mu_0..mu_{2p} of one input dimension. The sole
/// statistical input to basis construction.
struct MomentSet {
    std::vector<double> moments;
    int order = 0;

    MomentSet() = default;
    /// Validates length = 2*order+1 and normalizes so that mu_0 = 1.
    MomentSet(std::vector<double> mu, int p);

    double operator[](int i) const { return moments[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(moments.size()); }
};

/// mu_i = (1/n_s) sum_l xi_l^i for i = 0..2p. Requires n_s >= 2p+1 finite samples.
MomentSet compute_moments(std::span<const double> samples, int order);

/// Per-dimension affine standardization u = (xi - shift) / scale. The basis
/// polynomials live in u; evaluation maps physical points through this first.
struct AffineMap {
    double shift = 0.0;
    double scale = 1.0;

    double forward(double xi) const { return (xi - shift) / scale; }
    double inverse(double u) const { return shift + scale * u; }
};

/// Mean/standard-deviation map estimated from samples (population variance).
/// Falls back to scale 1 for (degenerate) constant data.
AffineMap standardizing_map(std::span<const double> samples);

/// Moments of the affinely transformed variable u = (x - shift)/scale,
/// computed exactly from the raw moments via binomial expansion.
MomentSet transform_moments(const MomentSet& raw, const AffineMap& map);

} // namespace searpc
