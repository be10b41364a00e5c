#include "searpc/moments.hpp"

#include <cmath>
#include <string>

#include "searpc/errors.hpp"

namespace searpc {

MomentSet::MomentSet(std::vector<double> mu, int p) : moments(std::move(mu)), order(p) {
    if (p < 0)
        throw InvalidArgument("moment order must be nonnegative");
    if (moments.size() != static_cast<std::size_t>(2 * p + 1))
        throw InvalidArgument("moment list must have length 2p+1, got " +
                              std::to_string(moments.size()) + " for p=" + std::to_string(p));
    for (double m : moments)
        if (!std::isfinite(m))
            throw InvalidArgument("non-finite moment");
    if (moments[0] <= 0.0)
        throw InvalidArgument("mu_0 must be positive");
    if (moments[0] != 1.0) {
        const double mu0 = moments[0];
        for (double& m : moments)
            m /= mu0;
    }
}

MomentSet compute_moments(std::span<const double> samples, int order) {
    if (order < 0)
        throw InvalidArgument("moment order must be nonnegative");
    const std::size_t need = static_cast<std::size_t>(2 * order + 1);
    if (samples.size() < need)
        throw InvalidArgument("too few samples: need at least " + std::to_string(need) +
                              ", got " + std::to_string(samples.size()));
    for (double s : samples)
        if (!std::isfinite(s))
            throw InvalidArgument("non-finite sample");

    std::vector<double> mu(need, 0.0);
    for (double s : samples) {
        double pow_s = 1.0;
        for (std::size_t i = 0; i < need; ++i) {
            mu[i] += pow_s;
            pow_s *= s;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    for (double& m : mu)
        m *= inv_n;
    return MomentSet(std::move(mu), order);
}

AffineMap standardizing_map(std::span<const double> samples) {
    if (samples.empty())
        throw InvalidArgument("cannot standardize an empty sample set");
    double mean = 0.0;
    for (double s : samples)
        mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples)
        var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size());
    const double sd = std::sqrt(var);
    return AffineMap{mean, sd > 0.0 ? sd : 1.0};
}

MomentSet transform_moments(const MomentSet& raw, const AffineMap& map) {
    // E[u^k] = scale^-k sum_j C(k,j) (-shift)^(k-j) E[x^j]
    const int n = raw.size();
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto& row = binom[static_cast<std::size_t>(k)];
        row.assign(static_cast<std::size_t>(k + 1), 1.0);
        for (int j = 1; j < k; ++j)
            row[static_cast<std::size_t>(j)] = binom[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)] +
                                               binom[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)];
    }
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j)
            acc += binom[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
                   std::pow(-map.shift, k - j) * raw[j];
        out[static_cast<std::size_t>(k)] = acc / std::pow(map.scale, k);
    }
    return MomentSet(std::move(out), raw.order);
}

} // namespace searpc
