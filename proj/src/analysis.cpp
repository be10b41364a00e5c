#include "searpc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"

namespace searpc {

std::pair<double, double> analytic_moments(const PceModel& model, const MultivariateBasis& basis) {
    if (model.lambda.size() != basis.terms())
        throw InvalidArgument("model does not match basis term count");
    const double mean = model.lambda(0) * basis.constant_value();
    double variance = 0.0;
    for (Eigen::Index j = 1; j < model.lambda.size(); ++j)
        variance += model.gamma(j) * model.lambda(j) * model.lambda(j);
    return {mean, variance};
}

Eigen::VectorXd sobol_first_order(const PceModel& model, const MultivariateBasis& basis,
                                  bool strict_first_order) {
    if (basis.order() < 1)
        throw InvalidArgument("Sobol indices need a basis of order >= 1");
    const auto [mean, variance] = analytic_moments(model, basis);
    (void)mean;
    if (!(variance > 0.0))
        throw NumericError("zero-variance model: Sobol indices undefined");

    const auto& index = basis.multi_index().rows();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(basis.dims());
    for (Eigen::Index k = 1; k < model.lambda.size(); ++k) {
        const double contribution = model.gamma(k) * model.lambda(k) * model.lambda(k);
        for (int j = 0; j < basis.dims(); ++j) {
            if (index(k, j) == 0)
                continue;
            if (strict_first_order) {
                bool only_j = true;
                for (int i = 0; i < basis.dims(); ++i)
                    if (i != j && index(k, i) > 0) {
                        only_j = false;
                        break;
                    }
                if (!only_j)
                    continue;
            }
            s(j) += contribution;
        }
    }
    return s / variance;
}

Eigen::VectorXd mc_sensitivity_heatmap(const Eigen::MatrixXd& gradients) {
    if (!gradients.allFinite())
        throw InvalidArgument("non-finite gradient entries");
    Eigen::VectorXd sums = gradients.array().abs().colwise().sum();
    const double total = sums.sum();
    if (!(total > 0.0))
        throw NumericError("all-zero gradients: sensitivity shares undefined");
    return sums / total;
}

namespace {

double interpolated_quantile(std::vector<double> sorted, double level) {
    const auto n = sorted.size();
    const double idx = level * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

DensityEstimate kernel_density(const Eigen::VectorXd& values, int grid_size) {
    const Eigen::Index n = values.size();
    if (n < 2)
        throw InvalidArgument("kernel density needs at least two values");
    if (grid_size < 2)
        throw InvalidArgument("grid size must be >= 2");

    std::vector<double> sorted(values.data(), values.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();

    const double mean = values.mean();
    const double sd = std::sqrt((values.array() - mean).square().sum() /
                                static_cast<double>(n - 1));
    const double iqr = interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0)
        spread = sd; // pathological but non-constant data; fall back to sd
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    if (!(h > 0.0))
        throw NumericError("degenerate (zero-spread) output: kernel density undefined");

    DensityEstimate est;
    est.bandwidth = h;
    est.grid.setLinSpaced(grid_size, lo - 3.0 * h, hi + 3.0 * h);
    est.density.resize(grid_size);

    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
    for (int g = 0; g < grid_size; ++g) {
        const double x = est.grid(g);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = (x - values(i)) / h;
            acc += std::exp(-0.5 * z * z);
        }
        est.density(g) = acc * norm;
    }
    return est;
}

DensityEstimate surrogate_density(const MultivariateBasis& basis, const PceModel& model,
                                  const Eigen::MatrixXd& mc_points, int grid_size) {
    if (mc_points.rows() < 100)
        throw InvalidArgument("density estimation needs at least 100 Monte Carlo points");
    return kernel_density(predict(basis, model, mc_points), grid_size);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw InvalidArgument("KS distance needs nonempty samples");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t ia = 0, ib = 0;
    double sup = 0.0;
    while (ia < sa.size() && ib < sb.size()) {
        const double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] <= x)
            ++ia;
        while (ib < sb.size() && sb[ib] <= x)
            ++ib;
        sup = std::max(sup, std::abs(static_cast<double>(ia) / na -
                                     static_cast<double>(ib) / nb));
    }
    return sup;
}

std::pair<double, double> sample_skewness_kurtosis(const Eigen::VectorXd& values) {
    const double n = static_cast<double>(values.size());
    if (values.size() < 2)
        throw InvalidArgument("need at least two values");
    const double mean = values.mean();
    const Eigen::ArrayXd centered = values.array() - mean;
    const double m2 = centered.square().sum() / n;
    if (!(m2 > 0.0))
        throw NumericError("zero variance: standardized moments undefined");
    const double m3 = centered.cube().sum() / n;
    const double m4 = centered.pow(4).sum() / n;
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

nlohmann::json OutputSummary::to_json() const {
    nlohmann::json j;
    j["mean"] = mean;
    j["variance"] = variance;
    j["sobol_first_order"] = std::vector<double>(
        sobol_first_order.data(), sobol_first_order.data() + sobol_first_order.size());
    if (ks_distance)
        j["ks_distance"] = *ks_distance;
    return j;
}

} // namespace searpc
