#include "searpc/doe.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"

namespace searpc {

Eigen::VectorXd coherence_weights(const MultivariateBasis& basis, const Eigen::MatrixXd& points,
                                  double weight_cap) {
    if (basis.order() < 1)
        throw InvalidArgument("coherence weighting needs a basis of order >= 1 "
                              "(the bound B(xi) sums over the non-constant terms)");
    if (points.rows() < 1)
        throw InvalidArgument("empty point set");

    const Eigen::MatrixXd psi = basis.eval(points);
    // B^2 = sum over the non-constant columns.
    Eigen::VectorXd b2 = psi.rightCols(psi.cols() - 1).array().square().rowwise().sum();
    const double c2 = b2.mean();
    if (!(c2 > 0.0))
        throw NumericError("degenerate pool: all non-constant basis terms vanish");
    const double c = std::sqrt(c2);

    Eigen::VectorXd w(points.rows());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double b = std::sqrt(b2(i));
        w(i) = b > 0.0 ? std::min(1.0 / (c * b), weight_cap) : weight_cap;
    }
    return w;
}

int oversampled_count(Eigen::Index terms, int n_o) {
    if (n_o < 1)
        throw InvalidArgument("oversampling ratio must be >= 1");
    return static_cast<int>(terms) * n_o;
}

int enhanced_count(Eigen::Index terms, int dims, int n_o) {
    const int q_a = oversampled_count(terms, n_o);
    return static_cast<int>((q_a + dims) / (dims + 1)); // ceil(q_a / (dims+1))
}

DesignOfExperiments select_doe(const MultivariateBasis& basis, const CandidatePool& pool,
                               int n_o, bool sensitivity_enhanced) {
    const Eigen::Index n_s = pool.points.rows();
    const int q_a = oversampled_count(basis.terms(), n_o);
    const int q = enhanced_count(basis.terms(), basis.dims(), n_o);
    if (n_s < q_a)
        throw InvalidArgument("candidate pool has " + std::to_string(n_s) +
                              " samples, selection needs q_a = " + std::to_string(q_a));

    const Eigen::VectorXd w = coherence_weights(basis, pool.points);
    const Eigen::MatrixXd psi = basis.eval(pool.points);
    // Transposed weighted measurement matrix: one column per pool point.
    Eigen::MatrixXd candidates =
        (psi.array().colwise() * w.array().sqrt()).matrix().transpose();

    std::vector<Eigen::Index> remaining(static_cast<std::size_t>(n_s));
    std::iota(remaining.begin(), remaining.end(), Eigen::Index{0});

    std::vector<Eigen::Index> selected;
    Eigen::VectorXd r_diagonal(q_a);
    selected.reserve(static_cast<std::size_t>(q_a));

    while (static_cast<int>(selected.size()) < q_a) {
        Eigen::MatrixXd block(candidates.rows(), static_cast<Eigen::Index>(remaining.size()));
        for (std::size_t c = 0; c < remaining.size(); ++c)
            block.col(static_cast<Eigen::Index>(c)) = candidates.col(remaining[c]);

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
        const auto& perm = qr.colsPermutation().indices();
        const Eigen::MatrixXd& r = qr.matrixR();

        const Eigen::Index diag_len = std::min(block.rows(), block.cols());
        const Eigen::Index take =
            std::min<Eigen::Index>(diag_len, q_a - static_cast<int>(selected.size()));
        const double head = std::abs(r(0, 0));

        for (Eigen::Index i = 0; i < take; ++i) {
            const double d = std::abs(r(i, i));
            if (static_cast<int>(selected.size()) < q && !(d > head * 1e-13))
                throw NumericError("rank-deficient weighted measurement matrix: fewer than q = " +
                                   std::to_string(q) + " independent pivots in the pool");
            r_diagonal(static_cast<Eigen::Index>(selected.size())) = d;
            selected.push_back(remaining[static_cast<std::size_t>(perm(i))]);
        }

        std::vector<Eigen::Index> kept;
        kept.reserve(remaining.size() - static_cast<std::size_t>(take));
        std::vector<bool> used(remaining.size(), false);
        for (Eigen::Index i = 0; i < take; ++i)
            used[static_cast<std::size_t>(perm(i))] = true;
        for (std::size_t c = 0; c < remaining.size(); ++c)
            if (!used[c])
                kept.push_back(remaining[c]);
        remaining.swap(kept);
    }

    const int keep = sensitivity_enhanced ? q : q_a;
    DesignOfExperiments doe;
    doe.q_a = q_a;
    doe.q = q;
    doe.indices.assign(selected.begin(), selected.begin() + keep);
    doe.points.resize(keep, pool.points.cols());
    doe.weights.resize(keep);
    for (int i = 0; i < keep; ++i) {
        doe.points.row(i) = pool.points.row(doe.indices[static_cast<std::size_t>(i)]);
        doe.weights(i) = w(doe.indices[static_cast<std::size_t>(i)]);
    }
    doe.r_diagonal = std::move(r_diagonal);
    return doe;
}

nlohmann::json DesignOfExperiments::to_json() const {
    nlohmann::json j;
    j["q"] = q;
    j["q_a"] = q_a;
    j["indices"] = indices;
    j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
    j["r_diagonal"] =
        std::vector<double>(r_diagonal.data(), r_diagonal.data() + r_diagonal.size());
    nlohmann::json pts = nlohmann::json::array();
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < points.cols(); ++c)
            row.push_back(points(i, c));
        pts.push_back(std::move(row));
    }
    j["points"] = std::move(pts);
    return j;
}

} // namespace searpc
