#include "searpc/regression.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"
#include "searpc/io.hpp"

namespace searpc {

namespace {

Eigen::MatrixXd points_matrix(std::span<const EvaluationRecord> records, int dims) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(records.size()), dims);
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].point.size() != dims)
            throw InvalidArgument("record " + std::to_string(i) + " has dimension " +
                                  std::to_string(records[i].point.size()) + ", basis needs " +
                                  std::to_string(dims));
        if (!records[i].point.allFinite() || !std::isfinite(records[i].value))
            throw InvalidArgument("non-finite entry in record " + std::to_string(i));
        pts.row(static_cast<Eigen::Index>(i)) = records[i].point.transpose();
    }
    return pts;
}

void check_weights(const Eigen::VectorXd& weights, std::size_t n) {
    if (weights.size() != static_cast<Eigen::Index>(n))
        throw InvalidArgument("weight count does not match record count");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights(i) > 0.0) || !std::isfinite(weights(i)))
            throw InvalidArgument("weights must be strictly positive and finite");
}

} // namespace

PceModel solve_weighted(const MultivariateBasis& basis, const Eigen::MatrixXd& a,
                        const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    const Eigen::VectorXd sqrt_w = w.array().sqrt();
    const Eigen::MatrixXd aw = a.array().colwise() * sqrt_w.array();
    const Eigen::VectorXd bw = b.array() * sqrt_w.array();

    PceModel model;
    model.gamma = basis.gamma();
    model.basis_hash = basis.content_hash();
    model.diagnostics.rows = a.rows();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aw);
    model.diagnostics.rank = qr.rank();
    if (qr.rank() == a.cols()) {
        model.lambda = qr.solve(bw);
        const auto& rdiag = qr.matrixR().diagonal();
        model.diagnostics.condition =
            std::abs(rdiag(0)) / std::abs(rdiag(a.cols() - 1));
    } else {
        // Minimum-norm solution keeps sweeps running; the flag marks the
        // fit as untrustworthy.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
        model.lambda = svd.solve(bw);
        const auto& sv = svd.singularValues();
        const double smin = sv(svd.rank() > 0 ? svd.rank() - 1 : 0);
        model.diagnostics.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
        model.diagnostics.rank = svd.rank();
        model.diagnostics.rank_deficient = true;
    }
    model.diagnostics.residual_norm = (aw * model.lambda - bw).norm();
    if (!model.lambda.allFinite())
        throw NumericError("least-squares solve produced non-finite coefficients");
    return model;
}

PceModel fit_wlsq(const MultivariateBasis& basis, std::span<const EvaluationRecord> records,
                  const Eigen::VectorXd& weights) {
    const Eigen::Index terms = basis.terms();
    if (static_cast<Eigen::Index>(records.size()) < terms)
        throw InvalidArgument("underdetermined system: " + std::to_string(records.size()) +
                              " records for " + std::to_string(terms) + " coefficients");
    check_weights(weights, records.size());

    const Eigen::MatrixXd psi = basis.eval(points_matrix(records, basis.dims()));
    Eigen::VectorXd values(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i)
        values(static_cast<Eigen::Index>(i)) = records[i].value;
    return solve_weighted(basis, psi, values, weights);
}

BlockSystem assemble_block_system(const MultivariateBasis& basis,
                                  std::span<const EvaluationRecord> records,
                                  const Eigen::VectorXd& weights) {
    if (records.empty())
        throw InvalidArgument("no evaluation records");
    check_weights(weights, records.size());

    const auto q = static_cast<Eigen::Index>(records.size());
    const int n_u = basis.dims();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.gradient)
            throw InvalidArgument("record " + std::to_string(i) +
                                  " is missing the gradient required for sensitivity enhancement");
        if (r.gradient->size() != n_u)
            throw InvalidArgument("record " + std::to_string(i) + " gradient has wrong dimension");
        if (!r.gradient->allFinite())
            throw InvalidArgument("non-finite gradient in record " + std::to_string(i));
    }

    const Eigen::MatrixXd pts = points_matrix(records, n_u);

    BlockSystem sys;
    sys.g.resize((n_u + 1) * q);
    sys.phi.resize((n_u + 1) * q, basis.terms());
    sys.wprime.resize((n_u + 1) * q);

    sys.phi.topRows(q) = basis.eval(pts);
    for (Eigen::Index i = 0; i < q; ++i)
        sys.g(i) = records[static_cast<std::size_t>(i)].value;
    sys.wprime.head(q) = weights;

    for (int d = 0; d < n_u; ++d) {
        const Eigen::Index offset = (d + 1) * q;
        sys.phi.middleRows(offset, q) = basis.eval_derivative(pts, d);
        for (Eigen::Index i = 0; i < q; ++i)
            sys.g(offset + i) = (*records[static_cast<std::size_t>(i)].gradient)(d);
        sys.wprime.segment(offset, q) = weights;
    }
    return sys;
}

PceModel fit_sensitivity_enhanced(const MultivariateBasis& basis,
                                  std::span<const EvaluationRecord> records,
                                  const Eigen::VectorXd& weights,
                                  double gradient_block_scale) {
    if (!(gradient_block_scale > 0.0))
        throw InvalidArgument("gradient block scale must be positive");
    const Eigen::Index rows =
        static_cast<Eigen::Index>(records.size()) * (basis.dims() + 1);
    if (rows < basis.terms())
        throw InvalidArgument("underdetermined system: " + std::to_string(rows) +
                              " block rows for " + std::to_string(basis.terms()) +
                              " coefficients");

    BlockSystem sys = assemble_block_system(basis, records, weights);
    if (gradient_block_scale != 1.0)
        sys.wprime.tail(sys.wprime.size() - static_cast<Eigen::Index>(records.size())) *=
            gradient_block_scale;
    return solve_weighted(basis, sys.phi, sys.g, sys.wprime);
}

Eigen::VectorXd predict(const MultivariateBasis& basis, const PceModel& model,
                        const Eigen::MatrixXd& points) {
    if (model.lambda.size() != basis.terms())
        throw InvalidArgument("model coefficient count does not match basis");
    return basis.eval(points) * model.lambda;
}

nlohmann::json EvaluationRecord::to_json() const {
    nlohmann::json j;
    j["point"] = std::vector<double>(point.data(), point.data() + point.size());
    j["value"] = value;
    if (gradient)
        j["gradient"] = std::vector<double>(gradient->data(), gradient->data() + gradient->size());
    return j;
}

EvaluationRecord EvaluationRecord::from_json(const nlohmann::json& j) {
    EvaluationRecord r;
    const auto pt = j.at("point").get<std::vector<double>>();
    r.point = Eigen::Map<const Eigen::VectorXd>(pt.data(), static_cast<Eigen::Index>(pt.size()));
    r.value = j.at("value").get<double>();
    if (j.contains("gradient")) {
        const auto g = j.at("gradient").get<std::vector<double>>();
        r.gradient = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    }
    return r;
}

nlohmann::json PceModel::to_json() const {
    nlohmann::json j;
    j["lambda"] = std::vector<double>(lambda.data(), lambda.data() + lambda.size());
    j["gamma"] = std::vector<double>(gamma.data(), gamma.data() + gamma.size());
    j["basis_hash"] = to_hex(basis_hash);
    j["diagnostics"] = {{"residual_norm", diagnostics.residual_norm},
                        {"condition", diagnostics.condition},
                        {"rows", diagnostics.rows},
                        {"rank", diagnostics.rank},
                        {"rank_deficient", diagnostics.rank_deficient}};
    return j;
}

PceModel PceModel::from_json(const nlohmann::json& j) {
    PceModel m;
    const auto l = j.at("lambda").get<std::vector<double>>();
    m.lambda = Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
    const auto g = j.at("gamma").get<std::vector<double>>();
    m.gamma = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    m.basis_hash = std::stoull(j.at("basis_hash").get<std::string>(), nullptr, 16);
    const auto& d = j.at("diagnostics");
    m.diagnostics.residual_norm = d.at("residual_norm").get<double>();
    m.diagnostics.condition = d.at("condition").get<double>();
    m.diagnostics.rows = d.at("rows").get<Eigen::Index>();
    m.diagnostics.rank = d.at("rank").get<Eigen::Index>();
    m.diagnostics.rank_deficient = d.at("rank_deficient").get<bool>();
    return m;
}

} // namespace searpc
