#include "searpc/basis.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"
#include "searpc/io.hpp"

namespace searpc {

namespace {

Eigen::MatrixXd hankel_matrix(const MomentSet& m) {
    const int n = m.order + 1;
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            h(i, j) = m[i + j];
    return h;
}

double horner(const Eigen::VectorXd& coeffs, int degree, double u) {
    double acc = coeffs(degree);
    for (int k = degree - 1; k >= 0; --k)
        acc = acc * u + coeffs(k);
    return acc;
}

} // namespace

UnivariateBasis::UnivariateBasis(Eigen::MatrixXd coeffs, int order)
    : coeffs_(std::move(coeffs)), order_(order) {
    if (coeffs_.rows() != order_ + 1 || coeffs_.cols() != order_ + 1)
        throw InvalidArgument("coefficient matrix must be (p+1) x (p+1)");
    for (int j = 0; j <= order_; ++j)
        if (coeffs_(j, j) == 0.0)
            throw InvalidArgument("psi_" + std::to_string(j) + " must have degree exactly " +
                                  std::to_string(j));
}

UnivariateBasis UnivariateBasis::from_moments(const MomentSet& m) {
    const Eigen::MatrixXd hankel = hankel_matrix(m);
    Eigen::LLT<Eigen::MatrixXd> llt(hankel);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hankel, Eigen::EigenvaluesOnly);
        const double lambda_min = eig.eigenvalues().minCoeff();
        throw NumericError("Hankel matrix of moments is not positive definite "
                           "(smallest eigenvalue estimate " +
                           std::to_string(lambda_min) + "); input distribution degenerate or moments corrupted");
    }
    const int n = m.order + 1;
    // M = R^T R with R upper triangular; columns of R^-1 are the monomial
    // coefficients of the orthonormal polynomials.
    Eigen::MatrixXd r_upper = llt.matrixL().transpose();
    Eigen::MatrixXd coeffs =
        r_upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));

    UnivariateBasis basis(std::move(coeffs), m.order);
    // Rescale so E[psi_j^2] = 1 exactly in the moments, absorbing the
    // floating-point drift of the factorization.
    for (int j = 0; j < n; ++j) {
        const double norm2 = basis.expectation_product(j, j, m);
        if (!(norm2 > 0.0))
            throw NumericError("nonpositive polynomial norm during basis construction");
        basis.coeffs_.col(j) /= std::sqrt(norm2);
    }
    return basis;
}

double UnivariateBasis::eval(int j, double u) const {
    return horner(coeffs_.col(j), j, u);
}

double UnivariateBasis::eval_derivative(int j, double u) const {
    if (j == 0)
        return 0.0;
    // d/du of sum_k c_k u^k has coefficients (k+1) c_{k+1}.
    double acc = coeffs_(j, j) * j;
    for (int k = j - 1; k >= 1; --k)
        acc = acc * u + coeffs_(k, j) * k;
    return acc;
}

double UnivariateBasis::expectation_product(int a, int b, const MomentSet& m) const {
    if (a + b > 2 * m.order)
        throw InvalidArgument("moment set too short for E[psi_" + std::to_string(a) +
                              " psi_" + std::to_string(b) + "]");
    double acc = 0.0;
    for (int k = 0; k <= a; ++k) {
        const double cka = coeffs_(k, a);
        if (cka == 0.0)
            continue;
        for (int l = 0; l <= b; ++l)
            acc += cka * coeffs_(l, b) * m[k + l];
    }
    return acc;
}

Eigen::MatrixXd UnivariateBasis::gram(const MomentSet& m) const {
    const int n = order_ + 1;
    Eigen::MatrixXd g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            g(a, b) = expectation_product(a, b, m);
    return g;
}

MultiIndex::MultiIndex(Eigen::MatrixXi rows, int dims, int order)
    : rows_(std::move(rows)), dims_(dims), order_(order) {
    active_.resize(static_cast<std::size_t>(rows_.rows()));
    for (Eigen::Index k = 0; k < rows_.rows(); ++k)
        for (int i = 0; i < dims_; ++i)
            if (rows_(k, i) > 0)
                active_[static_cast<std::size_t>(k)].emplace_back(i, rows_(k, i));
}

std::size_t MultiIndex::cardinality(int dims, int order, std::size_t term_cap) {
    if (dims < 1)
        throw InvalidArgument("dimension must be >= 1");
    if (order < 0)
        throw InvalidArgument("order must be >= 0");
    // C(dims + order, order), grown degree by degree to catch the cap early.
    double count = 1.0;
    for (int k = 1; k <= order; ++k) {
        count *= static_cast<double>(dims + k) / static_cast<double>(k);
        if (count > 2.0 * static_cast<double>(term_cap))
            break;
    }
    const auto rounded = static_cast<std::size_t>(std::llround(count));
    if (rounded > term_cap)
        throw InvalidArgument("basis has " + std::to_string(rounded) +
                              " terms, above the cap of " + std::to_string(term_cap));
    return rounded;
}

MultiIndex MultiIndex::total_degree(int dims, int order, std::size_t term_cap) {
    const std::size_t n_terms = cardinality(dims, order, term_cap);
    Eigen::MatrixXi rows(static_cast<Eigen::Index>(n_terms), dims);
    Eigen::Index next = 0;
    std::vector<int> row(static_cast<std::size_t>(dims), 0);

    // Lexicographically descending compositions of each total degree.
    auto emit = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dims - 1) {
            row[static_cast<std::size_t>(pos)] = remaining;
            for (int i = 0; i < dims; ++i)
                rows(next, i) = row[static_cast<std::size_t>(i)];
            ++next;
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            row[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    for (int degree = 0; degree <= order; ++degree)
        emit(emit, 0, degree);

    if (next != rows.rows())
        throw NumericError("multi-index enumeration mismatch");
    return MultiIndex(std::move(rows), dims, order);
}

MultivariateBasis::MultivariateBasis(std::vector<UnivariateBasis> univariate,
                                     std::vector<MomentSet> moments,
                                     std::vector<AffineMap> maps,
                                     MultiIndex index)
    : uni_(std::move(univariate)),
      moments_(std::move(moments)),
      maps_(std::move(maps)),
      index_(std::move(index)) {
    const auto dims = static_cast<std::size_t>(index_.dims());
    if (uni_.size() != dims || moments_.size() != dims)
        throw InvalidArgument("basis needs one univariate basis and moment set per dimension");
    if (maps_.empty())
        maps_.assign(dims, AffineMap{});
    if (maps_.size() != dims)
        throw InvalidArgument("affine map count must match dimension");
    for (const auto& m : maps_)
        if (!(m.scale > 0.0))
            throw InvalidArgument("affine map scale must be positive");
    for (const auto& u : uni_)
        if (u.order() < index_.order())
            throw InvalidArgument("univariate basis order below multi-index order");

    psi0_product_ = 1.0;
    for (const auto& u : uni_)
        psi0_product_ *= u.eval(0, 0.0);

    row_constant_.resize(static_cast<std::size_t>(index_.terms()));
    for (Eigen::Index k = 0; k < index_.terms(); ++k) {
        double c = 1.0;
        for (int i = 0; i < index_.dims(); ++i)
            if (index_.rows()(k, i) == 0)
                c *= uni_[static_cast<std::size_t>(i)].eval(0, 0.0);
        row_constant_[static_cast<std::size_t>(k)] = c;
    }

    gamma_ = compute_norms(*this, moments_);
}

MultivariateBasis MultivariateBasis::from_samples(const Eigen::MatrixXd& samples, int order,
                                                  bool standardize) {
    if (samples.rows() < 2 * order + 1)
        throw InvalidArgument("too few sample rows for the requested order");
    const int dims = static_cast<int>(samples.cols());
    MultiIndex index = MultiIndex::total_degree(dims, order);

    std::vector<UnivariateBasis> uni;
    std::vector<MomentSet> moments;
    std::vector<AffineMap> maps;
    uni.reserve(static_cast<std::size_t>(dims));
    for (int i = 0; i < dims; ++i) {
        std::vector<double> column(samples.col(i).data(), samples.col(i).data() + samples.rows());
        AffineMap map;
        if (standardize)
            map = standardizing_map(column);
        for (double& x : column)
            x = map.forward(x);
        MomentSet m = compute_moments(column, order);
        try {
            uni.push_back(UnivariateBasis::from_moments(m));
        } catch (const NumericError& e) {
            throw NumericError("dimension " + std::to_string(i) + ": " + e.what());
        }
        moments.push_back(std::move(m));
        maps.push_back(map);
    }
    return MultivariateBasis(std::move(uni), std::move(moments), std::move(maps), std::move(index));
}

MultivariateBasis MultivariateBasis::from_moments(std::vector<MomentSet> moments, int order,
                                                  std::vector<AffineMap> maps) {
    if (moments.empty())
        throw InvalidArgument("need at least one moment set");
    const int dims = static_cast<int>(moments.size());
    for (const auto& m : moments)
        if (m.order < order)
            throw InvalidArgument("moment sets must reach order 2p");
    MultiIndex index = MultiIndex::total_degree(dims, order);

    std::vector<UnivariateBasis> uni;
    uni.reserve(moments.size());
    for (int i = 0; i < dims; ++i) {
        try {
            uni.push_back(UnivariateBasis::from_moments(moments[static_cast<std::size_t>(i)]));
        } catch (const NumericError& e) {
            throw NumericError("dimension " + std::to_string(i) + ": " + e.what());
        }
    }
    return MultivariateBasis(std::move(uni), std::move(moments), std::move(maps), std::move(index));
}

Eigen::MatrixXd MultivariateBasis::eval(const Eigen::MatrixXd& points) const {
    const int dims = index_.dims();
    if (points.cols() != dims)
        throw InvalidArgument("point matrix has " + std::to_string(points.cols()) +
                              " columns, basis dimension is " + std::to_string(dims));
    if (!points.allFinite())
        throw InvalidArgument("non-finite evaluation point");

    const Eigen::Index n = points.rows();
    const int p = index_.order();

    // Per-dimension table of psi_j(u_i) for all points.
    std::vector<Eigen::MatrixXd> table(static_cast<std::size_t>(dims));
    for (int i = 0; i < dims; ++i) {
        auto& t = table[static_cast<std::size_t>(i)];
        t.resize(n, p + 1);
        const auto& u = uni_[static_cast<std::size_t>(i)];
        const auto& map = maps_[static_cast<std::size_t>(i)];
        for (Eigen::Index m = 0; m < n; ++m) {
            const double x = map.forward(points(m, i));
            for (int j = 0; j <= p; ++j)
                t(m, j) = u.eval(j, x);
        }
    }

    Eigen::MatrixXd out(n, index_.terms());
    for (Eigen::Index k = 0; k < index_.terms(); ++k) {
        auto col = out.col(k);
        col.setConstant(row_constant_[static_cast<std::size_t>(k)]);
        for (const auto& [dim, deg] : index_.active(k))
            col.array() *= table[static_cast<std::size_t>(dim)].col(deg).array();
    }
    return out;
}

Eigen::MatrixXd MultivariateBasis::eval_derivative(const Eigen::MatrixXd& points, int dim) const {
    const int dims = index_.dims();
    if (dim < 0 || dim >= dims)
        throw InvalidArgument("derivative dimension out of range");
    if (points.cols() != dims)
        throw InvalidArgument("point matrix has wrong column count");
    if (!points.allFinite())
        throw InvalidArgument("non-finite evaluation point");

    const Eigen::Index n = points.rows();
    const int p = index_.order();

    std::vector<Eigen::MatrixXd> table(static_cast<std::size_t>(dims));
    Eigen::MatrixXd dtable(n, p + 1);
    for (int i = 0; i < dims; ++i) {
        auto& t = table[static_cast<std::size_t>(i)];
        t.resize(n, p + 1);
        const auto& u = uni_[static_cast<std::size_t>(i)];
        const auto& map = maps_[static_cast<std::size_t>(i)];
        for (Eigen::Index m = 0; m < n; ++m) {
            const double x = map.forward(points(m, i));
            for (int j = 0; j <= p; ++j)
                t(m, j) = u.eval(j, x);
            if (i == dim)
                for (int j = 0; j <= p; ++j)
                    dtable(m, j) = u.eval_derivative(j, x) / map.scale;
        }
    }

    Eigen::MatrixXd out(n, index_.terms());
    for (Eigen::Index k = 0; k < index_.terms(); ++k) {
        auto col = out.col(k);
        const int deg_in_dim = index_.rows()(k, dim);
        if (deg_in_dim == 0) {
            col.setZero();
            continue;
        }
        col.setConstant(row_constant_[static_cast<std::size_t>(k)]);
        for (const auto& [d, deg] : index_.active(k)) {
            if (d == dim)
                col.array() *= dtable.col(deg).array();
            else
                col.array() *= table[static_cast<std::size_t>(d)].col(deg).array();
        }
    }
    return out;
}

Eigen::VectorXd MultivariateBasis::norms() const {
    return gamma_;
}

Eigen::VectorXd compute_norms(const MultivariateBasis& basis, const std::vector<MomentSet>& moments) {
    if (moments.size() != static_cast<std::size_t>(basis.dims()))
        throw InvalidArgument("one moment set per dimension required");
    const auto& index = basis.multi_index();
    Eigen::VectorXd gamma(index.terms());
    for (Eigen::Index k = 0; k < index.terms(); ++k) {
        double g = 1.0;
        for (int i = 0; i < basis.dims(); ++i) {
            const int deg = index.rows()(k, i);
            g *= basis.univariate(i).expectation_product(deg, deg,
                                                         moments[static_cast<std::size_t>(i)]);
        }
        gamma(k) = g;
    }
    return gamma;
}

nlohmann::json MultivariateBasis::to_json() const {
    nlohmann::json j;
    j["order"] = order();
    j["dims"] = dims();

    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index k = 0; k < index_.terms(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < dims(); ++i)
            row.push_back(index_.rows()(k, i));
        rows.push_back(std::move(row));
    }
    j["multi_index"] = std::move(rows);

    nlohmann::json dims_json = nlohmann::json::array();
    for (int i = 0; i < dims(); ++i) {
        const auto& u = uni_[static_cast<std::size_t>(i)];
        nlohmann::json coeffs = nlohmann::json::array();
        for (int col = 0; col <= u.order(); ++col) {
            nlohmann::json c = nlohmann::json::array();
            for (int row = 0; row <= u.order(); ++row)
                c.push_back(u.coeffs()(row, col));
            coeffs.push_back(std::move(c));
        }
        dims_json.push_back({{"coefficients", std::move(coeffs)},
                             {"moments", moments_[static_cast<std::size_t>(i)].moments},
                             {"shift", maps_[static_cast<std::size_t>(i)].shift},
                             {"scale", maps_[static_cast<std::size_t>(i)].scale}});
    }
    j["dimensions"] = std::move(dims_json);

    j["gamma"] = std::vector<double>(gamma_.data(), gamma_.data() + gamma_.size());
    return j;
}

MultivariateBasis MultivariateBasis::from_json(const nlohmann::json& j) {
    const int order = j.at("order").get<int>();
    const int dims = j.at("dims").get<int>();
    std::vector<UnivariateBasis> uni;
    std::vector<MomentSet> moments;
    std::vector<AffineMap> maps;
    for (const auto& d : j.at("dimensions")) {
        const auto& coeff_cols = d.at("coefficients");
        const int n = static_cast<int>(coeff_cols.size());
        Eigen::MatrixXd coeffs(n, n);
        for (int col = 0; col < n; ++col)
            for (int row = 0; row < n; ++row)
                coeffs(row, col) = coeff_cols[static_cast<std::size_t>(col)][static_cast<std::size_t>(row)].get<double>();
        uni.emplace_back(std::move(coeffs), n - 1);
        moments.emplace_back(d.at("moments").get<std::vector<double>>(), n - 1);
        maps.push_back(AffineMap{d.at("shift").get<double>(), d.at("scale").get<double>()});
    }
    if (static_cast<int>(uni.size()) != dims)
        throw InvalidArgument("basis JSON dimension mismatch");
    return MultivariateBasis(std::move(uni), std::move(moments), std::move(maps),
                             MultiIndex::total_degree(dims, order));
}

std::uint64_t MultivariateBasis::content_hash() const {
    return fnv1a64(to_json().dump());
}

} // namespace searpc
