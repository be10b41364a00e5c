#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "searpc/moments.hpp"

namespace searpc {

/// Orthonormal univariate polynomials psi_0..psi_p constructed from raw
/// moments. Column j of coeffs() holds the monomial coefficients of psi_j,
/// so the matrix is upper triangular with a nonzero diagonal.
class UnivariateBasis {
public:
    UnivariateBasis(Eigen::MatrixXd coeffs, int order);

    /// Cholesky factorization M = R^T R of the Hankel moment matrix,
    /// back-substitution for R^-1, then rescaling of each column so that
    /// E[psi_j^2] = 1 under the moment functional.
    static UnivariateBasis from_moments(const MomentSet& m);

    double eval(int j, double u) const;
    double eval_derivative(int j, double u) const;

    /// E[psi_a psi_b] = sum_{k,l} c_ka c_lb mu_{k+l}, exact in the moments.
    double expectation_product(int a, int b, const MomentSet& m) const;
    Eigen::MatrixXd gram(const MomentSet& m) const;

    const Eigen::MatrixXd& coeffs() const { return coeffs_; }
    int order() const { return order_; }

private:
    Eigen::MatrixXd coeffs_;
    int order_;
};

/// Total-degree multi-index set in graded lexicographic order: ascending
/// total degree, lexicographically descending within a degree. Row 0 is the
/// all-zero index.
class MultiIndex {
public:
    static MultiIndex total_degree(int dims, int order, std::size_t term_cap = 1'000'000);

    const Eigen::MatrixXi& rows() const { return rows_; }
    int dims() const { return dims_; }
    int order() const { return order_; }
    Eigen::Index terms() const { return rows_.rows(); }

    /// Nonzero (dimension, degree) pairs of row k; empty for the constant row.
    const std::vector<std::pair<int, int>>& active(Eigen::Index k) const {
        return active_[static_cast<std::size_t>(k)];
    }

    /// (n_u + p)! / (n_u! p!) with an overflow/cap check.
    static std::size_t cardinality(int dims, int order, std::size_t term_cap = 1'000'000);

private:
    MultiIndex(Eigen::MatrixXi rows, int dims, int order);

    Eigen::MatrixXi rows_;
    int dims_;
    int order_;
    std::vector<std::vector<std::pair<int, int>>> active_;
};

/// Product basis Psi_k(xi) = prod_i psi_{I_ki}(u_i), u_i = (xi_i - shift_i)/scale_i.
/// Immutable after construction; shareable across threads.
class MultivariateBasis {
public:
    MultivariateBasis(std::vector<UnivariateBasis> univariate,
                      std::vector<MomentSet> moments,
                      std::vector<AffineMap> maps,
                      MultiIndex index);

    /// Builds per-dimension bases from the columns of a sample matrix.
    /// With standardize = true (the default) each column is affinely mapped
    /// to zero mean and unit variance before the moments are taken; the map
    /// is stored and applied transparently at evaluation time.
    static MultivariateBasis from_samples(const Eigen::MatrixXd& samples, int order,
                                          bool standardize = true);

    /// Builds from explicit per-dimension moment lists (identity maps unless given).
    static MultivariateBasis from_moments(std::vector<MomentSet> moments, int order,
                                          std::vector<AffineMap> maps = {});

    /// q x (P+1) matrix of Psi_k evaluated at each point row.
    Eigen::MatrixXd eval(const Eigen::MatrixXd& points) const;

    /// Entry (m,k) = dPsi_k/dxi_dim at point m (chain rule includes the
    /// 1/scale factor of the standardization map).
    Eigen::MatrixXd eval_derivative(const Eigen::MatrixXd& points, int dim) const;

    /// gamma_j = prod_i E[psi_{I_ji}^2], exact in the stored moments.
    Eigen::VectorXd norms() const;

    int dims() const { return index_.dims(); }
    int order() const { return index_.order(); }
    Eigen::Index terms() const { return index_.terms(); }
    const MultiIndex& multi_index() const { return index_; }
    const UnivariateBasis& univariate(int dim) const { return uni_[static_cast<std::size_t>(dim)]; }
    const MomentSet& moments(int dim) const { return moments_[static_cast<std::size_t>(dim)]; }
    const AffineMap& map(int dim) const { return maps_[static_cast<std::size_t>(dim)]; }
    const Eigen::VectorXd& gamma() const { return gamma_; }

    /// Value of the constant term Psi_0 (1 for normalized bases).
    double constant_value() const { return psi0_product_; }

    nlohmann::json to_json() const;
    static MultivariateBasis from_json(const nlohmann::json& j);
    std::uint64_t content_hash() const;

private:
    std::vector<UnivariateBasis> uni_;
    std::vector<MomentSet> moments_;
    std::vector<AffineMap> maps_;
    MultiIndex index_;
    Eigen::VectorXd gamma_;
    double psi0_product_;
    std::vector<double> row_constant_; // product of psi_0 factors over inactive dims
};

/// gamma vector for an arbitrary basis/moment pairing (the basis own moments
/// are used by MultivariateBasis::norms).
Eigen::VectorXd compute_norms(const MultivariateBasis& basis, const std::vector<MomentSet>& moments);

} // namespace searpc
