#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "searpc/basis.hpp"

namespace searpc {

/// One model evaluation: value of M at a point, plus the gradient when the
/// sensitivity-enhanced path is used.
struct EvaluationRecord {
    Eigen::VectorXd point;
    double value = 0.0;
    std::optional<Eigen::VectorXd> gradient;

    nlohmann::json to_json() const;
    static EvaluationRecord from_json(const nlohmann::json& j);
};

/// Value and derivative rows stacked per Eq.-block layout: q value rows,
/// then n_u blocks of q gradient rows, dimension-major.
struct BlockSystem {
    Eigen::VectorXd g;       // (n_u+1) q
    Eigen::MatrixXd phi;     // (n_u+1) q x (P+1)
    Eigen::VectorXd wprime;  // (n_u+1) q, n_u+1 repetitions of the sample weights
};

struct FitDiagnostics {
    double residual_norm = 0.0;
    double condition = 0.0;
    Eigen::Index rows = 0;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

/// Fitted expansion: coefficient vector aligned with the basis multi-index
/// rows, the basis norms, and a content hash tying the model to its basis.
struct PceModel {
    Eigen::VectorXd lambda;
    Eigen::VectorXd gamma;
    std::uint64_t basis_hash = 0;
    FitDiagnostics diagnostics;

    nlohmann::json to_json() const;
    static PceModel from_json(const nlohmann::json& j);
};

/// Weighted least squares on value rows only. Requires q >= P+1 records and
/// strictly positive weights. Solved by column-pivoted QR of the weighted
/// design matrix, with a minimum-norm SVD fallback on rank deficiency.
PceModel fit_wlsq(const MultivariateBasis& basis, std::span<const EvaluationRecord> records,
                  const Eigen::VectorXd& weights);

/// Stacks values and gradients into the block layout. Every record must
/// carry a full gradient.
BlockSystem assemble_block_system(const MultivariateBasis& basis,
                                  std::span<const EvaluationRecord> records,
                                  const Eigen::VectorXd& weights);

/// Sensitivity-enhanced fit over the block system; (n_u+1) q >= P+1 rows
/// required. gradient_block_scale rescales the derivative-row weights
/// (research knob, default 1 reproduces the plain block weighting).
PceModel fit_sensitivity_enhanced(const MultivariateBasis& basis,
                                  std::span<const EvaluationRecord> records,
                                  const Eigen::VectorXd& weights,
                                  double gradient_block_scale = 1.0);

/// Shared weighted solve: minimizes || diag(sqrt(w)) (A x - b) ||.
PceModel solve_weighted(const MultivariateBasis& basis, const Eigen::MatrixXd& a,
                        const Eigen::VectorXd& b, const Eigen::VectorXd& w);

/// Surrogate evaluation at the given points.
Eigen::VectorXd predict(const MultivariateBasis& basis, const PceModel& model,
                        const Eigen::MatrixXd& points);

} // namespace searpc
