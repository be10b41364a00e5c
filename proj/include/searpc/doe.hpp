#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "searpc/basis.hpp"

namespace searpc {

/// Monte Carlo candidate pool: n_s i.i.d. draws from the joint density.
struct CandidatePool {
    Eigen::MatrixXd points;
    std::uint64_t seed = 0;
};

/// Result of the determinant-maximizing subset selection.
struct DesignOfExperiments {
    Eigen::MatrixXd points;             // q x n_u (q_a x n_u without enhancement)
    std::vector<Eigen::Index> indices;  // selected rows of the pool, pivot order
    Eigen::VectorXd weights;            // W diagonal restricted to the selection
    Eigen::VectorXd r_diagonal;         // |R| diagonal of the first-stage selection, size q_a
    int q_a = 0;
    int q = 0;

    nlohmann::json to_json() const;
};

/// W(xi) = c^-1 B(xi)^-1 with B(xi) = sqrt(sum_{j>=1} Psi_j(xi)^2) and c^2
/// the mean of B^2 over the given points (Monte Carlo estimate of the
/// normalization integral). Weights are capped at weight_cap to guard
/// against B -> 0. Rejects order-0 bases, for which the sum is empty.
Eigen::VectorXd coherence_weights(const MultivariateBasis& basis, const Eigen::MatrixXd& points,
                                  double weight_cap = 1e12);

/// q_a = n_o (P+1): rows needed by the plain weighted least-squares fit.
int oversampled_count(Eigen::Index terms, int n_o);

/// q = ceil(q_a / (n_u+1)): model evaluations needed once each sample also
/// contributes n_u derivative rows.
int enhanced_count(Eigen::Index terms, int dims, int n_o);

/// Two-step coherence/D-optimal selection: a column-pivoted QR of
/// (W^{1/2} psi)^T ranks the q_a most important pool points; with
/// sensitivity enhancement only the first q of those are kept. When q_a
/// exceeds the number of basis terms the pivoting is restarted on the
/// not-yet-selected columns, so the |R| diagonal is descending within each
/// restart block (and globally whenever q_a <= P+1).
DesignOfExperiments select_doe(const MultivariateBasis& basis, const CandidatePool& pool,
                               int n_o, bool sensitivity_enhanced);

} // namespace searpc
