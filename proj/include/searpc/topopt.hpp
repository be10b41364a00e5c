#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <nlohmann/json_fwd.hpp>

#include "searpc/analysis.hpp"
#include "searpc/basis.hpp"
#include "searpc/regression.hpp"

namespace searpc {

struct TopOptConfig {
    int nelx = 40;
    int nely = 20;
    double volfrac = 0.5;
    double penal = 3.0;
    double rmin = 1.5;
    double E0 = 1.0;
    double Emin = 1e-9;
    double nu = 0.3;
    int max_iterations = 200;
    double change_tol = 0.01;
    double gray_threshold = 0.01; // tau: elements with tau < x < 1-tau are uncertain

    void validate() const;
    nlohmann::json to_json() const;
    static TopOptConfig from_json(const nlohmann::json& j);
};

struct ComplianceEvaluation {
    double compliance = 0.0;
    Eigen::VectorXd gradient;      // dC/dx_e for every element
    Eigen::VectorXd displacement;  // full DOF vector (fixed DOFs are zero)
};

struct TopOptStructure {
    Eigen::VectorXd densities;            // element-major, e = ex * nely + ey
    std::vector<int> uncertain_elements;  // indices with intermediate density
    bool converged = false;
    int iterations = 0;
    double final_change = 0.0;
    std::vector<double> compliance_history;
};

/// Half MBB beam discretized with bilinear quads: symmetry rollers on the
/// left edge x-DOFs, a vertical roller at the bottom-right corner, unit
/// downward point load at the top-left node. Element Young's modulus
/// follows E(x) = Emin + x^penal (E0 - Emin).
class MbbProblem {
public:
    explicit MbbProblem(TopOptConfig cfg);

    const TopOptConfig& config() const { return cfg_; }
    int element_count() const { return cfg_.nelx * cfg_.nely; }
    Eigen::Index dof_count() const { return 2 * (cfg_.nelx + 1) * (cfg_.nely + 1); }
    const Eigen::Matrix<double, 8, 8>& element_stiffness() const { return ke_; }
    const std::vector<Eigen::Index>& fixed_dofs() const { return fixed_dofs_; }

    static Eigen::Matrix<double, 8, 8> unit_element_stiffness(double nu);

    /// Holds the numeric factorization state; one instance per thread.
    class Evaluator {
    public:
        explicit Evaluator(const MbbProblem& problem);
        ComplianceEvaluation evaluate(const Eigen::VectorXd& densities);

    private:
        const MbbProblem& problem_;
        Eigen::SparseMatrix<double> k_;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
    };

    Evaluator make_evaluator() const { return Evaluator(*this); }

private:
    friend class Evaluator;

    TopOptConfig cfg_;
    Eigen::Matrix<double, 8, 8> ke_;
    Eigen::MatrixXi edof_;                   // n_e x 8 global DOF ids
    std::vector<Eigen::Index> fixed_dofs_;
    std::vector<Eigen::Index> free_index_;   // full DOF -> free index, -1 if fixed
    Eigen::Index n_free_ = 0;
    Eigen::VectorXd f_free_;
    Eigen::SparseMatrix<double> pattern_;    // free x free sparsity
    std::vector<std::array<Eigen::Index, 64>> slots_; // CSC value positions per element pair
};

/// Optimality-criteria SIMP loop with sensitivity filtering, stopping when
/// the density change drops below change_tol or the iteration cap is hit.
TopOptStructure optimize_structure(const MbbProblem& problem);

struct TopoUqOptions {
    double sd = 0.05;
    int n_o = 8;
    Eigen::Index pool_size = 10000;
    Eigen::Index mc_samples = 10000;
    std::uint64_t seed = 1;
};

/// Direct Monte Carlo over the uncertain densities: one FE solve per sample,
/// gradients collected for the mean-sensitivity heatmap.
struct McReference {
    Eigen::MatrixXd points;     // n_mc x n_u
    Eigen::VectorXd values;     // compliance per sample
    Eigen::MatrixXd gradients;  // n_mc x n_u
    double mean = 0.0;
    double sd = 0.0;
};

McReference run_mc_reference(const MbbProblem& problem, const TopOptStructure& structure,
                             double sd, Eigen::Index n_samples, std::uint64_t seed);

struct TopoUqResult {
    OutputSummary summary;         // PCE moments, Sobol indices, KS vs the MC reference
    Eigen::VectorXd sobol_heatmap; // element grid, zero outside the uncertain set
    Eigen::VectorXd mc_heatmap;
    double mc_mean = 0.0;
    double mc_sd = 0.0;
    int q = 0;
    int q_a = 0;
    PceModel model;
    Eigen::VectorXd surrogate_values; // PCE evaluated on the MC points
};

/// First-order sensitivity-enhanced study of the optimized structure under
/// independent truncated-normal density perturbations: analytic moments from
/// closed-form truncated-normal moments, coherence-optimal DoE with q = n_o
/// forward solves, and validation against the MC reference (computed here
/// unless a shared one is supplied).
TopoUqResult uq_study(const MbbProblem& problem, const TopOptStructure& structure,
                      const TopoUqOptions& options, const McReference* shared_mc = nullptr);

} // namespace searpc
