#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "searpc/analysis.hpp"
#include "searpc/doe.hpp"
#include "searpc/models.hpp"
#include "searpc/regression.hpp"
#include "searpc/topopt.hpp"

namespace searpc {

enum class Method { SearPc, WlsqApc };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Configuration of one synthetic-function experiment.
struct ExperimentConfig {
    std::string model = "cubic";
    DistributionSpec distribution = DistributionSpec::named("multimodal");
    int dims = 10;
    std::vector<int> orders = {3};
    int n_o = 2;
    Eigen::Index pool_size = 10000;
    std::uint64_t seed = 42;
    std::string output_dir = ".";
    Method method = Method::SearPc;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    /// Hash of the canonical JSON form, embedded in every artifact.
    std::string config_hash() const;
};

/// Everything produced by one pipeline run (single order).
struct PipelineResult {
    MultivariateBasis basis;
    DesignOfExperiments doe;
    PceModel model;
    OutputSummary summary;
    DensityEstimate density;
    int order = 0;
    double mc_mean = 0.0;
    double mc_sd = 0.0;
    double delta_mu_pct = 0.0;
    double delta_sigma_pct = 0.0;
    double surrogate_skewness = 0.0;
    double surrogate_kurtosis = 0.0;
};

/// Runs the seven pipeline stages for a single order: pool sampling,
/// moments, basis, DoE, model evaluation (with gradients when the method is
/// sensitivity enhanced), fitting, and analysis. The direct Monte Carlo
/// reference evaluates the model on the same pool. If output_dir is set and
/// write_artifacts is true, writes basis.json, doe.json, model.json,
/// summary.json, and density.csv.
PipelineResult run_pipeline(const ExperimentConfig& config, int order,
                            bool write_artifacts = true);

struct TableRow {
    std::string method;
    int order = 0;
    int q = 0;
    double delta_mu_pct = 0.0;
    double delta_sigma_pct = 0.0;
    double ks = 0.0;
};

/// One row per (method, order) in the configured sweep; CSV columns are
/// method, p, q, delta_mu_pct, delta_sigma_pct, ks.
std::vector<TableRow> run_convergence_table(const ExperimentConfig& config,
                                            const std::vector<Method>& methods);
void write_table_csv(const std::filesystem::path& path, const std::vector<TableRow>& rows,
                     const std::string& meta_comment);

struct MinSamplesRow {
    int dims = 0;
    int order = 0;
    std::string method; // sear | wlsq | smolyak
    std::size_t count = 0;
};

/// Closed-form minimum evaluation counts: ceil(n_o (P+1)/(n_u+1)) for the
/// sensitivity-enhanced fit, n_o (P+1) for plain weighted least squares,
/// and the nested Clenshaw-Curtis sparse-grid size at level p for
/// comparison.
std::vector<MinSamplesRow> min_samples_figure(const std::vector<int>& dims,
                                              const std::vector<int>& orders, int n_o);

/// Number of points of a dimension-d, level-l sparse grid built on nested
/// one-dimensional rules with m_1 = 1, m_i = 2^{i-1} + 1.
std::size_t smolyak_point_count(int dims, int level);

struct TopOptStudyConfig {
    TopOptConfig topopt;
    double sd = 0.05;
    std::vector<int> oversampling = {1, 2, 4, 8, 16};
    std::vector<int> wlsq_oversampling = {};  // e.g. {1, 2} for the baseline rows
    Eigen::Index pool_size = 10000;
    Eigen::Index mc_samples = 10000;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
};

struct TopOptStudyRow {
    std::string method;
    int q = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ks = 0.0;
};

struct TopOptStudyResult {
    TopOptStructure structure;
    std::vector<TopOptStudyRow> rows;
    Eigen::VectorXd sobol_heatmap; // from the largest sensitivity-enhanced fit
    Eigen::VectorXd mc_heatmap;
};

/// Optimizes the structure, runs the Monte Carlo reference once, then one
/// sensitivity-enhanced study per oversampling ratio (plus optional plain
/// WLSQ baselines). Writes structure.csv, the study table, and both
/// heatmap CSVs into output_dir.
TopOptStudyResult run_topopt_study(const TopOptStudyConfig& config, bool write_artifacts = true);

/// Writes an element field as a nely x nelx CSV grid (row = y, column = x).
void write_grid_csv(const std::filesystem::path& path, const Eigen::VectorXd& field, int nelx,
                    int nely, const std::string& meta_comment);

void write_density_csv(const std::filesystem::path& path, const DensityEstimate& density,
                       const std::string& meta_comment);

} // namespace searpc
