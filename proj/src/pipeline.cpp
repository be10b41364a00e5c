#include "searpc/pipeline.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"
#include "searpc/io.hpp"

namespace searpc {

namespace {

/// Runs one stage and prefixes any library error with the stage name, so a
/// failing run reports where it broke.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    }
}

nlohmann::json artifact_meta(const ExperimentConfig& config) {
    return {{"config_hash", config.config_hash()}, {"seed", config.seed}};
}

} // namespace

std::string method_name(Method m) {
    return m == Method::SearPc ? "sear-pc" : "wlsq-apc";
}

Method method_from_name(const std::string& name) {
    if (name == "sear-pc")
        return Method::SearPc;
    if (name == "wlsq-apc")
        return Method::WlsqApc;
    throw InvalidArgument("unknown method '" + name + "' (available: sear-pc, wlsq-apc)");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"model", model},
            {"distribution", distribution.to_json()},
            {"dims", dims},
            {"orders", orders},
            {"n_o", n_o},
            {"pool_size", pool_size},
            {"seed", seed},
            {"output_dir", output_dir},
            {"method", method_name(method)}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.model = j.value("model", c.model);
    if (j.contains("distribution")) {
        if (j.at("distribution").is_string())
            c.distribution = DistributionSpec::named(j.at("distribution").get<std::string>());
        else
            c.distribution = DistributionSpec::from_json(j.at("distribution"));
    }
    c.dims = j.value("dims", c.dims);
    c.orders = j.value("orders", c.orders);
    c.n_o = j.value("n_o", c.n_o);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("method"))
        c.method = method_from_name(j.at("method").get<std::string>());
    if (c.dims < 1)
        throw InvalidArgument("dims must be >= 1");
    if (c.orders.empty())
        throw InvalidArgument("orders must not be empty");
    return c;
}

std::string ExperimentConfig::config_hash() const {
    return to_hex(fnv1a64(to_json().dump()));
}

PipelineResult run_pipeline(const ExperimentConfig& config, int order, bool write_artifacts) {
    const Model model = stage("model", [&] { return builtin_model(config.model, config.dims); });

    // Stage 1: Monte Carlo pool from the joint density.
    const CandidatePool pool = stage("sampling", [&] {
        std::vector<DistributionSpec> dists(static_cast<std::size_t>(config.dims),
                                            config.distribution);
        return CandidatePool{sample_matrix(dists, config.pool_size, config.seed), config.seed};
    });

    // Stages 2-3: moments of the pool columns, orthonormal basis.
    MultivariateBasis basis = stage("basis", [&] {
        return MultivariateBasis::from_samples(pool.points, order);
    });

    // Stage 4: coherence-optimal design of experiments.
    const bool enhanced = config.method == Method::SearPc;
    DesignOfExperiments doe =
        stage("doe", [&] { return select_doe(basis, pool, config.n_o, enhanced); });

    // Stage 5: model evaluations (with gradients on the enhanced path).
    const std::vector<EvaluationRecord> records = stage("evaluation", [&] {
        std::vector<EvaluationRecord> recs;
        recs.reserve(static_cast<std::size_t>(doe.points.rows()));
        for (Eigen::Index i = 0; i < doe.points.rows(); ++i) {
            const ModelOutput out = model.evaluate(doe.points.row(i).transpose());
            EvaluationRecord rec;
            rec.point = doe.points.row(i).transpose();
            rec.value = out.value;
            if (enhanced)
                rec.gradient = out.gradient;
            recs.push_back(std::move(rec));
        }
        return recs;
    });

    // Stage 6: least-squares fit.
    PceModel fitted = stage("fit", [&] {
        return enhanced ? fit_sensitivity_enhanced(basis, records, doe.weights)
                        : fit_wlsq(basis, records, doe.weights);
    });

    // Stage 7 + validation: surrogate and direct model on the same pool.
    PipelineResult result{std::move(basis), std::move(doe), std::move(fitted),
                          OutputSummary{}, DensityEstimate{}, order,
                          0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    stage("analysis", [&] {
        const auto [mean, variance] = analytic_moments(result.model, result.basis);
        result.summary.mean = mean;
        result.summary.variance = variance;
        result.summary.sobol_first_order = sobol_first_order(result.model, result.basis);

        Eigen::VectorXd direct(pool.points.rows());
        for (Eigen::Index i = 0; i < pool.points.rows(); ++i)
            direct(i) = model.evaluate(pool.points.row(i).transpose()).value;
        const Eigen::VectorXd surrogate = predict(result.basis, result.model, pool.points);

        result.mc_mean = direct.mean();
        result.mc_sd = std::sqrt((direct.array() - result.mc_mean).square().sum() /
                                 static_cast<double>(direct.size() - 1));
        result.delta_mu_pct = 100.0 * std::abs(mean - result.mc_mean) / std::abs(result.mc_mean);
        result.delta_sigma_pct =
            100.0 * std::abs(std::sqrt(variance) - result.mc_sd) / result.mc_sd;
        result.summary.ks_distance = ks_distance(
            std::span<const double>(surrogate.data(), static_cast<std::size_t>(surrogate.size())),
            std::span<const double>(direct.data(), static_cast<std::size_t>(direct.size())));
        result.density = kernel_density(surrogate);
        const auto [skew, kurt] = sample_skewness_kurtosis(surrogate);
        result.surrogate_skewness = skew;
        result.surrogate_kurtosis = kurt;
        return 0;
    });

    if (write_artifacts) {
        stage("artifacts", [&] {
            const std::filesystem::path dir(config.output_dir);
            std::filesystem::create_directories(dir);
            const nlohmann::json meta = artifact_meta(config);

            nlohmann::json basis_json = result.basis.to_json();
            basis_json["meta"] = meta;
            write_atomic(dir / "basis.json", basis_json.dump(2) + "\n");

            nlohmann::json doe_json = result.doe.to_json();
            doe_json["meta"] = meta;
            write_atomic(dir / "doe.json", doe_json.dump(2) + "\n");

            nlohmann::json model_json = result.model.to_json();
            model_json["meta"] = meta;
            write_atomic(dir / "model.json", model_json.dump(2) + "\n");

            nlohmann::json summary = result.summary.to_json();
            summary["order"] = order;
            summary["q"] = result.doe.q;
            summary["q_a"] = result.doe.q_a;
            summary["method"] = method_name(config.method);
            summary["condition"] = result.model.diagnostics.condition;
            summary["residual_norm"] = result.model.diagnostics.residual_norm;
            summary["mc"] = {{"mean", result.mc_mean}, {"sd", result.mc_sd}};
            summary["delta_mu_pct"] = result.delta_mu_pct;
            summary["delta_sigma_pct"] = result.delta_sigma_pct;
            summary["surrogate"] = {{"skewness", result.surrogate_skewness},
                                    {"kurtosis", result.surrogate_kurtosis}};
            summary["meta"] = meta;
            write_atomic(dir / "summary.json", summary.dump(2) + "\n");

            write_density_csv(dir / "density.csv", result.density,
                              "config_hash=" + config.config_hash() +
                                  " seed=" + std::to_string(config.seed));
            return 0;
        });
    }
    return result;
}

std::vector<TableRow> run_convergence_table(const ExperimentConfig& config,
                                            const std::vector<Method>& methods) {
    std::vector<TableRow> rows;
    for (Method m : methods) {
        ExperimentConfig c = config;
        c.method = m;
        for (int p : config.orders) {
            const PipelineResult r = run_pipeline(c, p, false);
            TableRow row;
            row.method = method_name(m);
            row.order = p;
            row.q = static_cast<int>(r.doe.points.rows());
            row.delta_mu_pct = r.delta_mu_pct;
            row.delta_sigma_pct = r.delta_sigma_pct;
            row.ks = r.summary.ks_distance.value_or(0.0);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_table_csv(const std::filesystem::path& path, const std::vector<TableRow>& rows,
                     const std::string& meta_comment) {
    std::ostringstream out;
    out.precision(12);
    if (!meta_comment.empty())
        out << "# " << meta_comment << "\n";
    out << "method,p,q,delta_mu_pct,delta_sigma_pct,ks\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.order << ',' << r.q << ',' << r.delta_mu_pct << ','
            << r.delta_sigma_pct << ',' << r.ks << '\n';
    write_atomic(path, out.str());
}

std::size_t smolyak_point_count(int dims, int level) {
    if (dims < 1 || level < 0)
        throw InvalidArgument("invalid sparse-grid parameters");
    // Points added by the 1D rule at level i (1-based): 1, 2, then 2^{i-2}.
    auto added = [](int i) -> double {
        if (i == 1)
            return 1.0;
        if (i == 2)
            return 2.0;
        return std::pow(2.0, i - 2);
    };
    // dp[s] = sum over index vectors of the first k dims with |i|_1 = s.
    const int max_sum = dims + level;
    std::vector<double> dp(static_cast<std::size_t>(max_sum + 1), 0.0);
    dp[0] = 1.0;
    for (int k = 0; k < dims; ++k) {
        std::vector<double> next(static_cast<std::size_t>(max_sum + 1), 0.0);
        for (int s = k; s <= max_sum; ++s) {
            if (dp[static_cast<std::size_t>(s)] == 0.0)
                continue;
            for (int i = 1; s + i <= max_sum; ++i)
                next[static_cast<std::size_t>(s + i)] += dp[static_cast<std::size_t>(s)] * added(i);
        }
        dp.swap(next);
    }
    double total = 0.0;
    for (int s = dims; s <= max_sum; ++s)
        total += dp[static_cast<std::size_t>(s)];
    return static_cast<std::size_t>(std::llround(total));
}

std::vector<MinSamplesRow> min_samples_figure(const std::vector<int>& dims,
                                              const std::vector<int>& orders, int n_o) {
    std::vector<MinSamplesRow> rows;
    for (int n_u : dims) {
        for (int p : orders) {
            const auto terms = MultiIndex::cardinality(n_u, p);
            const int q_a = oversampled_count(static_cast<Eigen::Index>(terms), n_o);
            rows.push_back({n_u, p, "sear",
                            static_cast<std::size_t>(
                                enhanced_count(static_cast<Eigen::Index>(terms), n_u, n_o))});
            rows.push_back({n_u, p, "wlsq", static_cast<std::size_t>(q_a)});
            rows.push_back({n_u, p, "smolyak", smolyak_point_count(n_u, p)});
        }
    }
    return rows;
}

TopOptStudyResult run_topopt_study(const TopOptStudyConfig& config, bool write_artifacts) {
    const MbbProblem problem(config.topopt);
    TopOptStudyResult result;
    result.structure = stage("optimize", [&] { return optimize_structure(problem); });

    const McReference mc = stage("mc-reference", [&] {
        return run_mc_reference(problem, result.structure, config.sd, config.mc_samples,
                                config.seed + 0x9e3779b9ull);
    });
    result.rows.push_back(
        {"mc", static_cast<int>(config.mc_samples), mc.mean, mc.sd, 0.0});

    int best_n_o = 0;
    for (int n_o : config.oversampling) {
        TopoUqOptions opts;
        opts.sd = config.sd;
        opts.n_o = n_o;
        opts.pool_size = config.pool_size;
        opts.mc_samples = config.mc_samples;
        opts.seed = config.seed;
        const TopoUqResult r = stage("uq-study", [&] {
            return uq_study(problem, result.structure, opts, &mc);
        });
        result.rows.push_back({"sear-pc", r.q, r.summary.mean,
                               std::sqrt(r.summary.variance),
                               r.summary.ks_distance.value_or(0.0)});
        if (n_o >= best_n_o) {
            best_n_o = n_o;
            result.sobol_heatmap = r.sobol_heatmap;
            result.mc_heatmap = r.mc_heatmap;
        }
    }

    // Optional plain weighted-least-squares baselines (q_a forward solves each).
    for (int n_o : config.wlsq_oversampling) {
        const auto& uncertain = result.structure.uncertain_elements;
        const int n_u = static_cast<int>(uncertain.size());

        std::vector<MomentSet> moments;
        std::vector<AffineMap> maps;
        std::vector<DistributionSpec> dists;
        for (int e : uncertain) {
            const double m = result.structure.densities(e);
            const auto [mean, dev] = truncated_normal_mean_sd(m, config.sd, 0.0, 1.0);
            const AffineMap map{mean, dev};
            moments.push_back(
                transform_moments(truncated_normal_moments(m, config.sd, 0.0, 1.0, 1), map));
            maps.push_back(map);
            DistributionSpec d;
            d.kind = DistributionKind::TruncatedNormal;
            d.mean = m;
            d.sd = config.sd;
            d.lower = 0.0;
            d.upper = 1.0;
            dists.push_back(d);
        }
        const MultivariateBasis basis = MultivariateBasis::from_moments(moments, 1, maps);
        CandidatePool pool{sample_matrix(dists, config.pool_size, config.seed), config.seed};
        const DesignOfExperiments doe = select_doe(basis, pool, n_o, false);

        auto evaluator = problem.make_evaluator();
        std::vector<EvaluationRecord> records;
        Eigen::VectorXd densities = result.structure.densities;
        for (Eigen::Index s = 0; s < doe.points.rows(); ++s) {
            for (int j = 0; j < n_u; ++j)
                densities(uncertain[static_cast<std::size_t>(j)]) = doe.points(s, j);
            EvaluationRecord rec;
            rec.point = doe.points.row(s).transpose();
            rec.value = evaluator.evaluate(densities).compliance;
            records.push_back(std::move(rec));
        }
        const PceModel model = fit_wlsq(basis, records, doe.weights);
        const auto [mean, variance] = analytic_moments(model, basis);
        const Eigen::VectorXd surrogate = predict(basis, model, mc.points);
        const double ks = ks_distance(
            std::span<const double>(surrogate.data(), static_cast<std::size_t>(surrogate.size())),
            std::span<const double>(mc.values.data(), static_cast<std::size_t>(mc.values.size())));
        result.rows.push_back({"wlsq-apc", static_cast<int>(doe.points.rows()), mean,
                               std::sqrt(variance), ks});
    }

    if (write_artifacts) {
        stage("artifacts", [&] {
            const std::filesystem::path dir(config.output_dir);
            std::filesystem::create_directories(dir);
            const std::string meta = "seed=" + std::to_string(config.seed);

            write_grid_csv(dir / "structure.csv", result.structure.densities, config.topopt.nelx,
                           config.topopt.nely, meta);
            write_grid_csv(dir / "sobol_heatmap.csv", result.sobol_heatmap, config.topopt.nelx,
                           config.topopt.nely, meta);
            write_grid_csv(dir / "mc_heatmap.csv", result.mc_heatmap, config.topopt.nelx,
                           config.topopt.nely, meta);

            std::ostringstream out;
            out.precision(12);
            out << "# " << meta << "\n";
            out << "method,q,mu,sigma,ks\n";
            for (const auto& r : result.rows)
                out << r.method << ',' << r.q << ',' << r.mean << ',' << r.sd << ',' << r.ks
                    << '\n';
            write_atomic(dir / "study.csv", out.str());
            return 0;
        });
    }
    return result;
}

void write_grid_csv(const std::filesystem::path& path, const Eigen::VectorXd& field, int nelx,
                    int nely, const std::string& meta_comment) {
    if (field.size() != static_cast<Eigen::Index>(nelx) * nely)
        throw InvalidArgument("field size does not match the element grid");
    std::ostringstream out;
    out.precision(12);
    if (!meta_comment.empty())
        out << "# " << meta_comment << "\n";
    for (int ey = 0; ey < nely; ++ey) {
        for (int ex = 0; ex < nelx; ++ex) {
            if (ex) out << ',';
            out << field(ex * nely + ey);
        }
        out << '\n';
    }
    write_atomic(path, out.str());
}

void write_density_csv(const std::filesystem::path& path, const DensityEstimate& density,
                       const std::string& meta_comment) {
    std::ostringstream out;
    out.precision(12);
    if (!meta_comment.empty())
        out << "# " << meta_comment << "\n";
    out << "grid,density\n";
    for (Eigen::Index i = 0; i < density.grid.size(); ++i)
        out << density.grid(i) << ',' << density.density(i) << '\n';
    write_atomic(path, out.str());
}

} // namespace searpc
