#include "searpc/topopt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "searpc/doe.hpp"
#include "searpc/errors.hpp"
#include "searpc/models.hpp"

namespace searpc {

void TopOptConfig::validate() const {
    if (nelx < 1 || nely < 1)
        throw InvalidArgument("element counts must be >= 1");
    if (!(volfrac > 0.0) || !(volfrac < 1.0))
        throw InvalidArgument("volume fraction must lie in (0,1)");
    if (penal < 1.0)
        throw InvalidArgument("penalty exponent must be >= 1");
    if (!(rmin > 0.0))
        throw InvalidArgument("filter radius must be positive");
    if (!(E0 > 0.0) || !(Emin > 0.0) || !(Emin < E0))
        throw InvalidArgument("Young's moduli must satisfy 0 < Emin < E0");
    if (!(nu > -1.0) || !(nu < 0.5))
        throw InvalidArgument("Poisson ratio out of range");
    if (max_iterations < 1)
        throw InvalidArgument("iteration cap must be >= 1");
    if (!(gray_threshold > 0.0) || !(gray_threshold < 0.5))
        throw InvalidArgument("gray threshold must lie in (0, 0.5)");
}

Eigen::Matrix<double, 8, 8> MbbProblem::unit_element_stiffness(double nu) {
    const double k[8] = {0.5 - nu / 6.0,   0.125 + nu / 8.0, -0.25 - nu / 12.0,
                         -0.125 + 3.0 * nu / 8.0, -0.25 + nu / 12.0, -0.125 - nu / 8.0,
                         nu / 6.0,         0.125 - 3.0 * nu / 8.0};
    const int layout[8][8] = {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2},
                              {2, 7, 0, 5, 6, 3, 4, 1}, {3, 6, 5, 0, 7, 2, 1, 4},
                              {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
                              {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
    Eigen::Matrix<double, 8, 8> ke;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            ke(i, j) = k[layout[i][j]] / (1.0 - nu * nu);
    return ke;
}

MbbProblem::MbbProblem(TopOptConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    ke_ = unit_element_stiffness(cfg_.nu);

    const int nelx = cfg_.nelx;
    const int nely = cfg_.nely;
    const Eigen::Index ndof = dof_count();

    edof_.resize(element_count(), 8);
    for (int ex = 0; ex < nelx; ++ex) {
        for (int ey = 0; ey < nely; ++ey) {
            const int e = ex * nely + ey;
            const int upper_left = ex * (nely + 1) + ey;
            const int base = 2 * (upper_left + 1); // x-DOF of the lower-left node
            const int edof[8] = {base,
                                 base + 1,
                                 base + 2 * (nely + 1),
                                 base + 2 * (nely + 1) + 1,
                                 base + 2 * nely,
                                 base + 2 * nely + 1,
                                 base - 2,
                                 base - 1};
            for (int i = 0; i < 8; ++i)
                edof_(e, i) = edof[i];
        }
    }

    // Symmetry rollers on the left edge, vertical roller at bottom right.
    for (int ey = 0; ey <= nely; ++ey)
        fixed_dofs_.push_back(2 * ey);
    fixed_dofs_.push_back(ndof - 1);

    free_index_.assign(static_cast<std::size_t>(ndof), Eigen::Index{-1});
    for (Eigen::Index d : fixed_dofs_)
        free_index_[static_cast<std::size_t>(d)] = -2;
    n_free_ = 0;
    for (Eigen::Index d = 0; d < ndof; ++d)
        if (free_index_[static_cast<std::size_t>(d)] == -1)
            free_index_[static_cast<std::size_t>(d)] = n_free_++;
        else
            free_index_[static_cast<std::size_t>(d)] = -1;

    // Unit downward load on the top-left node.
    f_free_.setZero(n_free_);
    const Eigen::Index load_dof = free_index_[1];
    if (load_dof < 0)
        throw NumericError("load DOF unexpectedly constrained");
    f_free_(load_dof) = -1.0;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(element_count()) * 64);
    for (int e = 0; e < element_count(); ++e)
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                const Eigen::Index r = free_index_[static_cast<std::size_t>(edof_(e, i))];
                const Eigen::Index c = free_index_[static_cast<std::size_t>(edof_(e, j))];
                if (r >= 0 && c >= 0)
                    triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), 1.0);
            }
    pattern_.resize(n_free_, n_free_);
    pattern_.setFromTriplets(triplets.begin(), triplets.end());
    pattern_.makeCompressed();

    // Map each element-local pair to its position in the CSC value array.
    slots_.assign(static_cast<std::size_t>(element_count()), {});
    const auto* outer = pattern_.outerIndexPtr();
    const auto* inner = pattern_.innerIndexPtr();
    for (int e = 0; e < element_count(); ++e) {
        auto& slot = slots_[static_cast<std::size_t>(e)];
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                const Eigen::Index r = free_index_[static_cast<std::size_t>(edof_(e, i))];
                const Eigen::Index c = free_index_[static_cast<std::size_t>(edof_(e, j))];
                if (r < 0 || c < 0) {
                    slot[static_cast<std::size_t>(8 * i + j)] = -1;
                    continue;
                }
                const auto* begin = inner + outer[c];
                const auto* end = inner + outer[c + 1];
                const auto* pos = std::lower_bound(begin, end, static_cast<int>(r));
                if (pos == end || *pos != static_cast<int>(r))
                    throw NumericError("stiffness pattern lookup failed");
                slot[static_cast<std::size_t>(8 * i + j)] = pos - inner;
            }
    }
}

MbbProblem::Evaluator::Evaluator(const MbbProblem& problem)
    : problem_(problem), k_(problem.pattern_) {
    solver_.analyzePattern(k_);
}

ComplianceEvaluation MbbProblem::Evaluator::evaluate(const Eigen::VectorXd& densities) {
    const auto& cfg = problem_.cfg_;
    const int n_e = problem_.element_count();
    if (densities.size() != n_e)
        throw InvalidArgument("density field has wrong element count");
    for (Eigen::Index e = 0; e < densities.size(); ++e)
        if (!(densities(e) >= 0.0) || !(densities(e) <= 1.0))
            throw InvalidArgument("densities must lie in [0,1]");

    double* values = k_.valuePtr();
    std::fill(values, values + k_.nonZeros(), 0.0);
    const auto& ke = problem_.ke_;
    for (int e = 0; e < n_e; ++e) {
        const double stiff = cfg.Emin + std::pow(densities(e), cfg.penal) * (cfg.E0 - cfg.Emin);
        const auto& slot = problem_.slots_[static_cast<std::size_t>(e)];
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                const Eigen::Index s = slot[static_cast<std::size_t>(8 * i + j)];
                if (s >= 0)
                    values[s] += stiff * ke(i, j);
            }
    }

    solver_.factorize(k_);
    if (solver_.info() != Eigen::Success)
        throw NumericError("singular stiffness matrix: void region disconnects the load path");
    const Eigen::VectorXd u_free = solver_.solve(problem_.f_free_);

    ComplianceEvaluation out;
    out.compliance = problem_.f_free_.dot(u_free);
    out.displacement.setZero(problem_.dof_count());
    for (Eigen::Index d = 0; d < problem_.dof_count(); ++d) {
        const Eigen::Index f = problem_.free_index_[static_cast<std::size_t>(d)];
        if (f >= 0)
            out.displacement(d) = u_free(f);
    }

    out.gradient.resize(n_e);
    Eigen::Matrix<double, 8, 1> ue;
    for (int e = 0; e < n_e; ++e) {
        for (int i = 0; i < 8; ++i)
            ue(i) = out.displacement(problem_.edof_(e, i));
        const double ce = ue.dot(ke * ue);
        out.gradient(e) =
            -cfg.penal * std::pow(densities(e), cfg.penal - 1.0) * (cfg.E0 - cfg.Emin) * ce;
    }
    return out;
}

namespace {

struct Filter {
    std::vector<std::vector<std::pair<int, double>>> neighbors;
    std::vector<double> weight_sum;
};

Filter build_filter(const TopOptConfig& cfg) {
    Filter f;
    const int n_e = cfg.nelx * cfg.nely;
    f.neighbors.resize(static_cast<std::size_t>(n_e));
    f.weight_sum.assign(static_cast<std::size_t>(n_e), 0.0);
    const int reach = static_cast<int>(std::ceil(cfg.rmin)) - 1;
    for (int ex = 0; ex < cfg.nelx; ++ex)
        for (int ey = 0; ey < cfg.nely; ++ey) {
            const int e = ex * cfg.nely + ey;
            for (int fx = std::max(ex - reach, 0); fx <= std::min(ex + reach, cfg.nelx - 1); ++fx)
                for (int fy = std::max(ey - reach, 0); fy <= std::min(ey + reach, cfg.nely - 1);
                     ++fy) {
                    const double dist = std::hypot(static_cast<double>(ex - fx),
                                                   static_cast<double>(ey - fy));
                    const double w = cfg.rmin - dist;
                    if (w > 0.0) {
                        f.neighbors[static_cast<std::size_t>(e)].emplace_back(fx * cfg.nely + fy, w);
                        f.weight_sum[static_cast<std::size_t>(e)] += w;
                    }
                }
        }
    return f;
}

Eigen::VectorXd filter_sensitivities(const Filter& filter, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& dc) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index e = 0; e < x.size(); ++e) {
        double acc = 0.0;
        for (const auto& [f, w] : filter.neighbors[static_cast<std::size_t>(e)])
            acc += w * x(f) * dc(f);
        out(e) = acc / (std::max(1e-3, x(e)) * filter.weight_sum[static_cast<std::size_t>(e)]);
    }
    return out;
}

Eigen::VectorXd oc_update(const Eigen::VectorXd& x, const Eigen::VectorXd& dc, double volfrac) {
    const double move = 0.2;
    const double target = volfrac * static_cast<double>(x.size());
    double l1 = 0.0, l2 = 1e9;
    Eigen::VectorXd xnew(x.size());
    while ((l2 - l1) / (l1 + l2) > 1e-6) {
        const double lmid = 0.5 * (l1 + l2);
        for (Eigen::Index e = 0; e < x.size(); ++e) {
            const double b = x(e) * std::sqrt(std::max(-dc(e), 0.0) / lmid);
            xnew(e) = std::max(0.0, std::max(x(e) - move, std::min(1.0, std::min(x(e) + move, b))));
        }
        if (xnew.sum() > target)
            l1 = lmid;
        else
            l2 = lmid;
    }
    return xnew;
}

} // namespace

TopOptStructure optimize_structure(const MbbProblem& problem) {
    const auto& cfg = problem.config();
    const int n_e = problem.element_count();
    const Filter filter = build_filter(cfg);
    auto evaluator = problem.make_evaluator();

    TopOptStructure s;
    s.densities = Eigen::VectorXd::Constant(n_e, cfg.volfrac);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        const ComplianceEvaluation eval = evaluator.evaluate(s.densities);
        s.compliance_history.push_back(eval.compliance);
        const Eigen::VectorXd dc = filter_sensitivities(filter, s.densities, eval.gradient);
        const Eigen::VectorXd xnew = oc_update(s.densities, dc, cfg.volfrac);
        s.final_change = (xnew - s.densities).cwiseAbs().maxCoeff();
        s.densities = xnew;
        s.iterations = it + 1;
        if (s.final_change < cfg.change_tol) {
            s.converged = true;
            break;
        }
    }

    for (int e = 0; e < n_e; ++e)
        if (s.densities(e) > cfg.gray_threshold && s.densities(e) < 1.0 - cfg.gray_threshold)
            s.uncertain_elements.push_back(e);
    return s;
}

McReference run_mc_reference(const MbbProblem& problem, const TopOptStructure& structure,
                             double sd, Eigen::Index n_samples, std::uint64_t seed) {
    const auto& uncertain = structure.uncertain_elements;
    const auto n_u = static_cast<Eigen::Index>(uncertain.size());
    if (n_u == 0)
        throw NumericError("structure has no intermediate-density elements");

    std::vector<DistributionSpec> dists;
    dists.reserve(uncertain.size());
    for (int e : uncertain) {
        DistributionSpec d;
        d.kind = DistributionKind::TruncatedNormal;
        d.mean = structure.densities(e);
        d.sd = sd;
        d.lower = 0.0;
        d.upper = 1.0;
        dists.push_back(d);
    }

    McReference mc;
    mc.points = sample_matrix(dists, n_samples, seed);
    mc.values.resize(n_samples);
    mc.gradients.resize(n_samples, n_u);

    auto evaluator = problem.make_evaluator();
    Eigen::VectorXd densities = structure.densities;
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        for (Eigen::Index j = 0; j < n_u; ++j)
            densities(uncertain[static_cast<std::size_t>(j)]) = mc.points(s, j);
        const ComplianceEvaluation eval = evaluator.evaluate(densities);
        mc.values(s) = eval.compliance;
        for (Eigen::Index j = 0; j < n_u; ++j)
            mc.gradients(s, j) = eval.gradient(uncertain[static_cast<std::size_t>(j)]);
    }

    mc.mean = mc.values.mean();
    mc.sd = std::sqrt((mc.values.array() - mc.mean).square().sum() /
                      static_cast<double>(n_samples - 1));
    return mc;
}

TopoUqResult uq_study(const MbbProblem& problem, const TopOptStructure& structure,
                      const TopoUqOptions& options, const McReference* shared_mc) {
    if (!(options.sd > 0.0))
        throw InvalidArgument("perturbation standard deviation must be positive");
    const auto& uncertain = structure.uncertain_elements;
    const auto n_u = static_cast<int>(uncertain.size());
    if (n_u == 0)
        throw NumericError("structure has no intermediate-density elements");

    // Closed-form truncated-normal moments, standardized per element.
    std::vector<MomentSet> moments;
    std::vector<AffineMap> maps;
    std::vector<DistributionSpec> dists;
    moments.reserve(uncertain.size());
    for (int e : uncertain) {
        const double m = structure.densities(e);
        const auto [mean, dev] = truncated_normal_mean_sd(m, options.sd, 0.0, 1.0);
        const AffineMap map{mean, dev};
        moments.push_back(transform_moments(truncated_normal_moments(m, options.sd, 0.0, 1.0, 1), map));
        maps.push_back(map);

        DistributionSpec d;
        d.kind = DistributionKind::TruncatedNormal;
        d.mean = m;
        d.sd = options.sd;
        d.lower = 0.0;
        d.upper = 1.0;
        dists.push_back(d);
    }
    const MultivariateBasis basis = MultivariateBasis::from_moments(moments, 1, maps);

    CandidatePool pool{sample_matrix(dists, options.pool_size, options.seed), options.seed};
    const DesignOfExperiments doe = select_doe(basis, pool, options.n_o, true);

    auto evaluator = problem.make_evaluator();
    std::vector<EvaluationRecord> records;
    records.reserve(static_cast<std::size_t>(doe.points.rows()));
    Eigen::VectorXd densities = structure.densities;
    for (Eigen::Index s = 0; s < doe.points.rows(); ++s) {
        for (int j = 0; j < n_u; ++j)
            densities(uncertain[static_cast<std::size_t>(j)]) = doe.points(s, j);
        const ComplianceEvaluation eval = evaluator.evaluate(densities);
        EvaluationRecord rec;
        rec.point = doe.points.row(s).transpose();
        rec.value = eval.compliance;
        Eigen::VectorXd grad(n_u);
        for (int j = 0; j < n_u; ++j)
            grad(j) = eval.gradient(uncertain[static_cast<std::size_t>(j)]);
        rec.gradient = std::move(grad);
        records.push_back(std::move(rec));
    }

    TopoUqResult result;
    result.q = doe.q;
    result.q_a = doe.q_a;
    result.model = fit_sensitivity_enhanced(basis, records, doe.weights);

    const auto [mean, variance] = analytic_moments(result.model, basis);
    result.summary.mean = mean;
    result.summary.variance = variance;
    result.summary.sobol_first_order = sobol_first_order(result.model, basis);

    McReference local_mc;
    const McReference* mc = shared_mc;
    if (!mc) {
        local_mc = run_mc_reference(problem, structure, options.sd, options.mc_samples,
                                    options.seed + 0x9e3779b9ull);
        mc = &local_mc;
    }
    result.mc_mean = mc->mean;
    result.mc_sd = mc->sd;

    result.surrogate_values = predict(basis, result.model, mc->points);
    result.summary.ks_distance = ks_distance(
        std::span<const double>(result.surrogate_values.data(),
                                static_cast<std::size_t>(result.surrogate_values.size())),
        std::span<const double>(mc->values.data(), static_cast<std::size_t>(mc->values.size())));

    const Eigen::VectorXd mc_shares = mc_sensitivity_heatmap(mc->gradients);
    result.sobol_heatmap.setZero(problem.element_count());
    result.mc_heatmap.setZero(problem.element_count());
    for (int j = 0; j < n_u; ++j) {
        result.sobol_heatmap(uncertain[static_cast<std::size_t>(j)]) =
            result.summary.sobol_first_order(j);
        result.mc_heatmap(uncertain[static_cast<std::size_t>(j)]) = mc_shares(j);
    }
    return result;
}

nlohmann::json TopOptConfig::to_json() const {
    return {{"nelx", nelx},
            {"nely", nely},
            {"volfrac", volfrac},
            {"penal", penal},
            {"rmin", rmin},
            {"E0", E0},
            {"Emin", Emin},
            {"nu", nu},
            {"max_iterations", max_iterations},
            {"change_tol", change_tol},
            {"gray_threshold", gray_threshold}};
}

TopOptConfig TopOptConfig::from_json(const nlohmann::json& j) {
    TopOptConfig c;
    c.nelx = j.value("nelx", c.nelx);
    c.nely = j.value("nely", c.nely);
    c.volfrac = j.value("volfrac", c.volfrac);
    c.penal = j.value("penal", c.penal);
    c.rmin = j.value("rmin", c.rmin);
    c.E0 = j.value("E0", c.E0);
    c.Emin = j.value("Emin", c.Emin);
    c.nu = j.value("nu", c.nu);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.change_tol = j.value("change_tol", c.change_tol);
    c.gray_threshold = j.value("gray_threshold", c.gray_threshold);
    c.validate();
    return c;
}

} // namespace searpc
