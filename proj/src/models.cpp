#include "searpc/models.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "searpc/errors.hpp"

namespace searpc {

Model cubic_model(int dims) {
    if (dims < 1)
        throw InvalidArgument("model dimension must be >= 1");
    Model m;
    m.name = "cubic";
    m.dims = dims;
    m.evaluate = [dims](const Eigen::VectorXd& xi) {
        if (xi.size() != dims)
            throw InvalidArgument("point has wrong dimension");
        ModelOutput out;
        out.value = 1.0 + xi(0) + xi.array().cube().sum() / static_cast<double>(dims);
        out.gradient = 3.0 * xi.array().square() / static_cast<double>(dims);
        out.gradient(0) += 1.0;
        return out;
    };
    return m;
}

Model sinusoidal_model(int dims) {
    if (dims < 1)
        throw InvalidArgument("model dimension must be >= 1");
    Model m;
    m.name = "sinusoidal";
    m.dims = dims;
    m.evaluate = [dims](const Eigen::VectorXd& xi) {
        if (xi.size() != dims)
            throw InvalidArgument("point has wrong dimension");
        ModelOutput out;
        out.value = (xi.array() - 0.5).sin().sum();
        out.gradient = (xi.array() - 0.5).cos();
        return out;
    };
    return m;
}

Model builtin_model(const std::string& name, int dims) {
    if (name == "cubic")
        return cubic_model(dims);
    if (name == "sinusoidal")
        return sinusoidal_model(dims);
    throw InvalidArgument("unknown model '" + name + "' (available: cubic, sinusoidal)");
}

void DistributionSpec::validate() const {
    switch (kind) {
    case DistributionKind::Normal:
        if (!(sd > 0.0))
            throw InvalidArgument("normal sd must be positive");
        break;
    case DistributionKind::Uniform:
        if (!(upper > lower))
            throw InvalidArgument("uniform upper bound must exceed lower bound");
        break;
    case DistributionKind::GaussianMixture: {
        if (components.empty())
            throw InvalidArgument("mixture needs at least one component");
        if (!weights.empty() && weights.size() != components.size())
            throw InvalidArgument("mixture weight count must match component count");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0)
                throw InvalidArgument("mixture weights must be nonnegative");
            total += w;
        }
        if (!weights.empty() && !(total > 0.0))
            throw InvalidArgument("mixture weights must not all be zero");
        for (const auto& [cm, cs] : components) {
            (void)cm;
            if (!(cs > 0.0))
                throw InvalidArgument("mixture component sd must be positive");
        }
        break;
    }
    case DistributionKind::Gev:
        if (!(scale > 0.0))
            throw InvalidArgument("GEV scale must be positive");
        break;
    case DistributionKind::TruncatedNormal:
        if (!(sd > 0.0))
            throw InvalidArgument("truncated normal sd must be positive");
        if (!(upper > lower))
            throw InvalidArgument("truncated normal upper bound must exceed lower bound");
        break;
    }
}

Sampler::Sampler(DistributionSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    spec_.validate();
}

double Sampler::draw() {
    switch (spec_.kind) {
    case DistributionKind::Normal:
        return spec_.mean + spec_.sd * normal_(rng_);
    case DistributionKind::Uniform:
        return spec_.lower + (spec_.upper - spec_.lower) * unit_(rng_);
    case DistributionKind::GaussianMixture: {
        std::size_t pick = 0;
        if (spec_.weights.empty()) {
            pick = static_cast<std::size_t>(rng_() % spec_.components.size());
        } else {
            double total = 0.0;
            for (double w : spec_.weights)
                total += w;
            double u = unit_(rng_) * total;
            while (pick + 1 < spec_.weights.size() && u >= spec_.weights[pick]) {
                u -= spec_.weights[pick];
                ++pick;
            }
        }
        const auto& [cm, cs] = spec_.components[pick];
        return cm + cs * normal_(rng_);
    }
    case DistributionKind::Gev: {
        // Inverse CDF; the shape-zero branch is the exact Gumbel limit.
        const double u = std::max(unit_(rng_), 1e-300);
        if (spec_.shape == 0.0)
            return spec_.location - spec_.scale * std::log(-std::log(u));
        return spec_.location +
               spec_.scale * (std::pow(-std::log(u), -spec_.shape) - 1.0) / spec_.shape;
    }
    case DistributionKind::TruncatedNormal: {
        const double alpha = (spec_.lower - spec_.mean) / spec_.sd;
        const double beta = (spec_.upper - spec_.mean) / spec_.sd;
        const double acceptance = normal_cdf(beta) - normal_cdf(alpha);
        if (acceptance < 0.01) {
            // Rejection would stall; invert the truncated CDF instead.
            const double u = normal_cdf(alpha) + unit_(rng_) * acceptance;
            const double z = normal_quantile(std::min(std::max(u, 1e-300), 1.0 - 1e-16));
            return spec_.mean + spec_.sd * std::min(std::max(z, alpha), beta);
        }
        for (;;) {
            const double x = spec_.mean + spec_.sd * normal_(rng_);
            if (x >= spec_.lower && x <= spec_.upper)
                return x;
        }
    }
    }
    throw InvalidArgument("unhandled distribution kind");
}

Eigen::VectorXd Sampler::draw_many(Eigen::Index n) {
    if (n < 1)
        throw InvalidArgument("sample count must be >= 1");
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out(i) = draw();
    return out;
}

Eigen::MatrixXd sample_matrix(const std::vector<DistributionSpec>& dists, Eigen::Index n,
                              std::uint64_t seed) {
    if (dists.empty())
        throw InvalidArgument("need at least one distribution");
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(dists.size()));
    for (std::size_t d = 0; d < dists.size(); ++d) {
        Sampler sampler(dists[d], seed + d);
        out.col(static_cast<Eigen::Index>(d)) = sampler.draw_many(n);
    }
    return out;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw InvalidArgument("quantile level must lie strictly in (0,1)");
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Newton step against the exact CDF.
    const double e = normal_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf > 0.0)
        x -= e / pdf;
    return x;
}

MomentSet truncated_normal_moments(double m, double s, double a, double b, int order) {
    if (!(s > 0.0) || !(b > a))
        throw InvalidArgument("invalid truncated normal parameters");
    const double alpha = (a - m) / s;
    const double beta = (b - m) / s;
    const double z = normal_cdf(beta) - normal_cdf(alpha);
    if (!(z > 0.0))
        throw NumericError("truncation interval carries no probability mass");

    const double phi_a = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
    const double phi_b = std::exp(-0.5 * beta * beta) / std::sqrt(2.0 * M_PI);

    // Standardized moments via M_k = (k-1) M_{k-2} + (a^{k-1} phi(a) - b^{k-1} phi(b)) / Z.
    const int n = 2 * order + 1;
    std::vector<double> std_m(static_cast<std::size_t>(n));
    std_m[0] = 1.0;
    if (n > 1)
        std_m[1] = (phi_a - phi_b) / z;
    for (int k = 2; k < n; ++k)
        std_m[static_cast<std::size_t>(k)] =
            (k - 1) * std_m[static_cast<std::size_t>(k - 2)] +
            (std::pow(alpha, k - 1) * phi_a - std::pow(beta, k - 1) * phi_b) / z;

    // X = m + s T: binomial transform back to raw moments.
    std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            acc += binom * std::pow(m, k - j) * std::pow(s, j) * std_m[static_cast<std::size_t>(j)];
            binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
        }
        mu[static_cast<std::size_t>(k)] = acc;
    }
    return MomentSet(std::move(mu), order);
}

std::pair<double, double> truncated_normal_mean_sd(double m, double s, double a, double b) {
    const MomentSet mom = truncated_normal_moments(m, s, a, b, 1);
    const double mean = mom[1];
    const double var = mom[2] - mean * mean;
    return {mean, std::sqrt(std::max(var, 0.0))};
}

DistributionSpec DistributionSpec::named(const std::string& name) {
    DistributionSpec s;
    if (name == "multimodal" || name == "gaussian-mixture") {
        s.kind = DistributionKind::GaussianMixture;
        s.components = {{-1.0, 0.25}, {0.75, 0.25}};
        s.weights = {0.5, 0.5};
    } else if (name == "gev") {
        s.kind = DistributionKind::Gev;
        s.location = 0.0;
        s.scale = 0.25;
        s.shape = 0.0;
    } else if (name == "normal") {
        s.kind = DistributionKind::Normal;
    } else if (name == "uniform") {
        s.kind = DistributionKind::Uniform;
        s.lower = -1.0;
        s.upper = 1.0;
    } else {
        throw InvalidArgument("unknown distribution '" + name +
                              "' (available: multimodal, gev, normal, uniform)");
    }
    return s;
}

namespace {

std::string kind_name(DistributionKind k) {
    switch (k) {
    case DistributionKind::Normal: return "normal";
    case DistributionKind::Uniform: return "uniform";
    case DistributionKind::GaussianMixture: return "gaussian-mixture";
    case DistributionKind::Gev: return "gev";
    case DistributionKind::TruncatedNormal: return "truncated-normal";
    }
    return "unknown";
}

DistributionKind kind_from_name(const std::string& name) {
    if (name == "normal") return DistributionKind::Normal;
    if (name == "uniform") return DistributionKind::Uniform;
    if (name == "gaussian-mixture") return DistributionKind::GaussianMixture;
    if (name == "gev") return DistributionKind::Gev;
    if (name == "truncated-normal") return DistributionKind::TruncatedNormal;
    throw InvalidArgument("unknown distribution kind '" + name + "'");
}

} // namespace

nlohmann::json DistributionSpec::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_name(kind);
    switch (kind) {
    case DistributionKind::Normal:
        j["mean"] = mean;
        j["sd"] = sd;
        break;
    case DistributionKind::Uniform:
        j["lower"] = lower;
        j["upper"] = upper;
        break;
    case DistributionKind::GaussianMixture: {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& [cm, cs] : components)
            comps.push_back({{"mean", cm}, {"sd", cs}});
        j["components"] = std::move(comps);
        if (!weights.empty())
            j["weights"] = weights;
        break;
    }
    case DistributionKind::Gev:
        j["location"] = location;
        j["scale"] = scale;
        j["shape"] = shape;
        break;
    case DistributionKind::TruncatedNormal:
        j["mean"] = mean;
        j["sd"] = sd;
        j["lower"] = lower;
        j["upper"] = upper;
        break;
    }
    return j;
}

DistributionSpec DistributionSpec::from_json(const nlohmann::json& j) {
    DistributionSpec s;
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    switch (s.kind) {
    case DistributionKind::Normal:
        s.mean = j.value("mean", 0.0);
        s.sd = j.value("sd", 1.0);
        break;
    case DistributionKind::Uniform:
        s.lower = j.at("lower").get<double>();
        s.upper = j.at("upper").get<double>();
        break;
    case DistributionKind::GaussianMixture:
        for (const auto& c : j.at("components"))
            s.components.emplace_back(c.at("mean").get<double>(), c.at("sd").get<double>());
        if (j.contains("weights"))
            s.weights = j.at("weights").get<std::vector<double>>();
        break;
    case DistributionKind::Gev:
        s.location = j.value("location", 0.0);
        s.scale = j.at("scale").get<double>();
        s.shape = j.value("shape", 0.0);
        break;
    case DistributionKind::TruncatedNormal:
        s.mean = j.at("mean").get<double>();
        s.sd = j.at("sd").get<double>();
        s.lower = j.value("lower", 0.0);
        s.upper = j.value("upper", 1.0);
        break;
    }
    s.validate();
    return s;
}

} // namespace searpc
