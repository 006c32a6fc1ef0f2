#include "modal/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modal {

std::string to_string(PriorSource src) {
    switch (src) {
        case PriorSource::simplex: return "simplex";
        case PriorSource::empirical: return "empirical";
        case PriorSource::manual: return "manual";
    }
    throw std::invalid_argument("unknown prior source");
}

PriorSource prior_source_from_string(const std::string& s) {
    if (s == "simplex") return PriorSource::simplex;
    if (s == "empirical") return PriorSource::empirical;
    if (s == "manual") return PriorSource::manual;
    throw std::invalid_argument("unknown prior source: " + s);
}

void validate(const MixturePrior& prior) {
    require(!prior.components.empty(), "prior: needs at least one component");
    const std::size_t dim = prior.components[0].mean.size();
    require(dim > 0, "prior: zero-dimensional mean");
    double wsum = 0.0;
    for (const PriorComponent& c : prior.components) {
        require(c.mean.size() == dim, "prior: component dims disagree");
        require(c.sigma >= 0.0, "prior: sigma must be >= 0");
        require(c.weight >= 0.0, "prior: weights must be >= 0");
        wsum += c.weight;
    }
    require(std::abs(wsum - 1.0) <= 1e-12, "prior: weights must sum to 1");
}

std::vector<Vec> simplex_means(const PriorLayoutConfig& cfg) {
    require(cfg.k >= 1, "simplex_means: k must be >= 1");
    require(cfg.dim >= 1, "simplex_means: dim must be >= 1");
    require(cfg.delta > 0.0, "simplex_means: delta must be positive");
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    const std::size_t dim = static_cast<std::size_t>(cfg.dim);

    if (k == 1) return {Vec(dim, 0.0)};
    require(cfg.k <= cfg.dim, "simplex_means: simplex placement needs k <= dim");

    // w_i = delta * sqrt(k/(k-1)) * (e_i - ones/k), zero-padded past coordinate k.
    const double scale =
        cfg.delta * std::sqrt(static_cast<double>(k) / static_cast<double>(k - 1));
    const double off = 1.0 / static_cast<double>(k);
    std::vector<Vec> means(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            means[i][j] = scale * ((i == j ? 1.0 : 0.0) - off);
        }
    }
    return means;
}

namespace {

constexpr int kGammaMaxIter = 300;
constexpr double kGammaEps = 1e-15;

// Series expansion of P(a, x); converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < kGammaMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("regularized_gamma_p: series did not converge");
}

// Continued fraction for Q(a, x) = 1 - P(a, x); converges fast for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kGammaEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("regularized_gamma_p: continued fraction did not converge");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    require(a > 0.0, "regularized_gamma_p: a must be positive");
    require(x >= 0.0, "regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_quantile(int dof, double c) {
    require(dof >= 1, "chi_square_quantile: dof must be >= 1");
    require(c > 0.0 && c < 1.0, "chi_square_quantile: c must lie in (0, 1)");
    const double a = 0.5 * static_cast<double>(dof);

    // Bracket the root of P(a, x/2) = c, then bisect.
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    int grow = 0;
    while (regularized_gamma_p(a, 0.5 * hi) < c) {
        hi *= 2.0;
        if (++grow > 200) {
            throw std::runtime_error("chi_square_quantile: failed to bracket quantile");
        }
    }
    for (int i = 0; i < 400 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(a, 0.5 * mid) < c) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > 1e-12) {
        throw std::runtime_error("chi_square_quantile: bisection did not converge");
    }
    return 0.5 * (lo + hi);
}

SeparationReport check_separation(const MixturePrior& prior, double confidence) {
    require(prior.k() >= 2, "check_separation: needs >= 2 components");
    require(confidence > 0.0 && confidence < 1.0,
            "check_separation: confidence must lie in (0, 1)");

    SeparationReport rep;
    rep.quantile = chi_square_quantile(static_cast<int>(prior.dim()), confidence);
    rep.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prior.k(); ++i) {
        for (std::size_t j = i + 1; j < prior.k(); ++j) {
            rep.min_distance = std::min(
                rep.min_distance,
                distance(prior.components[i].mean, prior.components[j].mean));
        }
    }
    const double root = std::sqrt(rep.quantile);
    rep.ok = true;
    rep.radii.reserve(prior.k());
    for (const PriorComponent& comp : prior.components) {
        const double radius = comp.sigma * root;
        rep.radii.push_back(radius);
        if (radius > rep.min_distance) rep.ok = false;
    }
    return rep;
}

SimplexPriorResult build_simplex_prior(const PriorLayoutConfig& cfg,
                                       const std::vector<double>& weights,
                                       const std::vector<double>& sigmas) {
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    require(weights.empty() || weights.size() == k,
            "build_simplex_prior: weight count must match k");
    require(sigmas.empty() || sigmas.size() == k,
            "build_simplex_prior: sigma count must match k");

    SimplexPriorResult out;
    out.prior.source = PriorSource::simplex;
    out.prior.delta = cfg.delta;
    std::vector<Vec> means = simplex_means(cfg);
    out.prior.components.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.prior.components[i].mean = std::move(means[i]);
        out.prior.components[i].sigma = sigmas.empty() ? 1.0 : sigmas[i];
        out.prior.components[i].weight =
            weights.empty() ? 1.0 / static_cast<double>(k) : weights[i];
    }
    validate(out.prior);
    if (k >= 2) {
        out.separation = check_separation(out.prior, cfg.confidence);
    } else {
        out.separation.ok = true;
        out.separation.quantile = chi_square_quantile(cfg.dim, cfg.confidence);
        out.separation.min_distance = 0.0;
    }
    return out;
}

MixturePrior ring_prior(std::size_t k, std::size_t dim, double delta, double sigma,
                        double phase) {
    require(k >= 1, "ring_prior: k must be >= 1");
    require(dim >= 2, "ring_prior: dim must be >= 2");
    require(delta > 0.0, "ring_prior: delta must be positive");
    require(sigma >= 0.0, "ring_prior: sigma must be >= 0");

    constexpr double kPi = 3.14159265358979323846;
    MixturePrior prior;
    prior.source = PriorSource::manual;
    prior.delta = delta;
    prior.components.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double a = phase + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(k);
        Vec mean(dim, 0.0);
        mean[0] = delta * std::cos(a);
        mean[1] = delta * std::sin(a);
        prior.components[i] = {std::move(mean), sigma, 1.0 / static_cast<double>(k)};
    }
    validate(prior);
    return prior;
}

MixturePrior standard_prior(std::size_t dim) {
    require(dim >= 1, "standard_prior: dim must be >= 1");
    MixturePrior prior;
    prior.source = PriorSource::manual;
    prior.components.push_back({Vec(dim, 0.0), 1.0, 1.0});
    return prior;
}

EmpiricalPriorResult fit_empirical_prior(const LabeledDataset& data) {
    require(data.k >= 1, "fit_empirical_prior: dataset has no labels");
    require(data.n > 0, "fit_empirical_prior: dataset is empty");

    const std::size_t k = data.k;
    const std::size_t dim = data.dim;
    std::vector<std::size_t> counts(k, 0);
    std::vector<Vec> sums(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < data.n; ++i) {
        const int label = data.labels[i];
        require(label >= 0 && static_cast<std::size_t>(label) < k,
                "fit_empirical_prior: label out of range");
        const std::size_t li = static_cast<std::size_t>(label);
        counts[li] += 1;
        const auto row = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) sums[li][j] += row[j];
    }
    for (std::size_t li = 0; li < k; ++li) {
        require(counts[li] >= 2, "fit_empirical_prior: every label needs >= 2 points");
        for (double& s : sums[li]) s /= static_cast<double>(counts[li]);
    }

    // Population variance per dimension, averaged over dimensions.
    std::vector<Vec> sq(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < data.n; ++i) {
        const std::size_t li = static_cast<std::size_t>(data.labels[i]);
        const auto row = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row[j] - sums[li][j];
            sq[li][j] += d * d;
        }
    }

    EmpiricalPriorResult out;
    out.prior.source = PriorSource::empirical;
    out.prior.components.resize(k);
    out.degenerate.resize(k, false);
    for (std::size_t li = 0; li < k; ++li) {
        double var = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            var += sq[li][j] / static_cast<double>(counts[li]);
        }
        var /= static_cast<double>(dim);
        out.prior.components[li].mean = sums[li];
        out.prior.components[li].sigma = std::sqrt(var);
        out.prior.components[li].weight =
            static_cast<double>(counts[li]) / static_cast<double>(data.n);
        out.degenerate[li] = out.prior.components[li].sigma == 0.0;
    }
    validate(out.prior);
    return out;
}

PriorDraw sample_prior(const MixturePrior& prior, const PriorSelector& sel, Rng& rng) {
    require(!prior.components.empty(), "sample_prior: empty prior");
    PriorDraw draw;
    if (sel.kind == PriorSelector::Kind::component) {
        require(sel.index < prior.k(), "sample_prior: component index out of range");
        draw.component = sel.index;
    } else {
        std::vector<double> weights(prior.k());
        for (std::size_t i = 0; i < prior.k(); ++i) weights[i] = prior.components[i].weight;
        draw.component = rng.categorical(weights);
    }
    const PriorComponent& comp = prior.components[draw.component];
    draw.x = comp.mean;
    if (comp.sigma > 0.0) {
        for (double& v : draw.x) v += comp.sigma * rng.normal();
    }
    return draw;
}

}  // namespace modal
