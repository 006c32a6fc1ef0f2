#include "modal/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "modal/diffusion.hpp"

namespace modal {

ModeGeometry geometry_from_dataset(const LabeledDataset& data) {
    require(data.n > 0 && data.k > 0, "geometry_from_dataset: empty dataset");
    const std::size_t k = data.k;
    const std::size_t dim = data.dim;

    ModeGeometry geo;
    geo.centers.assign(k, Vec(dim, 0.0));
    geo.sigmas.assign(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < data.n; ++i) {
        const int label = data.labels[i];
        require(label >= 0 && static_cast<std::size_t>(label) < k,
                "geometry_from_dataset: label out of range");
        counts[static_cast<std::size_t>(label)] += 1;
        const auto row = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            geo.centers[static_cast<std::size_t>(label)][j] += row[j];
        }
    }
    for (std::size_t li = 0; li < k; ++li) {
        require(counts[li] > 0, "geometry_from_dataset: label with no points");
        for (double& c : geo.centers[li]) c /= static_cast<double>(counts[li]);
    }
    std::vector<double> sq(k, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        const std::size_t li = static_cast<std::size_t>(data.labels[i]);
        sq[li] += squared_distance(data.row(i), geo.centers[li]);
    }
    double pooled = 0.0;
    for (std::size_t li = 0; li < k; ++li) {
        const double var =
            sq[li] / (static_cast<double>(counts[li]) * static_cast<double>(dim));
        geo.sigmas[li] = std::sqrt(var);
        pooled += var * static_cast<double>(counts[li]);
    }
    geo.data_std = std::sqrt(pooled / static_cast<double>(data.n));
    return geo;
}

int hard_classify(std::span<const double> x, const std::vector<Vec>& centers,
                  std::span<const double> sigmas) {
    require(!centers.empty(), "hard_classify: no centers");
    require(sigmas.size() == centers.size(), "hard_classify: sigma count mismatch");
    int best = 0;
    double best_scaled = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        require(centers[i].size() == x.size(), "hard_classify: center dim mismatch");
        require(sigmas[i] >= 0.0, "hard_classify: sigma must be >= 0");
        const double dist = distance(x, centers[i]);
        double scaled;
        if (sigmas[i] == 0.0) {
            scaled = dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            scaled = dist / sigmas[i];
        }
        if (scaled < best_scaled) {  // strict: ties keep the lowest index
            best_scaled = scaled;
            best = static_cast<int>(i);
        }
    }
    return best;
}

AccuracyReport mode_accuracy(const std::vector<Vec>& samples,
                             const std::vector<int>& requested,
                             const std::vector<Vec>& centers,
                             std::span<const double> sigmas) {
    require(samples.size() == requested.size(), "mode_accuracy: size mismatch");
    const std::size_t k = centers.size();
    AccuracyReport rep;
    rep.acc_per_mode.assign(k, 0.0);
    rep.n_per_mode.assign(k, 0);
    std::vector<std::size_t> hits(k, 0);
    std::size_t total = 0, total_hits = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (requested[i] < 0) continue;
        require(static_cast<std::size_t>(requested[i]) < k,
                "mode_accuracy: requested label out of range");
        const std::size_t want = static_cast<std::size_t>(requested[i]);
        rep.n_per_mode[want] += 1;
        total += 1;
        if (hard_classify(samples[i], centers, sigmas) == requested[i]) {
            hits[want] += 1;
            total_hits += 1;
        }
    }
    for (std::size_t m = 0; m < k; ++m) {
        rep.acc_per_mode[m] = rep.n_per_mode[m] == 0
                                  ? 0.0
                                  : static_cast<double>(hits[m]) /
                                        static_cast<double>(rep.n_per_mode[m]);
    }
    rep.acc = total == 0 ? 0.0
                         : static_cast<double>(total_hits) / static_cast<double>(total);
    return rep;
}

double spurious_rate(const std::vector<Vec>& samples, const std::vector<Vec>& centers,
                     double rho, double data_std) {
    require(!centers.empty(), "spurious_rate: no centers");
    require(rho > 0.0, "spurious_rate: rho must be positive");
    require(data_std >= 0.0, "spurious_rate: data_std must be >= 0");
    if (samples.empty()) return 0.0;
    const double threshold = rho * data_std;
    std::size_t spurious = 0;
    for (const Vec& x : samples) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (const Vec& c : centers) min_dist = std::min(min_dist, distance(x, c));
        if (min_dist > threshold) spurious += 1;
    }
    return static_cast<double>(spurious) / static_cast<double>(samples.size());
}

double energy_distance(std::span<const Vec> a, std::span<const Vec> b) {
    require(!a.empty() && !b.empty(), "energy_distance: empty sample set");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double cross = 0.0;
    for (const Vec& x : a) {
        for (const Vec& y : b) cross += distance(x, y);
    }
    double within_a = 0.0;
    for (const Vec& x : a) {
        for (const Vec& y : a) within_a += distance(x, y);
    }
    double within_b = 0.0;
    for (const Vec& x : b) {
        for (const Vec& y : b) within_b += distance(x, y);
    }
    return 2.0 * cross / (na * nb) - within_a / (na * na) - within_b / (nb * nb);
}

TerminalMomentReport terminal_moment_check(const LabeledDataset& data,
                                           const MixturePrior& prior,
                                           const NoiseSchedule& s,
                                           std::size_t n_chains, Rng& rng) {
    require(n_chains >= 2, "terminal_moment_check: need >= 2 chains");
    require(prior.dim() == data.dim, "terminal_moment_check: dim mismatch");
    require(prior.k() == 1 || prior.k() == data.k,
            "terminal_moment_check: prior/label count mismatch");

    const std::size_t dim = data.dim;
    std::vector<std::vector<std::size_t>> by_label(data.k);
    for (std::size_t i = 0; i < data.n; ++i) {
        by_label[static_cast<std::size_t>(data.labels[i])].push_back(i);
    }

    TerminalMomentReport report;
    report.pass = true;
    for (std::size_t li = 0; li < data.k; ++li) {
        require(!by_label[li].empty(), "terminal_moment_check: label with no points");
        const std::size_t comp = noising_component(prior, static_cast<int>(li));
        const PriorComponent& c = prior.components[comp];
        const ModeParams mode{c.mean, c.sigma};

        Vec mean(dim, 0.0);
        Vec sq(dim, 0.0);
        Vec x, eps(dim);
        double max_dev = 0.0;  // sigma = 0: worst per-chain distance from mu
        for (std::size_t chain = 0; chain < n_chains; ++chain) {
            const auto row = data.row(by_label[li][chain % by_label[li].size()]);
            x.assign(row.begin(), row.end());
            for (int t = 1; t <= s.T; ++t) {
                for (double& e : eps) e = rng.normal();
                x = forward_step(x, t, mode, s, eps);
            }
            for (std::size_t j = 0; j < dim; ++j) {
                mean[j] += x[j];
                sq[j] += x[j] * x[j];
                if (c.sigma == 0.0) {
                    max_dev = std::max(max_dev, std::abs(x[j] - c.mean[j]));
                }
            }
        }
        LabelMomentCheck check;
        check.label = static_cast<int>(li);
        check.mean_tolerance = 4.0 * c.sigma / std::sqrt(static_cast<double>(n_chains));
        double pooled_var = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double m = mean[j] / static_cast<double>(n_chains);
            const double var = sq[j] / static_cast<double>(n_chains) - m * m;
            check.max_mean_error = std::max(check.max_mean_error,
                                            std::abs(m - c.mean[j]));
            pooled_var += var;
        }
        pooled_var /= static_cast<double>(dim);
        if (c.sigma > 0.0) {
            check.var_rel_error =
                std::abs(pooled_var - c.sigma * c.sigma) / (c.sigma * c.sigma);
        } else {
            // sigma = 0: every chain must land on mu; deviation replaces both
            // moment errors since the empirical variance only carries rounding.
            check.max_mean_error = max_dev;
            check.var_rel_error = 0.0;
            check.mean_tolerance = 1e-9;
        }
        check.pass = check.max_mean_error <= check.mean_tolerance &&
                     check.var_rel_error <= check.var_tolerance;
        report.labels.push_back(check);
        if (!check.pass) report.pass = false;
    }
    return report;
}

EvalReport evaluate_samples(const std::vector<Vec>& samples,
                            const std::vector<int>& requested,
                            const LabeledDataset& data, double rho) {
    require(samples.size() == requested.size(), "evaluate_samples: size mismatch");
    require(!samples.empty(), "evaluate_samples: no samples");
    const ModeGeometry geo = geometry_from_dataset(data);
    const std::size_t k = data.k;

    EvalReport rep;
    rep.n_samples = samples.size();
    AccuracyReport acc = mode_accuracy(samples, requested, geo.centers, geo.sigmas);
    rep.acc = acc.acc;
    rep.acc_per_mode = std::move(acc.acc_per_mode);
    rep.n_per_mode = std::move(acc.n_per_mode);
    rep.spurious = spurious_rate(samples, geo.centers, rho, geo.data_std);

    // Group samples per mode (requested label, else classified label).
    std::vector<std::vector<Vec>> grouped(k);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        int g = requested[i];
        if (g < 0) g = hard_classify(samples[i], geo.centers, geo.sigmas);
        grouped[static_cast<std::size_t>(g)].push_back(samples[i]);
    }
    std::vector<std::vector<Vec>> data_by_label(k);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto row = data.row(i);
        data_by_label[static_cast<std::size_t>(data.labels[i])].emplace_back(
            row.begin(), row.end());
    }
    rep.per_mode_energy.assign(k, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
        if (!grouped[m].empty() && !data_by_label[m].empty()) {
            rep.per_mode_energy[m] = energy_distance(grouped[m], data_by_label[m]);
        }
    }
    return rep;
}

}  // namespace modal
