#include "modal/datagen.hpp"

#include <cmath>

#include "json.hpp"
#include "modal/rng.hpp"

namespace modal {

namespace {

constexpr double kPi = 3.14159265358979323846;

LabeledDataset make_dataset(std::size_t dim, std::size_t k, std::string provenance) {
    LabeledDataset d;
    d.dim = dim;
    d.k = k;
    d.provenance = std::move(provenance);
    return d;
}

void push_point(LabeledDataset& d, const Vec& x, int label) {
    d.points.insert(d.points.end(), x.begin(), x.end());
    d.labels.push_back(label);
    d.n += 1;
}

}  // namespace

std::vector<Vec> four_mode_centers(double a) {
    return {{a, a}, {-a, a}, {-a, -a}, {a, -a}};
}

LabeledDataset gen_four_mode(const FourModeConfig& cfg) {
    require(cfg.n_per_mode > 0, "gen_four_mode: n_per_mode must be positive");
    require(cfg.std_dev >= 0.0, "gen_four_mode: std_dev must be >= 0");

    nlohmann::json prov = {{"kind", "four_mode"},
                           {"n_per_mode", cfg.n_per_mode},
                           {"center", cfg.center},
                           {"std_dev", cfg.std_dev},
                           {"seed", cfg.seed}};
    LabeledDataset d = make_dataset(2, 4, prov.dump());
    const std::vector<Vec> centers = four_mode_centers(cfg.center);

    Rng rng(cfg.seed);
    for (int label = 0; label < 4; ++label) {
        for (std::size_t i = 0; i < cfg.n_per_mode; ++i) {
            Vec x(2);
            for (std::size_t j = 0; j < 2; ++j) {
                x[j] = centers[static_cast<std::size_t>(label)][j] +
                       cfg.std_dev * rng.normal();
            }
            push_point(d, x, label);
        }
    }
    return d;
}

std::vector<Vec> ring_mode_centers(std::size_t k, double radius) {
    std::vector<Vec> centers(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(k);
        centers[i] = {radius * std::cos(a), radius * std::sin(a)};
    }
    return centers;
}

LabeledDataset gen_ring_modes(const RingModesConfig& cfg) {
    require(cfg.k >= 1, "gen_ring_modes: k must be >= 1");
    require(cfg.n_per_mode > 0, "gen_ring_modes: n_per_mode must be positive");
    require(cfg.std_dev >= 0.0, "gen_ring_modes: std_dev must be >= 0");
    require(cfg.radius > 0.0, "gen_ring_modes: radius must be positive");

    nlohmann::json prov = {{"kind", "ring_modes"},
                           {"k", cfg.k},
                           {"n_per_mode", cfg.n_per_mode},
                           {"radius", cfg.radius},
                           {"std_dev", cfg.std_dev},
                           {"seed", cfg.seed}};
    LabeledDataset d = make_dataset(2, cfg.k, prov.dump());
    const std::vector<Vec> centers = ring_mode_centers(cfg.k, cfg.radius);

    Rng rng(cfg.seed);
    for (std::size_t label = 0; label < cfg.k; ++label) {
        for (std::size_t i = 0; i < cfg.n_per_mode; ++i) {
            Vec x(2);
            for (std::size_t j = 0; j < 2; ++j) {
                x[j] = centers[label][j] + cfg.std_dev * rng.normal();
            }
            push_point(d, x, static_cast<int>(label));
        }
    }
    return d;
}

std::vector<Vec> maze_lite_waypoints(std::size_t layout, std::size_t n_layouts) {
    require(n_layouts >= 1, "maze_lite_waypoints: n_layouts must be >= 1");
    require(layout < n_layouts, "maze_lite_waypoints: layout out of range");
    // Dog-leg route: start and goal on opposite sides of the arena center,
    // with a perpendicular detour waypoint in between.
    const double cx = 5.0, cy = 5.0, radius = 4.0;
    const std::size_t slots = n_layouts < 3 ? 3 : n_layouts;
    const double a = 2.0 * kPi * static_cast<double>(layout) / static_cast<double>(slots);
    const double ux = std::cos(a), uy = std::sin(a);
    return {{cx - radius * ux, cy - radius * uy},
            {cx - 2.0 * uy, cy + 2.0 * ux},
            {cx + radius * ux, cy + radius * uy}};
}

LabeledDataset gen_maze_lite(const MazeLiteConfig& cfg) {
    require(cfg.n_layouts >= 1, "gen_maze_lite: n_layouts must be >= 1");
    require(cfg.horizon >= 2, "gen_maze_lite: horizon must be >= 2");
    require(cfg.n_per_layout > 0, "gen_maze_lite: n_per_layout must be positive");
    require(cfg.noise_std >= 0.0, "gen_maze_lite: noise_std must be >= 0");

    nlohmann::json prov = {{"kind", "maze_lite"},
                           {"n_layouts", cfg.n_layouts},
                           {"horizon", cfg.horizon},
                           {"n_per_layout", cfg.n_per_layout},
                           {"noise_std", cfg.noise_std},
                           {"seed", cfg.seed}};
    LabeledDataset d = make_dataset(2 * cfg.horizon, cfg.n_layouts, prov.dump());

    Rng rng(cfg.seed);
    for (std::size_t layout = 0; layout < cfg.n_layouts; ++layout) {
        const std::vector<Vec> wps = maze_lite_waypoints(layout, cfg.n_layouts);

        // Arclength-parameterized positions along the piecewise-linear route.
        std::vector<double> seg_len(wps.size() - 1);
        double total = 0.0;
        for (std::size_t s = 0; s + 1 < wps.size(); ++s) {
            seg_len[s] = distance(wps[s], wps[s + 1]);
            total += seg_len[s];
        }
        Vec base(2 * cfg.horizon);
        for (std::size_t p = 0; p < cfg.horizon; ++p) {
            const double want = total * static_cast<double>(p) /
                                static_cast<double>(cfg.horizon - 1);
            double acc = 0.0;
            std::size_t s = 0;
            while (s + 1 < seg_len.size() && acc + seg_len[s] < want) {
                acc += seg_len[s];
                ++s;
            }
            const double frac = seg_len[s] > 0.0 ? (want - acc) / seg_len[s] : 0.0;
            const double f = frac < 0.0 ? 0.0 : (frac > 1.0 ? 1.0 : frac);
            base[2 * p] = wps[s][0] + f * (wps[s + 1][0] - wps[s][0]);
            base[2 * p + 1] = wps[s][1] + f * (wps[s + 1][1] - wps[s][1]);
        }

        for (std::size_t i = 0; i < cfg.n_per_layout; ++i) {
            Vec x = base;
            if (cfg.noise_std > 0.0) {
                for (double& v : x) v += cfg.noise_std * rng.normal();
            }
            push_point(d, x, static_cast<int>(layout));
        }
    }
    return d;
}

}  // namespace modal
