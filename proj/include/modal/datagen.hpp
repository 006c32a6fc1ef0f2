#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modal/common.hpp"

namespace modal {

// Row-major point storage; labels[i] in [0, k).
struct LabeledDataset {
    std::size_t dim = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<double> points;  // n * dim
    std::vector<int> labels;     // n
    std::string provenance;      // JSON: generator config + seed

    std::span<const double> row(std::size_t i) const {
        return {points.data() + i * dim, dim};
    }
};

struct FourModeConfig {
    std::size_t n_per_mode = 1000;
    double center = 2.0;   // modes at (+-center, +-center)
    double std_dev = 0.3;
    std::uint64_t seed = 0;
};

struct RingModesConfig {
    std::size_t k = 8;
    std::size_t n_per_mode = 500;
    double radius = 4.0;
    double std_dev = 0.2;
    std::uint64_t seed = 0;
};

struct MazeLiteConfig {
    std::size_t n_layouts = 3;
    std::size_t horizon = 48;     // waypoints per trajectory; dim = 2 * horizon
    std::size_t n_per_layout = 200;
    double noise_std = 0.05;
    std::uint64_t seed = 0;
};

// Quadrant centers in counterclockwise order starting from (+a, +a); label i
// is the generating cluster.
std::vector<Vec> four_mode_centers(double a);
LabeledDataset gen_four_mode(const FourModeConfig& cfg);

// k isotropic clusters at radius r, angles 2*pi*i/k; label = cluster index.
std::vector<Vec> ring_mode_centers(std::size_t k, double radius);
LabeledDataset gen_ring_modes(const RingModesConfig& cfg);

// Flattened 2D trajectories through per-layout waypoint routes; label = layout.
// Each point is (x_1, y_1, ..., x_horizon, y_horizon); position 0 is the start
// and position horizon-1 the goal, exact when noise_std = 0.
std::vector<Vec> maze_lite_waypoints(std::size_t layout, std::size_t n_layouts);
LabeledDataset gen_maze_lite(const MazeLiteConfig& cfg);

}  // namespace modal
