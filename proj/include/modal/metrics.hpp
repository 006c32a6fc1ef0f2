#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modal/common.hpp"
#include "modal/datagen.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/schedule.hpp"

namespace modal {

// Per-mode ground truth derived from a labeled dataset: label means, per-mode
// sigmas (sqrt of mean per-dim population variance), and the pooled data_std.
struct ModeGeometry {
    std::vector<Vec> centers;
    std::vector<double> sigmas;
    double data_std = 0.0;
};

ModeGeometry geometry_from_dataset(const LabeledDataset& data);

// Nearest center under per-mode scaled distance |x - c_i| / sigma_i.
// sigma_i = 0: distance is 0 at the center, +inf elsewhere. Ties resolve to
// the lowest index.
int hard_classify(std::span<const double> x, const std::vector<Vec>& centers,
                  std::span<const double> sigmas);

struct AccuracyReport {
    double acc = 0.0;                     // request-count weighted mean
    std::vector<double> acc_per_mode;
    std::vector<std::size_t> n_per_mode;  // requested counts
};

// Fraction of samples classified as their requested mode. Samples with a
// negative requested label are skipped.
AccuracyReport mode_accuracy(const std::vector<Vec>& samples,
                             const std::vector<int>& requested,
                             const std::vector<Vec>& centers,
                             std::span<const double> sigmas);

// Fraction of samples farther than rho * data_std from every center.
double spurious_rate(const std::vector<Vec>& samples, const std::vector<Vec>& centers,
                     double rho, double data_std);

// Energy distance V-statistic between samples a and b:
//   2 E|A - B| - E|A - A'| - E|B - B'|
// computed with fixed-order summation (deterministic).
double energy_distance(std::span<const Vec> a, std::span<const Vec> b);

struct LabelMomentCheck {
    int label = 0;
    double max_mean_error = 0.0;   // max per-coordinate |empirical - mu_L|;
                                   // sigma_L = 0: worst per-chain deviation
    double mean_tolerance = 0.0;   // 4 * sigma_L / sqrt(n_chains); 1e-9 at sigma_L = 0
    double var_rel_error = 0.0;    // pooled per-dim variance vs sigma_L^2
    double var_tolerance = 0.02;
    bool pass = false;
};

struct TerminalMomentReport {
    std::vector<LabelMomentCheck> labels;
    bool pass = false;
};

// Simulates the forward process to t = T (n_chains per label, starting from
// that label's points round-robin) and checks the empirical moments against
// the coupled component's N(mu_L, sigma_L^2 I).
TerminalMomentReport terminal_moment_check(const LabeledDataset& data,
                                           const MixturePrior& prior,
                                           const NoiseSchedule& s,
                                           std::size_t n_chains, Rng& rng);

struct EvalReport {
    double acc = 0.0;
    std::vector<double> acc_per_mode;
    std::vector<std::size_t> n_per_mode;
    double spurious = 0.0;
    std::vector<double> per_mode_energy;  // samples of mode i vs data of label i
    std::size_t n_samples = 0;
};

// Full sample evaluation against dataset-derived geometry. Per-mode grouping
// uses the requested label when present, else the classified label.
EvalReport evaluate_samples(const std::vector<Vec>& samples,
                            const std::vector<int>& requested,
                            const LabeledDataset& data, double rho = 3.0);

}  // namespace modal
