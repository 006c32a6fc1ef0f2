#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modal/common.hpp"
#include "modal/datagen.hpp"
#include "modal/rng.hpp"

namespace modal {

class Rng;

enum class PriorSource { simplex, empirical, manual };

std::string to_string(PriorSource src);
PriorSource prior_source_from_string(const std::string& s);

struct PriorComponent {
    Vec mean;
    double sigma = 1.0;
    double weight = 0.0;
};

// Gaussian mixture whose components are coupled 1:1 to data modes.
struct MixturePrior {
    std::vector<PriorComponent> components;
    PriorSource source = PriorSource::manual;
    double delta = 0.0;  // placement scale for simplex/ring layouts, else 0

    std::size_t k() const { return components.size(); }
    std::size_t dim() const { return components.empty() ? 0 : components[0].mean.size(); }
};

// Throws if weights do not sum to 1 (1e-12), any sigma < 0, or dims disagree.
void validate(const MixturePrior& prior);

struct PriorLayoutConfig {
    int k = 2;
    int dim = 2;
    double delta = 1.0;
    double confidence = 0.95;
};

// Scaled zero-mean simplex vertices, zero-padded to dim:
//   w_i = delta * sqrt(k/(k-1)) * (e_i - 1/k)
// Every |w_i| = delta and every pairwise distance = delta * sqrt(2 + 2/(k-1)).
// Requires 2 <= k <= dim (k = 1 gives the single zero mean).
std::vector<Vec> simplex_means(const PriorLayoutConfig& cfg);

// Quantile of the chi-square distribution with dof degrees of freedom at
// cumulative probability c, by bisection on the regularized lower incomplete
// gamma function. Absolute bracket tolerance 1e-12.
double chi_square_quantile(int dof, double c);

// Regularized lower incomplete gamma P(a, x); series/continued-fraction
// evaluation, throws on non-convergence.
double regularized_gamma_p(double a, double x);

struct SeparationReport {
    bool ok = false;
    double quantile = 0.0;      // chi_square_quantile(dim, confidence)
    double min_distance = 0.0;  // min pairwise distance between means
    std::vector<double> radii;  // sigma_i * sqrt(quantile)
};

// Separation test: sigma_i * sqrt(chi2_{dim,c}) <= min pairwise mean distance
// for every component. Requires >= 2 components.
SeparationReport check_separation(const MixturePrior& prior, double confidence);

struct SimplexPriorResult {
    MixturePrior prior;
    SeparationReport separation;  // failure is a warning, not an error
};

// Simplex-placed mixture; uniform weights and unit sigmas unless given.
SimplexPriorResult build_simplex_prior(const PriorLayoutConfig& cfg,
                                       const std::vector<double>& weights = {},
                                       const std::vector<double>& sigmas = {});

// Hand placement on a circle in the first two coordinates (angle offset
// `phase`), zero-padded to dim. Covers mode counts a simplex cannot reach
// (k > dim); used by the four-mode toy study.
MixturePrior ring_prior(std::size_t k, std::size_t dim, double delta, double sigma,
                        double phase = 0.0);

// Single zero-mean unit-sigma component (plain diffusion prior).
MixturePrior standard_prior(std::size_t dim);

struct EmpiricalPriorResult {
    MixturePrior prior;
    std::vector<bool> degenerate;  // sigma_i == 0 (all points of a label identical)
};

// Per-label moment matching: mean_i = label mean, sigma_i = sqrt of the mean
// per-dimension population variance, weight_i = label frequency.
// Requires every label in [0, k) to have at least 2 points.
EmpiricalPriorResult fit_empirical_prior(const LabeledDataset& data);

struct PriorSelector {
    enum class Kind { mixture, component };
    Kind kind = Kind::mixture;
    std::size_t index = 0;

    static PriorSelector mixture() { return {Kind::mixture, 0}; }
    static PriorSelector component(std::size_t i) { return {Kind::component, i}; }
};

struct PriorDraw {
    Vec x;
    std::size_t component = 0;
};

// Draws x ~ N(mu_i, sigma_i^2 I) with i fixed (component) or i ~ weights
// (mixture). sigma_i = 0 returns mu_i exactly.
PriorDraw sample_prior(const MixturePrior& prior, const PriorSelector& sel, Rng& rng);

}  // namespace modal
