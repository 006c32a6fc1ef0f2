#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>

#include "modal/common.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/schedule.hpp"

namespace modal {

// Mode a chain or noising pass is coupled to.
struct ModeParams {
    Vec mu;
    double sigma = 1.0;
};

// Shifted forward step:
//   x_t = sqrt(alpha_t) x_{t-1} + sqrt(1 - alpha_t) sigma eps + mu / eta_T
Vec forward_step(const Vec& x_prev, int t, const ModeParams& mode,
                 const NoiseSchedule& s, const Vec& eps);

// Closed-form marginal:
//   x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) sigma eps + (eta_t / eta_T) mu
Vec forward_marginal(const Vec& x0, int t, const ModeParams& mode,
                     const NoiseSchedule& s, const Vec& eps);

// Reverse mean, clean-prediction form:
//   mean = sqrt(alpha_t)(1 - abar_{t-1})/(1 - abar_t) x_t
//        + sqrt(abar_{t-1}) beta_t/(1 - abar_t) x0_hat
//        + (eta_{t-1}(1 - alpha_t) - sqrt(alpha_t)(1 - abar_{t-1}))
//          / ((1 - abar_t) eta_T) mu
// t = 1 collapses to x0_hat exactly (abar_0 = 1, eta_0 = 0).
Vec reverse_mean_x0(const Vec& x_t, const Vec& x0_hat, int t, const ModeParams& mode,
                    const NoiseSchedule& s);

// Reverse mean, noise-prediction form:
//   mean = (x_t - mu/eta_T - (1 - alpha_t)/sqrt(1 - abar_t) sigma eps_hat)
//          / sqrt(alpha_t)
Vec reverse_mean_eps(const Vec& x_t, const Vec& eps_hat, int t, const ModeParams& mode,
                     const NoiseSchedule& s);

// Reverse variance (scalar; isotropic):
//   (1 - abar_{t-1}) / (1 - abar_t) * beta_t * sigma^2
double reverse_variance(int t, const ModeParams& mode, const NoiseSchedule& s);

// Marginal inversion between the two prediction spaces (sigma > 0 for
// eps_from_x0):
//   eps = (x_t - sqrt(abar_t) x0 - (eta_t/eta_T) mu) / (sqrt(1 - abar_t) sigma)
Vec eps_from_x0(const Vec& x_t, const Vec& x0_hat, int t, const ModeParams& mode,
                const NoiseSchedule& s);
Vec x0_from_eps(const Vec& x_t, const Vec& eps_hat, int t, const ModeParams& mode,
                const NoiseSchedule& s);

// One supervised training draw: t ~ U[1, T], eps ~ N(0, I),
// x_t = forward_marginal(x0, t, mode(label), eps). The stored fields
// reconstruct x_t bit-exactly. A single-component prior couples every label
// to component 0; otherwise label indexes the prior.
struct TrainingPair {
    Vec x0;
    int label = 0;
    int t = 1;
    Vec eps;
    Vec x_t;
};

std::size_t noising_component(const MixturePrior& prior, int label);

TrainingPair make_training_pair(const Vec& x0, int label, const MixturePrior& prior,
                                const NoiseSchedule& s, Rng& rng);

// Mean over the batch of squared prediction error against the
// parameterization's target (x0 or eps). Labels feed conditional models.
double training_loss(const Denoiser& model, std::span<const TrainingPair> batch);

// Optional per-step transform of the noise estimate (guidance lives here).
// Receives (x_t, t, eps_hat) and returns the adjusted eps_hat.
using NoiseHook = std::function<Vec(const Vec&, int, Vec)>;

struct StepCost {
    long model_evals = 0;
    long classifier_grads = 0;
};

struct ChainOptions {
    bool zero_reverse_noise = false;  // diagnostic: suppress reverse noise
    std::optional<std::pair<double, double>> clip;  // box-clip for x0_hat
    StepCost* cost = nullptr;
};

struct ChainResult {
    Vec x0;
    std::size_t component = 0;
};

// Full reverse chain. Draws x_T from the prior (per selector), then walks
// t = T..1 with the component's (mu, sigma) fixed. Model predictions are
// converted to noise space, passed through the hook when present, and turned
// into the reverse mean; reverse noise is added for t > 1 only.
// sigma = 0 components run the clean-prediction path and accept no hook.
ChainResult sample_chain(const Denoiser& model, const MixturePrior& prior,
                         const PriorSelector& sel, const NoiseHook& hook,
                         const NoiseSchedule& s, Rng& rng,
                         const ChainOptions& opt = {});

}  // namespace modal
