#pragma once

#include <string>
#include <utility>
#include <vector>

#include "modal/common.hpp"
#include "modal/diffusion.hpp"

namespace modal {

enum class GuidanceKind { none, cg, cfg };

std::string to_string(GuidanceKind kind);
GuidanceKind guidance_kind_from_string(const std::string& s);

struct GuidanceConfig {
    GuidanceKind kind = GuidanceKind::none;
    double weight = 0.0;  // cg strength or cfg scale
    std::size_t target_label = 0;
};

// Softmax over negative scaled squared distances to per-mode centers:
//   p(i | x) = softmax_i(-|x - c_i|^2 / temperature)
struct SoftClassifier {
    std::vector<Vec> centers;
    double temperature = 1.0;
};

// log p(label | x) and its gradient in x.
std::pair<double, Vec> classifier_logprob_grad(const SoftClassifier& clf, const Vec& x,
                                               std::size_t label);

// Noise hook implementing the configured guidance over a standard-prior chain.
//   cg:  eps_hat -= weight * sqrt(1 - abar_t) * grad_x log p(target | mu_tilde)
//        where mu_tilde is the unguided reverse mean at the current step
//   cfg: eps_hat += weight * (eps_cond - eps_hat), eps_cond from the model's
//        conditional branch (always evaluated; two model passes per step)
// Weight 0 applies no perturbation (the extra evaluations still run; model
// passes consume no randomness, so outputs match the unguided chain exactly).
NoiseHook make_guidance_hook(const GuidanceConfig& cfg, const Denoiser* cond_model,
                             const SoftClassifier* clf, const NoiseSchedule& s,
                             StepCost* cost);

// Plain DDPM sampling: the modal chain over a single zero-mean unit-sigma
// component (see e.g. arXiv:2006.11239 for the standard process).
Vec ddpm_sample(const Denoiser& model, const NoiseSchedule& s, Rng& rng,
                const ChainOptions& opt = {});

// Classifier-guided sampling over the standard prior.
Vec cg_sample(const Denoiser& model, const SoftClassifier& clf,
              const GuidanceConfig& cfg, const NoiseSchedule& s, Rng& rng,
              const ChainOptions& opt = {});

// Classifier-free guided sampling; model must be conditional (null token
// trained via label dropout).
Vec cfg_sample(const Denoiser& cond_model, const GuidanceConfig& cfg,
               const NoiseSchedule& s, Rng& rng, const ChainOptions& opt = {});

}  // namespace modal
