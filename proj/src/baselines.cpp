#include "modal/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace modal {

std::string to_string(GuidanceKind kind) {
    switch (kind) {
        case GuidanceKind::none: return "none";
        case GuidanceKind::cg: return "cg";
        case GuidanceKind::cfg: return "cfg";
    }
    throw std::invalid_argument("unknown guidance kind");
}

GuidanceKind guidance_kind_from_string(const std::string& s) {
    if (s == "none") return GuidanceKind::none;
    if (s == "cg") return GuidanceKind::cg;
    if (s == "cfg") return GuidanceKind::cfg;
    throw std::invalid_argument("unknown guidance kind: " + s);
}

std::pair<double, Vec> classifier_logprob_grad(const SoftClassifier& clf, const Vec& x,
                                               std::size_t label) {
    require(!clf.centers.empty(), "classifier: no centers");
    require(label < clf.centers.size(), "classifier: label out of range");
    require(clf.temperature > 0.0, "classifier: temperature must be positive");
    const std::size_t k = clf.centers.size();
    const std::size_t dim = x.size();

    // logits_i = -|x - c_i|^2 / tau, stabilized softmax
    std::vector<double> logits(k);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        require(clf.centers[i].size() == dim, "classifier: center dim mismatch");
        logits[i] = -squared_distance(x, clf.centers[i]) / clf.temperature;
        if (logits[i] > max_logit) max_logit = logits[i];
    }
    double z = 0.0;
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = std::exp(logits[i] - max_logit);
        z += p[i];
    }
    for (double& pi : p) pi /= z;

    const double logprob = logits[label] - max_logit - std::log(z);

    // grad logits_i = -(2/tau)(x - c_i);  grad log p(y) = grad logit_y - sum_i p_i grad logit_i
    Vec grad(dim, 0.0);
    const double scale = 2.0 / clf.temperature;
    for (std::size_t j = 0; j < dim; ++j) {
        double mix = 0.0;
        for (std::size_t i = 0; i < k; ++i) mix += p[i] * (x[j] - clf.centers[i][j]);
        grad[j] = -scale * ((x[j] - clf.centers[label][j]) - mix);
    }
    return {logprob, std::move(grad)};
}

NoiseHook make_guidance_hook(const GuidanceConfig& cfg, const Denoiser* cond_model,
                             const SoftClassifier* clf, const NoiseSchedule& s,
                             StepCost* cost) {
    if (cfg.kind == GuidanceKind::none) return {};

    if (cfg.kind == GuidanceKind::cg) {
        require(clf != nullptr, "cg guidance: classifier required");
        const SoftClassifier classifier = *clf;
        const double weight = cfg.weight;
        const std::size_t target = cfg.target_label;
        return [classifier, weight, target, &s, cost](const Vec& x_t, int t,
                                                      Vec eps_hat) {
            // Gradient is taken at the unguided reverse mean of this step.
            const std::size_t dim = x_t.size();
            const ModeParams standard{Vec(dim, 0.0), 1.0};
            const Vec mu_tilde = reverse_mean_eps(x_t, eps_hat, t, standard, s);
            auto [logprob, grad] = classifier_logprob_grad(classifier, mu_tilde, target);
            (void)logprob;
            if (cost) cost->classifier_grads += 1;
            if (weight != 0.0) {
                const double c = weight * std::sqrt(1.0 - s.alpha_bar(t));
                for (std::size_t j = 0; j < dim; ++j) eps_hat[j] -= c * grad[j];
            }
            require(all_finite(eps_hat), "cg guidance: non-finite noise estimate");
            return eps_hat;
        };
    }

    require(cond_model != nullptr, "cfg guidance: conditional model required");
    require(cond_model->conditional(), "cfg guidance: model is unconditional");
    require(cfg.target_label < cond_model->n_labels,
            "cfg guidance: target label out of range");
    const Denoiser* model = cond_model;
    const double weight = cfg.weight;
    const int target = static_cast<int>(cfg.target_label);
    return [model, weight, target, &s, cost](const Vec& x_t, int t, Vec eps_hat) {
        // Conditional branch, converted through the standard-prior marginal.
        Vec pred = forward(*model, x_t, t, target);
        if (cost) cost->model_evals += 1;
        const ModeParams standard{Vec(x_t.size(), 0.0), 1.0};
        const Vec eps_cond = model->parameterization == Parameterization::clean
                                 ? eps_from_x0(x_t, pred, t, standard, s)
                                 : std::move(pred);
        if (weight != 0.0) {
            for (std::size_t j = 0; j < eps_hat.size(); ++j) {
                eps_hat[j] += weight * (eps_cond[j] - eps_hat[j]);
            }
        }
        require(all_finite(eps_hat), "cfg guidance: non-finite noise estimate");
        return eps_hat;
    };
}

Vec ddpm_sample(const Denoiser& model, const NoiseSchedule& s, Rng& rng,
                const ChainOptions& opt) {
    const MixturePrior prior = standard_prior(model.data_dim);
    ChainResult res = sample_chain(model, prior, PriorSelector::component(0), {}, s,
                                   rng, opt);
    return std::move(res.x0);
}

Vec cg_sample(const Denoiser& model, const SoftClassifier& clf,
              const GuidanceConfig& cfg, const NoiseSchedule& s, Rng& rng,
              const ChainOptions& opt) {
    require(cfg.kind == GuidanceKind::cg, "cg_sample: guidance kind must be cg");
    require(cfg.target_label < clf.centers.size(),
            "cg_sample: target label out of range");
    const MixturePrior prior = standard_prior(model.data_dim);
    const NoiseHook hook = make_guidance_hook(cfg, nullptr, &clf, s, opt.cost);
    ChainResult res = sample_chain(model, prior, PriorSelector::component(0), hook, s,
                                   rng, opt);
    return std::move(res.x0);
}

Vec cfg_sample(const Denoiser& cond_model, const GuidanceConfig& cfg,
               const NoiseSchedule& s, Rng& rng, const ChainOptions& opt) {
    require(cfg.kind == GuidanceKind::cfg, "cfg_sample: guidance kind must be cfg");
    const MixturePrior prior = standard_prior(cond_model.data_dim);
    const NoiseHook hook = make_guidance_hook(cfg, &cond_model, nullptr, s, opt.cost);
    ChainResult res = sample_chain(cond_model, prior, PriorSelector::component(0), hook,
                                   s, rng, opt);
    return std::move(res.x0);
}

}  // namespace modal
