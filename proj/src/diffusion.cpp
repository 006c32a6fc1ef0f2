#include "modal/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace modal {

namespace {

void check_mode(const Vec& x, const ModeParams& mode, const char* what) {
    require(x.size() == mode.mu.size(), std::string(what) + ": dim mismatch with mu");
    require(mode.sigma >= 0.0, std::string(what) + ": sigma must be >= 0");
}

}  // namespace

Vec forward_step(const Vec& x_prev, int t, const ModeParams& mode,
                 const NoiseSchedule& s, const Vec& eps) {
    check_mode(x_prev, mode, "forward_step");
    require(eps.size() == x_prev.size(), "forward_step: eps dim mismatch");
    const double a = s.alpha(t);
    const double root_a = std::sqrt(a);
    const double noise_scale = std::sqrt(1.0 - a) * mode.sigma;
    const double shift = 1.0 / s.eta(s.T);
    Vec x(x_prev.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = root_a * x_prev[i] + noise_scale * eps[i] + mode.mu[i] * shift;
    }
    return x;
}

Vec forward_marginal(const Vec& x0, int t, const ModeParams& mode,
                     const NoiseSchedule& s, const Vec& eps) {
    check_mode(x0, mode, "forward_marginal");
    require(eps.size() == x0.size(), "forward_marginal: eps dim mismatch");
    require(t >= 1, "forward_marginal: t must be >= 1");
    const double abar = s.alpha_bar(t);
    const double root_abar = std::sqrt(abar);
    const double noise_scale = std::sqrt(1.0 - abar) * mode.sigma;
    const double shift = s.eta(t) / s.eta(s.T);
    Vec x(x0.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = root_abar * x0[i] + noise_scale * eps[i] + shift * mode.mu[i];
    }
    return x;
}

Vec reverse_mean_x0(const Vec& x_t, const Vec& x0_hat, int t, const ModeParams& mode,
                    const NoiseSchedule& s) {
    check_mode(x_t, mode, "reverse_mean_x0");
    require(x0_hat.size() == x_t.size(), "reverse_mean_x0: x0_hat dim mismatch");
    require(t >= 1, "reverse_mean_x0: t must be >= 1");
    if (t == 1) return x0_hat;  // coefficients collapse: abar_0 = 1, eta_0 = 0

    const double a = s.alpha(t);
    const double beta = s.beta(t);
    const double abar_prev = s.alpha_bar(t - 1);
    const double one_minus_abar = 1.0 - s.alpha_bar(t);
    const double cx = std::sqrt(a) * (1.0 - abar_prev) / one_minus_abar;
    const double c0 = std::sqrt(abar_prev) * beta / one_minus_abar;
    const double cmu = (s.eta(t - 1) * (1.0 - a) - std::sqrt(a) * (1.0 - abar_prev)) /
                       (one_minus_abar * s.eta(s.T));
    Vec mean(x_t.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] = cx * x_t[i] + c0 * x0_hat[i] + cmu * mode.mu[i];
    }
    return mean;
}

Vec reverse_mean_eps(const Vec& x_t, const Vec& eps_hat, int t, const ModeParams& mode,
                     const NoiseSchedule& s) {
    check_mode(x_t, mode, "reverse_mean_eps");
    require(eps_hat.size() == x_t.size(), "reverse_mean_eps: eps_hat dim mismatch");
    require(t >= 1, "reverse_mean_eps: t must be >= 1");
    const double a = s.alpha(t);
    const double inv_root_a = 1.0 / std::sqrt(a);
    const double shift = 1.0 / s.eta(s.T);
    const double ceps = (1.0 - a) / std::sqrt(1.0 - s.alpha_bar(t)) * mode.sigma;
    Vec mean(x_t.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] = inv_root_a * (x_t[i] - mode.mu[i] * shift - ceps * eps_hat[i]);
    }
    return mean;
}

double reverse_variance(int t, const ModeParams& mode, const NoiseSchedule& s) {
    require(t >= 1, "reverse_variance: t must be >= 1");
    require(mode.sigma >= 0.0, "reverse_variance: sigma must be >= 0");
    return (1.0 - s.alpha_bar(t - 1)) / (1.0 - s.alpha_bar(t)) * s.beta(t) *
           mode.sigma * mode.sigma;
}

Vec eps_from_x0(const Vec& x_t, const Vec& x0_hat, int t, const ModeParams& mode,
                const NoiseSchedule& s) {
    check_mode(x_t, mode, "eps_from_x0");
    require(x0_hat.size() == x_t.size(), "eps_from_x0: x0_hat dim mismatch");
    require(mode.sigma > 0.0, "eps_from_x0: sigma must be positive");
    const double abar = s.alpha_bar(t);
    const double root_abar = std::sqrt(abar);
    const double denom = std::sqrt(1.0 - abar) * mode.sigma;
    const double shift = s.eta(t) / s.eta(s.T);
    Vec eps(x_t.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = (x_t[i] - root_abar * x0_hat[i] - shift * mode.mu[i]) / denom;
    }
    return eps;
}

Vec x0_from_eps(const Vec& x_t, const Vec& eps_hat, int t, const ModeParams& mode,
                const NoiseSchedule& s) {
    check_mode(x_t, mode, "x0_from_eps");
    require(eps_hat.size() == x_t.size(), "x0_from_eps: eps_hat dim mismatch");
    const double abar = s.alpha_bar(t);
    require(abar > 0.0, "x0_from_eps: alpha_bar must be positive");
    const double root_abar = std::sqrt(abar);
    const double noise_scale = std::sqrt(1.0 - abar) * mode.sigma;
    const double shift = s.eta(t) / s.eta(s.T);
    Vec x0(x_t.size());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        x0[i] = (x_t[i] - noise_scale * eps_hat[i] - shift * mode.mu[i]) / root_abar;
    }
    return x0;
}

std::size_t noising_component(const MixturePrior& prior, int label) {
    if (prior.k() == 1) return 0;
    require(label >= 0 && static_cast<std::size_t>(label) < prior.k(),
            "noising_component: label out of range for prior");
    return static_cast<std::size_t>(label);
}

TrainingPair make_training_pair(const Vec& x0, int label, const MixturePrior& prior,
                                const NoiseSchedule& s, Rng& rng) {
    require(x0.size() == prior.dim(), "make_training_pair: x0 dim mismatch");
    const std::size_t comp = noising_component(prior, label);
    const PriorComponent& c = prior.components[comp];

    TrainingPair pair;
    pair.x0 = x0;
    pair.label = label;
    pair.t = rng.uniform_int(1, s.T);
    pair.eps = rng.normal_vec(x0.size());
    pair.x_t = forward_marginal(x0, pair.t, {c.mean, c.sigma}, s, pair.eps);
    return pair;
}

double training_loss(const Denoiser& model, std::span<const TrainingPair> batch) {
    require(!batch.empty(), "training_loss: empty batch");
    double total = 0.0;
    for (const TrainingPair& pair : batch) {
        const std::optional<int> label =
            model.conditional() ? std::optional<int>(pair.label) : std::nullopt;
        const Vec pred = forward(model, pair.x_t, pair.t, label);
        const Vec& target =
            model.parameterization == Parameterization::clean ? pair.x0 : pair.eps;
        total += squared_distance(pred, target);
    }
    return total / static_cast<double>(batch.size());
}

namespace {

void clip_to_box(Vec& v, const std::pair<double, double>& box) {
    for (double& x : v) {
        if (x < box.first) x = box.first;
        if (x > box.second) x = box.second;
    }
}

}  // namespace

ChainResult sample_chain(const Denoiser& model, const MixturePrior& prior,
                         const PriorSelector& sel, const NoiseHook& hook,
                         const NoiseSchedule& s, Rng& rng, const ChainOptions& opt) {
    require(prior.dim() == model.data_dim, "sample_chain: prior and model dims disagree");

    PriorDraw draw = sample_prior(prior, sel, rng);
    const PriorComponent& comp = prior.components[draw.component];
    const ModeParams mode{comp.mean, comp.sigma};
    require(mode.sigma > 0.0 || !hook,
            "sample_chain: guidance needs a positive-sigma component");

    const bool clean = model.parameterization == Parameterization::clean;
    Vec x = std::move(draw.x);
    for (int t = s.T; t >= 1; --t) {
        Vec pred = forward(model, x, t);  // inference never consumes labels
        if (opt.cost) opt.cost->model_evals += 1;

        Vec mean;
        if (mode.sigma == 0.0) {
            // Deterministic mode: clean-prediction path, no noise-space division.
            Vec x0_hat = clean ? std::move(pred) : x0_from_eps(x, pred, t, mode, s);
            if (opt.clip) clip_to_box(x0_hat, *opt.clip);
            mean = reverse_mean_x0(x, x0_hat, t, mode, s);
        } else {
            // Canonical noise-space step; hooks (guidance) transform eps_hat.
            Vec eps_hat;
            if (clean) {
                if (opt.clip) clip_to_box(pred, *opt.clip);
                eps_hat = eps_from_x0(x, pred, t, mode, s);
            } else if (opt.clip) {
                Vec x0_hat = x0_from_eps(x, pred, t, mode, s);
                clip_to_box(x0_hat, *opt.clip);
                eps_hat = eps_from_x0(x, x0_hat, t, mode, s);
            } else {
                eps_hat = std::move(pred);
            }
            if (hook) eps_hat = hook(x, t, std::move(eps_hat));
            mean = reverse_mean_eps(x, eps_hat, t, mode, s);
        }

        if (t > 1 && !opt.zero_reverse_noise) {
            const double sd = std::sqrt(reverse_variance(t, mode, s));
            for (double& m : mean) m += sd * rng.normal();
        }
        x = std::move(mean);
        if (!all_finite(x)) {
            throw std::runtime_error("sample_chain: non-finite state at t = " +
                                     std::to_string(t));
        }
    }
    return {std::move(x), draw.component};
}

}  // namespace modal
