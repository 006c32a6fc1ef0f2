#include "modal/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "modal/diffusion.hpp"

namespace modal {

std::string to_string(Parameterization p) {
    switch (p) {
        case Parameterization::clean: return "clean";
        case Parameterization::noise: return "noise";
    }
    throw std::invalid_argument("unknown parameterization");
}

Parameterization parameterization_from_string(const std::string& s) {
    if (s == "clean") return Parameterization::clean;
    if (s == "noise") return Parameterization::noise;
    throw std::invalid_argument("unknown parameterization: " + s);
}

std::vector<std::size_t> Denoiser::widths() const {
    std::vector<std::size_t> w;
    if (layers.empty()) return w;
    w.push_back(layers.front().in);
    for (const LinearLayer& l : layers) w.push_back(l.out);
    return w;
}

std::size_t Denoiser::param_count() const {
    std::size_t n = 0;
    for (const LinearLayer& l : layers) n += l.w.size() + l.b.size();
    return n + label_table.size();
}

Denoiser make_denoiser(const DenoiserConfig& cfg, Rng& rng) {
    require(cfg.data_dim >= 1, "make_denoiser: data_dim must be >= 1");
    require(cfg.time_features >= 2 && cfg.time_features % 2 == 0,
            "make_denoiser: time_features must be even and >= 2");
    require(!cfg.hidden.empty(), "make_denoiser: need at least one hidden layer");

    Denoiser m;
    m.data_dim = cfg.data_dim;
    m.time_features = cfg.time_features;
    m.n_labels = cfg.n_labels;
    m.parameterization = cfg.parameterization;

    std::vector<std::size_t> widths;
    widths.push_back(cfg.data_dim + cfg.time_features);
    for (std::size_t h : cfg.hidden) widths.push_back(h);
    widths.push_back(cfg.data_dim);

    m.layers.resize(widths.size() - 1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        LinearLayer& layer = m.layers[l];
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        const double limit =
            std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (double& w : layer.w) w = limit * (2.0 * rng.uniform01() - 1.0);
    }

    if (cfg.n_labels > 0) {
        // Rows 0..n_labels-1 are real labels; the final null row stays zero so
        // the null-token path matches an unconditional model of equal weights.
        m.label_table.assign((cfg.n_labels + 1) * cfg.time_features, 0.0);
        for (std::size_t r = 0; r < cfg.n_labels; ++r) {
            for (std::size_t j = 0; j < cfg.time_features; ++j) {
                m.label_table[r * cfg.time_features + j] = 0.02 * rng.normal();
            }
        }
    }
    return m;
}

Vec time_embedding(int t, std::size_t features) {
    require(features >= 2 && features % 2 == 0,
            "time_embedding: features must be even and >= 2");
    require(t >= 1, "time_embedding: t must be >= 1");
    const std::size_t half = features / 2;
    Vec emb(features);
    for (std::size_t j = 0; j < half; ++j) {
        // Geometric ladder from 1 down to 1e-4; the slowest frequency stays
        // monotone over any horizon below ~15000 steps, so embeddings are
        // pairwise distinct across t.
        const double expnt = half > 1
            ? static_cast<double>(j) / static_cast<double>(half - 1)
            : 0.0;
        const double w = std::pow(1e-4, expnt);
        emb[j] = std::sin(w * static_cast<double>(t));
        emb[half + j] = std::cos(w * static_cast<double>(t));
    }
    return emb;
}

namespace {

inline double silu(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return x * s;
}

inline double silu_derivative(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

std::size_t embedding_row(const Denoiser& model, std::optional<int> label) {
    if (!label.has_value()) return model.n_labels;  // null token
    require(*label >= 0 && static_cast<std::size_t>(*label) < model.n_labels,
            "forward: label out of range");
    return static_cast<std::size_t>(*label);
}

Vec build_input(const Denoiser& model, const Vec& x_t, int t,
                std::optional<int> label) {
    require(x_t.size() == model.data_dim, "forward: x_t has wrong dimension");
    if (!model.conditional()) {
        require(!label.has_value(), "forward: label given to unconditional model");
    }
    Vec input(model.data_dim + model.time_features);
    for (std::size_t i = 0; i < model.data_dim; ++i) input[i] = x_t[i];
    const Vec temb = time_embedding(t, model.time_features);
    for (std::size_t j = 0; j < model.time_features; ++j) {
        input[model.data_dim + j] = temb[j];
    }
    if (model.conditional()) {
        const std::size_t row = embedding_row(model, label);
        const double* emb = model.label_table.data() + row * model.time_features;
        for (std::size_t j = 0; j < model.time_features; ++j) {
            input[model.data_dim + j] += emb[j];
        }
    }
    return input;
}

// z = W a + b
void affine(const LinearLayer& l, const Vec& a, Vec& z) {
    z.assign(l.out, 0.0);
    for (std::size_t i = 0; i < l.out; ++i) {
        const double* row = l.w.data() + i * l.in;
        double s = l.b[i];
        for (std::size_t j = 0; j < l.in; ++j) s += row[j] * a[j];
        z[i] = s;
    }
}

struct ForwardCache {
    std::vector<Vec> acts;  // acts[0] = input, acts[l+1] = activation after layer l
    std::vector<Vec> zs;    // pre-activations per layer
};

void forward_cached(const Denoiser& model, const Vec& input, ForwardCache& cache) {
    const std::size_t L = model.layers.size();
    cache.acts.resize(L + 1);
    cache.zs.resize(L);
    cache.acts[0] = input;
    for (std::size_t l = 0; l < L; ++l) {
        affine(model.layers[l], cache.acts[l], cache.zs[l]);
        if (l + 1 == L) {
            cache.acts[l + 1] = cache.zs[l];  // linear output
        } else {
            Vec& a = cache.acts[l + 1];
            a.resize(cache.zs[l].size());
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = silu(cache.zs[l][i]);
        }
    }
}

Gradients make_gradients(const Denoiser& model) {
    Gradients g;
    g.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        g.layers[l].in = model.layers[l].in;
        g.layers[l].out = model.layers[l].out;
        g.layers[l].w.assign(model.layers[l].w.size(), 0.0);
        g.layers[l].b.assign(model.layers[l].b.size(), 0.0);
    }
    g.label_table.assign(model.label_table.size(), 0.0);
    return g;
}

}  // namespace

Vec forward(const Denoiser& model, const Vec& x_t, int t, std::optional<int> label) {
    const Vec input = build_input(model, x_t, t, label);
    Vec a = input, z;
    const std::size_t L = model.layers.size();
    for (std::size_t l = 0; l < L; ++l) {
        affine(model.layers[l], a, z);
        if (l + 1 == L) {
            a = z;
        } else {
            a.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = silu(z[i]);
        }
    }
    return a;
}

double batch_loss(const Denoiser& model, std::span<const TrainingExample> batch) {
    require(!batch.empty(), "batch_loss: empty batch");
    double total = 0.0;
    for (const TrainingExample& ex : batch) {
        require(ex.target.size() == model.data_dim, "batch_loss: bad target dimension");
        const Vec pred = forward(model, ex.x_t, ex.t, ex.label);
        total += squared_distance(pred, ex.target);
    }
    return total / static_cast<double>(batch.size());
}

std::pair<double, Gradients> backward(const Denoiser& model,
                                      std::span<const TrainingExample> batch) {
    require(!batch.empty(), "backward: empty batch");
    Gradients grads = make_gradients(model);
    const std::size_t L = model.layers.size();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double total = 0.0;
    ForwardCache cache;
    Vec delta, delta_prev;
    for (const TrainingExample& ex : batch) {
        require(ex.target.size() == model.data_dim, "backward: bad target dimension");
        const Vec input = build_input(model, ex.x_t, ex.t, ex.label);
        forward_cached(model, input, cache);

        const Vec& pred = cache.acts[L];
        delta.resize(model.data_dim);
        for (std::size_t i = 0; i < model.data_dim; ++i) {
            const double r = pred[i] - ex.target[i];
            total += r * r * inv_b;
            delta[i] = 2.0 * r * inv_b;  // d(loss)/d(output)
        }

        for (std::size_t l = L; l-- > 0;) {
            const LinearLayer& layer = model.layers[l];
            LinearLayer& g = grads.layers[l];
            const Vec& a_prev = cache.acts[l];
            for (std::size_t i = 0; i < layer.out; ++i) {
                const double d = delta[i];
                g.b[i] += d;
                double* grow = g.w.data() + i * layer.in;
                for (std::size_t j = 0; j < layer.in; ++j) grow[j] += d * a_prev[j];
            }
            if (l == 0) break;
            delta_prev.assign(layer.in, 0.0);
            for (std::size_t i = 0; i < layer.out; ++i) {
                const double d = delta[i];
                const double* row = layer.w.data() + i * layer.in;
                for (std::size_t j = 0; j < layer.in; ++j) delta_prev[j] += row[j] * d;
            }
            const Vec& z = cache.zs[l - 1];
            for (std::size_t j = 0; j < delta_prev.size(); ++j) {
                delta_prev[j] *= silu_derivative(z[j]);
            }
            std::swap(delta, delta_prev);
        }

        if (model.conditional()) {
            // Input gradient for the embedding slice flows into the row used.
            const LinearLayer& first = model.layers[0];
            const std::size_t row = embedding_row(model, ex.label);
            double* gemb = grads.label_table.data() + row * model.time_features;
            // delta currently holds d(loss)/d(z_0) scaled through layer 0's use
            // below; recompute input gradient from layer 0 explicitly.
            // d(loss)/d(input_j) = sum_i W0[i][j] * delta0_i where delta0 is the
            // delta that was applied to layer 0. After the loop above, `delta`
            // is exactly that delta0 (loop ends after accumulating l == 0).
            for (std::size_t i = 0; i < first.out; ++i) {
                const double d = delta[i];
                const double* wrow = first.w.data() + i * first.in;
                for (std::size_t j = 0; j < model.time_features; ++j) {
                    gemb[j] += wrow[model.data_dim + j] * d;
                }
            }
        }
    }
    return {total, std::move(grads)};
}

OptimizerState make_optimizer(const Denoiser& model, const AdamConfig& cfg) {
    OptimizerState st;
    st.cfg = cfg;
    st.m.assign(model.param_count(), 0.0);
    st.v.assign(model.param_count(), 0.0);
    return st;
}

namespace {

void adam_update(double g, double& theta, double& m, double& v,
                 const AdamConfig& cfg, double bc1, double bc2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    theta -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
}

}  // namespace

void optimizer_step(Denoiser& model, const Gradients& grads, OptimizerState& state) {
    require(state.m.size() == model.param_count(),
            "optimizer_step: state does not match model");
    require(grads.layers.size() == model.layers.size(),
            "optimizer_step: gradient shape mismatch");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));

    std::size_t p = 0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        LinearLayer& layer = model.layers[l];
        const LinearLayer& g = grads.layers[l];
        require(g.w.size() == layer.w.size() && g.b.size() == layer.b.size(),
                "optimizer_step: gradient shape mismatch");
        for (std::size_t i = 0; i < layer.w.size(); ++i, ++p) {
            adam_update(g.w[i], layer.w[i], state.m[p], state.v[p], state.cfg, bc1, bc2);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i, ++p) {
            adam_update(g.b[i], layer.b[i], state.m[p], state.v[p], state.cfg, bc1, bc2);
        }
    }
    require(grads.label_table.size() == model.label_table.size(),
            "optimizer_step: gradient shape mismatch");
    for (std::size_t i = 0; i < model.label_table.size(); ++i, ++p) {
        adam_update(grads.label_table[i], model.label_table[i], state.m[p], state.v[p],
                    state.cfg, bc1, bc2);
    }
}

Vec flatten_params(const Denoiser& model) {
    Vec out;
    out.reserve(model.param_count());
    for (const LinearLayer& l : model.layers) {
        out.insert(out.end(), l.w.begin(), l.w.end());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
    out.insert(out.end(), model.label_table.begin(), model.label_table.end());
    return out;
}

void unflatten_params(Denoiser& model, const Vec& params) {
    require(params.size() == model.param_count(),
            "unflatten_params: parameter count mismatch");
    std::size_t p = 0;
    for (LinearLayer& l : model.layers) {
        for (double& w : l.w) w = params[p++];
        for (double& b : l.b) b = params[p++];
    }
    for (double& e : model.label_table) e = params[p++];
}

namespace {

void run_training(Denoiser& model, const LabeledDataset& data,
                  const MixturePrior& prior, const NoiseSchedule& schedule,
                  const TrainConfig& cfg, Rng& rng,
                  std::vector<std::pair<long, double>>& loss_curve, long start_step) {
    require(cfg.steps >= 0, "train: steps must be >= 0");
    require(cfg.batch >= 1, "train: batch must be >= 1");
    require(data.n > 0, "train: empty dataset");
    require(prior.dim() == data.dim, "train: prior and data dims disagree");
    require(prior.k() == 1 || prior.k() == data.k,
            "train: prior must have one component total or one per label");
    if (model.conditional()) {
        require(model.n_labels == data.k, "train: model label count mismatch");
        require(cfg.label_dropout >= 0.0 && cfg.label_dropout <= 1.0,
                "train: label_dropout must lie in [0, 1]");
    }

    OptimizerState opt = make_optimizer(model, cfg.adam);
    std::vector<TrainingExample> batch(cfg.batch);
    for (long step = 1; step <= cfg.steps; ++step) {
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            const std::size_t i = rng.index(data.n);
            const auto row = data.row(i);
            const Vec x0(row.begin(), row.end());
            TrainingPair pair = make_training_pair(x0, data.labels[i], prior, schedule, rng);
            TrainingExample& ex = batch[b];
            ex.x_t = std::move(pair.x_t);
            ex.t = pair.t;
            if (model.conditional()) {
                const bool drop = cfg.label_dropout > 0.0 &&
                                  rng.uniform01() < cfg.label_dropout;
                ex.label = drop ? std::nullopt : std::optional<int>(pair.label);
            } else {
                ex.label = std::nullopt;
            }
            ex.target = cfg.parameterization == Parameterization::clean
                            ? std::move(pair.x0)
                            : std::move(pair.eps);
        }
        auto [loss, grads] = backward(model, batch);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("train: loss diverged at step " +
                                     std::to_string(start_step + step));
        }
        optimizer_step(model, grads, opt);
        if (cfg.log_every > 0 &&
            (step % cfg.log_every == 0 || step == cfg.steps)) {
            loss_curve.emplace_back(start_step + step, loss);
        }
    }
}

}  // namespace

TrainResult train_model(const LabeledDataset& data, const MixturePrior& prior,
                        const NoiseSchedule& schedule, const TrainConfig& cfg,
                        Rng& rng) {
    DenoiserConfig mcfg;
    mcfg.data_dim = data.dim;
    mcfg.hidden = cfg.hidden;
    mcfg.time_features = cfg.time_features;
    mcfg.n_labels = cfg.conditional ? data.k : 0;
    mcfg.parameterization = cfg.parameterization;

    TrainResult out;
    out.model = make_denoiser(mcfg, rng);
    run_training(out.model, data, prior, schedule, cfg, rng, out.loss_curve, 0);
    return out;
}

void train_more(Denoiser& model, const LabeledDataset& data, const MixturePrior& prior,
                const NoiseSchedule& schedule, const TrainConfig& cfg, Rng& rng,
                std::vector<std::pair<long, double>>& loss_curve, long start_step) {
    run_training(model, data, prior, schedule, cfg, rng, loss_curve, start_step);
}

}  // namespace modal
