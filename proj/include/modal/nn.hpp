#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modal/common.hpp"
#include "modal/datagen.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/schedule.hpp"

namespace modal {

// What the network predicts: the clean point x0 (training default) or the
// forward noise eps.
enum class Parameterization { clean, noise };

std::string to_string(Parameterization p);
Parameterization parameterization_from_string(const std::string& s);

struct LinearLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    Vec w;  // row-major, out x in
    Vec b;  // out
};

// MLP denoiser: input = concat(x_t, time_embedding + label_embedding),
// SiLU hidden activations, linear output of size data_dim.
// Conditional models hold n_labels + 1 embedding rows; the last row is the
// null token, zero-initialized, and selects the unconditional path.
struct Denoiser {
    std::size_t data_dim = 0;
    std::size_t time_features = 32;  // even; sin/cos pairs over a geometric
                                     // frequency ladder from 1 down to 1e-4
    std::size_t n_labels = 0;        // 0 = unconditional
    Parameterization parameterization = Parameterization::clean;
    std::vector<LinearLayer> layers;
    Vec label_table;  // (n_labels + 1) * time_features when conditional

    bool conditional() const { return n_labels > 0; }
    std::vector<std::size_t> widths() const;
    std::size_t param_count() const;
};

struct DenoiserConfig {
    std::size_t data_dim = 2;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t time_features = 32;
    std::size_t n_labels = 0;
    Parameterization parameterization = Parameterization::clean;
};

Denoiser make_denoiser(const DenoiserConfig& cfg, Rng& rng);

// Sinusoidal features [sin(w_j t), cos(w_j t)], w_j geometric from 1 to 1e-4.
Vec time_embedding(int t, std::size_t features);

// label = nullopt selects the unconditional path (the null row on
// conditional models). Supplying a label on an unconditional model throws.
Vec forward(const Denoiser& model, const Vec& x_t, int t,
            std::optional<int> label = std::nullopt);

// One supervised example; target is x0 or eps depending on parameterization.
struct TrainingExample {
    Vec x_t;
    int t = 1;
    std::optional<int> label;  // embedding row; nullopt = null token
    Vec target;
};

// Mean over the batch of per-example summed squared errors.
double batch_loss(const Denoiser& model, std::span<const TrainingExample> batch);

struct Gradients {
    std::vector<LinearLayer> layers;  // same shapes as the model, holding dL/dw, dL/db
    Vec label_table;
};

// Backprop of batch_loss; returns (loss, gradients).
std::pair<double, Gradients> backward(const Denoiser& model,
                                      std::span<const TrainingExample> batch);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    AdamConfig cfg;
    long step = 0;
    Vec m;  // first moment, flat parameter order
    Vec v;  // second moment
};

OptimizerState make_optimizer(const Denoiser& model, const AdamConfig& cfg);

// Adam update with bias correction. Gradient shapes must match the model.
void optimizer_step(Denoiser& model, const Gradients& grads, OptimizerState& state);

// Flat parameter order: per layer w then b, then the label table.
Vec flatten_params(const Denoiser& model);
void unflatten_params(Denoiser& model, const Vec& params);

struct TrainConfig {
    long steps = 6000;
    std::size_t batch = 128;
    bool conditional = false;
    double label_dropout = 0.1;  // conditional models: chance to train the null row
    Parameterization parameterization = Parameterization::clean;
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::size_t time_features = 32;
    AdamConfig adam;
    long log_every = 50;
};

struct TrainResult {
    Denoiser model;
    std::vector<std::pair<long, double>> loss_curve;  // (step, loss)
};

// Trains a denoiser on noised pairs drawn from (data, prior, schedule).
// A single-component prior couples every label to component 0; otherwise the
// prior must have one component per label. Throws on divergence.
TrainResult train_model(const LabeledDataset& data, const MixturePrior& prior,
                        const NoiseSchedule& schedule, const TrainConfig& cfg,
                        Rng& rng);

// Continues training an existing model (used by checkpoint resume).
void train_more(Denoiser& model, const LabeledDataset& data, const MixturePrior& prior,
                const NoiseSchedule& schedule, const TrainConfig& cfg, Rng& rng,
                std::vector<std::pair<long, double>>& loss_curve, long start_step);

}  // namespace modal
