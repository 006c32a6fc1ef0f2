#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>

#include "json.hpp"
#include "modal/baselines.hpp"
#include "modal/datagen.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/schedule.hpp"
#include "modal/study.hpp"

namespace modal {

// Rejects keys outside `allowed` (typo guard). Throws std::invalid_argument.
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context);

// "a.b.c=value": navigates/creates objects along the dotted path. The value
// text is parsed as JSON when valid, else taken as a bare string.
void apply_override(nlohmann::json& root, const std::string& assignment);

struct GeneratorConfig {
    std::string kind;  // four_mode | ring_modes | maze_lite
    FourModeConfig four_mode;
    RingModesConfig ring_modes;
    MazeLiteConfig maze_lite;
};

GeneratorConfig generator_from_config(const nlohmann::json& block);
LabeledDataset run_generator(const GeneratorConfig& cfg, std::uint64_t seed);

// {"T": 100, "beta_min": 1e-3, "beta_max": 0.2, "kind": "linear"}
NoiseSchedule schedule_from_config(const nlohmann::json& block);

// kind = standard {dim} | simplex {k, dim, delta, sigma, weights, confidence}
//      | ring {k, dim, delta, sigma, phase}
//      | empirical {} (fitted to the dataset; requires data)
//      | manual {components: [{mean, sigma, weight}]}
MixturePrior prior_from_config(const nlohmann::json& block,
                               const LabeledDataset* data = nullptr);

// model: {hidden, time_features, parameterization, conditional}
// training: {steps, batch, lr, label_dropout, log_every}
TrainConfig train_from_config(const nlohmann::json& model_block,
                              const nlohmann::json& training_block);

struct SamplingConfig {
    std::size_t n = 1000;
    std::string selector = "mixture";  // mixture | component | per_component
    std::size_t component = 0;
    bool zero_reverse_noise = false;
    std::optional<std::pair<double, double>> clip;
    GuidanceConfig guidance;     // kind "none" unless configured
    double temperature = 0.0;    // cg classifier; 0 derives dim * data_std^2
    bool svg = true;
    double svg_limit = 8.0;
};

SamplingConfig sampling_from_config(const nlohmann::json& block);

ToyStudyConfig study_from_config(const nlohmann::json& block, std::uint64_t seed);

}  // namespace modal
