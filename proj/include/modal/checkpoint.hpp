#pragma once

#include <string>

#include "json.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/schedule.hpp"

namespace modal {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    Denoiser model;
    NoiseSchedule schedule;  // rebuilt from config on load, sequences never stored
    MixturePrior prior;
    long trained_steps = 0;
};

nlohmann::json schedule_config_to_json(const NoiseSchedule& s);
NoiseSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json prior_to_json(const MixturePrior& prior);
MixturePrior prior_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace modal
