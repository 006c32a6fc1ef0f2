#include "modal/config.hpp"

#include <stdexcept>
#include <vector>

namespace modal {

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad value for '") + key +
                                    "': " + e.what());
    }
}

}  // namespace

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    if (j.is_null()) return;
    if (!j.is_object()) {
        throw std::invalid_argument(context + ": expected an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw std::invalid_argument(context + ": unknown key '" + it.key() + "'");
        }
    }
}

void apply_override(nlohmann::json& root, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like path.to.key=value: " +
                                    assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    nlohmann::json* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) {
            throw std::invalid_argument("empty key segment in override path: " + path);
        }
        if (dot == std::string::npos) {
            nlohmann::json parsed =
                nlohmann::json::parse(value, nullptr, /*allow_exceptions=*/false);
            (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
            return;
        }
        if (!node->is_object() && !node->is_null()) {
            throw std::invalid_argument("override path crosses a non-object: " + path);
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

GeneratorConfig generator_from_config(const nlohmann::json& block) {
    GeneratorConfig cfg;
    cfg.kind = field<std::string>(block, "kind", "four_mode");
    if (cfg.kind == "four_mode") {
        check_keys(block, {"kind", "n_per_mode", "center", "std_dev"}, "generator");
        cfg.four_mode.n_per_mode =
            field<std::size_t>(block, "n_per_mode", cfg.four_mode.n_per_mode);
        cfg.four_mode.center = field<double>(block, "center", cfg.four_mode.center);
        cfg.four_mode.std_dev = field<double>(block, "std_dev", cfg.four_mode.std_dev);
    } else if (cfg.kind == "ring_modes") {
        check_keys(block, {"kind", "k", "n_per_mode", "radius", "std_dev"}, "generator");
        cfg.ring_modes.k = field<std::size_t>(block, "k", cfg.ring_modes.k);
        cfg.ring_modes.n_per_mode =
            field<std::size_t>(block, "n_per_mode", cfg.ring_modes.n_per_mode);
        cfg.ring_modes.radius = field<double>(block, "radius", cfg.ring_modes.radius);
        cfg.ring_modes.std_dev = field<double>(block, "std_dev", cfg.ring_modes.std_dev);
    } else if (cfg.kind == "maze_lite") {
        check_keys(block, {"kind", "n_layouts", "horizon", "n_per_layout", "noise_std"},
                   "generator");
        cfg.maze_lite.n_layouts =
            field<std::size_t>(block, "n_layouts", cfg.maze_lite.n_layouts);
        cfg.maze_lite.horizon = field<std::size_t>(block, "horizon", cfg.maze_lite.horizon);
        cfg.maze_lite.n_per_layout =
            field<std::size_t>(block, "n_per_layout", cfg.maze_lite.n_per_layout);
        cfg.maze_lite.noise_std =
            field<double>(block, "noise_std", cfg.maze_lite.noise_std);
    } else {
        throw std::invalid_argument("unknown generator kind: " + cfg.kind);
    }
    return cfg;
}

LabeledDataset run_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
    if (cfg.kind == "four_mode") {
        FourModeConfig c = cfg.four_mode;
        c.seed = seed;
        return gen_four_mode(c);
    }
    if (cfg.kind == "ring_modes") {
        RingModesConfig c = cfg.ring_modes;
        c.seed = seed;
        return gen_ring_modes(c);
    }
    MazeLiteConfig c = cfg.maze_lite;
    c.seed = seed;
    return gen_maze_lite(c);
}

NoiseSchedule schedule_from_config(const nlohmann::json& block) {
    check_keys(block, {"T", "beta_min", "beta_max", "kind"}, "schedule");
    return build_schedule(
        field<int>(block, "T", 100), field<double>(block, "beta_min", 1e-3),
        field<double>(block, "beta_max", 0.2),
        schedule_kind_from_string(field<std::string>(block, "kind", "linear")));
}

MixturePrior prior_from_config(const nlohmann::json& block, const LabeledDataset* data) {
    const std::string kind = field<std::string>(block, "kind", "standard");
    if (kind == "standard") {
        check_keys(block, {"kind", "dim"}, "prior");
        return standard_prior(field<std::size_t>(block, "dim", 2));
    }
    if (kind == "simplex") {
        check_keys(block, {"kind", "k", "dim", "delta", "sigma", "weights", "confidence"},
                   "prior");
        PriorLayoutConfig layout;
        layout.k = field<int>(block, "k", 2);
        layout.dim = field<int>(block, "dim", 2);
        layout.delta = field<double>(block, "delta", 1.0);
        layout.confidence = field<double>(block, "confidence", 0.95);
        const double sigma = field<double>(block, "sigma", 1.0);
        const auto weights = field<std::vector<double>>(block, "weights", {});
        const std::vector<double> sigmas(static_cast<std::size_t>(layout.k), sigma);
        return build_simplex_prior(layout, weights, sigmas).prior;
    }
    if (kind == "ring") {
        check_keys(block, {"kind", "k", "dim", "delta", "sigma", "phase"}, "prior");
        return ring_prior(field<std::size_t>(block, "k", 4),
                          field<std::size_t>(block, "dim", 2),
                          field<double>(block, "delta", 4.0),
                          field<double>(block, "sigma", 1.0),
                          field<double>(block, "phase", 0.0));
    }
    if (kind == "empirical") {
        check_keys(block, {"kind"}, "prior");
        if (!data) {
            throw std::invalid_argument("empirical prior needs a dataset");
        }
        return fit_empirical_prior(*data).prior;
    }
    if (kind == "manual") {
        check_keys(block, {"kind", "components"}, "prior");
        MixturePrior prior;
        prior.source = PriorSource::manual;
        if (!block.contains("components")) {
            throw std::invalid_argument("manual prior needs components");
        }
        for (const nlohmann::json& c : block.at("components")) {
            check_keys(c, {"mean", "sigma", "weight"}, "prior component");
            PriorComponent comp;
            comp.mean = c.at("mean").get<Vec>();
            comp.sigma = field<double>(c, "sigma", 1.0);
            comp.weight = field<double>(c, "weight", 0.0);
            prior.components.push_back(std::move(comp));
        }
        validate(prior);
        return prior;
    }
    throw std::invalid_argument("unknown prior kind: " + kind);
}

TrainConfig train_from_config(const nlohmann::json& model_block,
                              const nlohmann::json& training_block) {
    check_keys(model_block, {"hidden", "time_features", "parameterization", "conditional"},
               "model");
    check_keys(training_block, {"steps", "batch", "lr", "label_dropout", "log_every"},
               "training");
    TrainConfig cfg;
    cfg.hidden = field<std::vector<std::size_t>>(model_block, "hidden", cfg.hidden);
    cfg.time_features =
        field<std::size_t>(model_block, "time_features", cfg.time_features);
    cfg.parameterization = parameterization_from_string(
        field<std::string>(model_block, "parameterization", "clean"));
    cfg.conditional = field<bool>(model_block, "conditional", false);
    cfg.steps = field<long>(training_block, "steps", cfg.steps);
    cfg.batch = field<std::size_t>(training_block, "batch", cfg.batch);
    cfg.adam.lr = field<double>(training_block, "lr", cfg.adam.lr);
    cfg.label_dropout =
        field<double>(training_block, "label_dropout", cfg.label_dropout);
    cfg.log_every = field<long>(training_block, "log_every", cfg.log_every);
    return cfg;
}

SamplingConfig sampling_from_config(const nlohmann::json& block) {
    check_keys(block,
               {"n", "selector", "component", "zero_reverse_noise", "clip", "guidance",
                "svg", "svg_limit"},
               "sampling");
    SamplingConfig cfg;
    cfg.n = field<std::size_t>(block, "n", cfg.n);
    cfg.selector = field<std::string>(block, "selector", cfg.selector);
    if (cfg.selector != "mixture" && cfg.selector != "component" &&
        cfg.selector != "per_component") {
        throw std::invalid_argument("unknown selector: " + cfg.selector);
    }
    cfg.component = field<std::size_t>(block, "component", 0);
    cfg.zero_reverse_noise = field<bool>(block, "zero_reverse_noise", false);
    if (block.contains("clip")) {
        const auto box = block.at("clip").get<std::vector<double>>();
        if (box.size() != 2 || !(box[0] < box[1])) {
            throw std::invalid_argument("clip must be [lo, hi] with lo < hi");
        }
        cfg.clip = {box[0], box[1]};
    }
    if (block.contains("guidance")) {
        const nlohmann::json& g = block.at("guidance");
        check_keys(g, {"kind", "weight", "target", "temperature"}, "guidance");
        cfg.guidance.kind =
            guidance_kind_from_string(field<std::string>(g, "kind", "none"));
        cfg.guidance.weight = field<double>(g, "weight", 0.0);
        cfg.guidance.target_label = field<std::size_t>(g, "target", 0);
        cfg.temperature = field<double>(g, "temperature", 0.0);
    }
    cfg.svg = field<bool>(block, "svg", true);
    cfg.svg_limit = field<double>(block, "svg_limit", 8.0);
    return cfg;
}

ToyStudyConfig study_from_config(const nlohmann::json& block, std::uint64_t seed) {
    check_keys(block,
               {"data", "T", "beta_min", "beta_max", "small_delta", "good_delta",
                "large_delta", "prior_sigma", "training", "n_cond_per_mode", "n_uncond",
                "rho"},
               "study");
    ToyStudyConfig cfg;
    cfg.seed = seed;
    if (block.contains("data")) {
        const nlohmann::json& d = block.at("data");
        check_keys(d, {"n_per_mode", "center", "std_dev"}, "study.data");
        cfg.data.n_per_mode = field<std::size_t>(d, "n_per_mode", cfg.data.n_per_mode);
        cfg.data.center = field<double>(d, "center", cfg.data.center);
        cfg.data.std_dev = field<double>(d, "std_dev", cfg.data.std_dev);
    }
    cfg.T = field<int>(block, "T", cfg.T);
    cfg.beta_min = field<double>(block, "beta_min", cfg.beta_min);
    cfg.beta_max = field<double>(block, "beta_max", cfg.beta_max);
    cfg.small_delta = field<double>(block, "small_delta", cfg.small_delta);
    cfg.good_delta = field<double>(block, "good_delta", cfg.good_delta);
    cfg.large_delta = field<double>(block, "large_delta", cfg.large_delta);
    cfg.prior_sigma = field<double>(block, "prior_sigma", cfg.prior_sigma);
    if (block.contains("training")) {
        const nlohmann::json& t = block.at("training");
        check_keys(t, {"steps", "batch", "lr", "hidden", "time_features", "log_every"},
                   "study.training");
        cfg.train.steps = field<long>(t, "steps", cfg.train.steps);
        cfg.train.batch = field<std::size_t>(t, "batch", cfg.train.batch);
        cfg.train.adam.lr = field<double>(t, "lr", cfg.train.adam.lr);
        cfg.train.hidden = field<std::vector<std::size_t>>(t, "hidden", cfg.train.hidden);
        cfg.train.time_features =
            field<std::size_t>(t, "time_features", cfg.train.time_features);
        cfg.train.log_every = field<long>(t, "log_every", cfg.train.log_every);
    }
    cfg.n_cond_per_mode = field<std::size_t>(block, "n_cond_per_mode", cfg.n_cond_per_mode);
    cfg.n_uncond = field<std::size_t>(block, "n_uncond", cfg.n_uncond);
    cfg.rho = field<double>(block, "rho", cfg.rho);
    return cfg;
}

}  // namespace modal
