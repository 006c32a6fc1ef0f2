#include "modal/checkpoint.hpp"

#include <stdexcept>

#include "modal/jsonio.hpp"

namespace modal {

nlohmann::json schedule_config_to_json(const NoiseSchedule& s) {
    return {{"T", s.T},
            {"beta_min", s.beta_min},
            {"beta_max", s.beta_max},
            {"kind", to_string(s.kind)}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
    return build_schedule(j.at("T").get<int>(), j.at("beta_min").get<double>(),
                          j.at("beta_max").get<double>(),
                          schedule_kind_from_string(j.at("kind").get<std::string>()));
}

nlohmann::json prior_to_json(const MixturePrior& prior) {
    nlohmann::json comps = nlohmann::json::array();
    for (const PriorComponent& c : prior.components) {
        comps.push_back({{"mean", c.mean}, {"sigma", c.sigma}, {"weight", c.weight}});
    }
    return {{"source", to_string(prior.source)},
            {"delta", prior.delta},
            {"components", comps}};
}

MixturePrior prior_from_json(const nlohmann::json& j) {
    MixturePrior prior;
    prior.source = prior_source_from_string(j.at("source").get<std::string>());
    prior.delta = j.at("delta").get<double>();
    for (const nlohmann::json& c : j.at("components")) {
        PriorComponent comp;
        comp.mean = c.at("mean").get<Vec>();
        comp.sigma = c.at("sigma").get<double>();
        comp.weight = c.at("weight").get<double>();
        prior.components.push_back(std::move(comp));
    }
    validate(prior);
    return prior;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
    const Denoiser& m = ckpt.model;
    return {{"format_version", kCheckpointFormatVersion},
            {"parameterization", to_string(m.parameterization)},
            {"widths", m.widths()},
            {"embeddings",
             {{"time_features", m.time_features}, {"n_labels", m.n_labels}}},
            {"parameters", flatten_params(m)},
            {"trained_steps", ckpt.trained_steps},
            {"schedule", schedule_config_to_json(ckpt.schedule)},
            {"prior", prior_to_json(ckpt.prior)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
        throw std::invalid_argument("unsupported checkpoint format_version " +
                                    std::to_string(version));
    }
    Checkpoint ckpt;
    Denoiser& m = ckpt.model;
    m.parameterization =
        parameterization_from_string(j.at("parameterization").get<std::string>());
    const std::vector<std::size_t> widths = j.at("widths").get<std::vector<std::size_t>>();
    require(widths.size() >= 3, "checkpoint: widths must list input, hidden, output");
    m.time_features = j.at("embeddings").at("time_features").get<std::size_t>();
    m.n_labels = j.at("embeddings").at("n_labels").get<std::size_t>();
    m.data_dim = widths.back();
    require(widths.front() == m.data_dim + m.time_features,
            "checkpoint: input width inconsistent with embeddings");

    m.layers.resize(widths.size() - 1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        m.layers[l].in = widths[l];
        m.layers[l].out = widths[l + 1];
        m.layers[l].w.assign(widths[l] * widths[l + 1], 0.0);
        m.layers[l].b.assign(widths[l + 1], 0.0);
    }
    if (m.n_labels > 0) {
        m.label_table.assign((m.n_labels + 1) * m.time_features, 0.0);
    }
    const Vec params = j.at("parameters").get<Vec>();
    unflatten_params(m, params);

    ckpt.schedule = schedule_from_json(j.at("schedule"));
    ckpt.prior = prior_from_json(j.at("prior"));
    ckpt.trained_steps = j.at("trained_steps").get<long>();
    require(ckpt.prior.dim() == m.data_dim, "checkpoint: prior dim mismatch");
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    write_json_file(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
    try {
        return checkpoint_from_json(read_json_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("bad checkpoint in " + path + ": " + e.what());
    }
}

}  // namespace modal
