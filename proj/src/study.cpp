#include "modal/study.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "modal/baselines.hpp"
#include "modal/rng.hpp"

namespace modal {

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

StudyArm run_arm(std::string name, double delta, MixturePrior prior,
                 const LabeledDataset& data, const NoiseSchedule& s,
                 const ToyStudyConfig& cfg, std::uint64_t train_seed,
                 std::uint64_t sample_seed, const StudyLog& log) {
    StudyArm arm;
    arm.name = std::move(name);
    arm.delta = delta;
    arm.prior = std::move(prior);

    if (log) log("training " + arm.name);
    Rng train_rng(train_seed);
    TrainResult trained = train_model(data, arm.prior, s, cfg.train, train_rng);
    arm.model = std::move(trained.model);
    arm.final_loss =
        trained.loss_curve.empty() ? 0.0 : trained.loss_curve.back().second;

    Rng sample_rng(sample_seed);
    if (arm.prior.k() > 1) {
        for (std::size_t comp = 0; comp < arm.prior.k(); ++comp) {
            for (std::size_t i = 0; i < cfg.n_cond_per_mode; ++i) {
                ChainResult r = sample_chain(arm.model, arm.prior,
                                             PriorSelector::component(comp), {}, s,
                                             sample_rng);
                arm.samples.push_back(std::move(r.x0));
                arm.requested.push_back(static_cast<int>(comp));
                arm.assigned.push_back(static_cast<int>(r.component));
            }
        }
    } else {
        for (std::size_t i = 0; i < cfg.n_uncond; ++i) {
            ChainResult r = sample_chain(arm.model, arm.prior,
                                         PriorSelector::component(0), {}, s,
                                         sample_rng);
            arm.samples.push_back(std::move(r.x0));
            arm.requested.push_back(-1);
        }
        const ModeGeometry geom = geometry_from_dataset(data);
        for (const Vec& x : arm.samples) {
            arm.assigned.push_back(hard_classify(x, geom.centers, geom.sigmas));
        }
    }

    arm.report = evaluate_samples(arm.samples, arm.requested, data, cfg.rho);
    arm.mean_energy = mean_of(arm.report.per_mode_energy);
    if (log) {
        log(arm.name + ": loss " + std::to_string(arm.final_loss) + ", acc " +
            std::to_string(arm.report.acc) + ", spurious " +
            std::to_string(arm.report.spurious) + ", mean energy " +
            std::to_string(arm.mean_energy));
    }
    return arm;
}

}  // namespace

StudyResult run_toy_study(const ToyStudyConfig& cfg, const StudyLog& log) {
    require(cfg.train.conditional == false,
            "run_toy_study: arms are unconditional models");

    StudyResult result;
    FourModeConfig data_cfg = cfg.data;
    data_cfg.seed = cfg.seed;
    result.data = gen_four_mode(data_cfg);
    result.schedule = build_schedule(cfg.T, cfg.beta_min, cfg.beta_max);

    // Component i sits at angle pi/4 + i * pi/2, matching the quadrant order
    // of the dataset labels.
    const double phase = std::atan(1.0);  // pi / 4
    const auto modal_prior = [&](double delta) {
        return ring_prior(4, 2, delta, cfg.prior_sigma, phase);
    };

    result.arms.push_back(run_arm("ddpm", 0.0, standard_prior(2), result.data,
                                  result.schedule, cfg, cfg.seed + 11,
                                  cfg.seed + 21, log));
    result.arms.push_back(run_arm("modal_small", cfg.small_delta,
                                  modal_prior(cfg.small_delta), result.data,
                                  result.schedule, cfg, cfg.seed + 12,
                                  cfg.seed + 22, log));
    result.arms.push_back(run_arm("modal_good", cfg.good_delta,
                                  modal_prior(cfg.good_delta), result.data,
                                  result.schedule, cfg, cfg.seed + 13,
                                  cfg.seed + 23, log));
    result.arms.push_back(run_arm("modal_large", cfg.large_delta,
                                  modal_prior(cfg.large_delta), result.data,
                                  result.schedule, cfg, cfg.seed + 14,
                                  cfg.seed + 24, log));
    return result;
}

}  // namespace modal
