#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "modal/config.hpp"
#include "modal/datagen.hpp"
#include "modal/prior.hpp"
#include "modal/schedule.hpp"

using namespace modal;
using nlohmann::json;

TEST_CASE("overrides create dotted paths and parse values as JSON") {
    json root;
    apply_override(root, "a.b.c=1.5");
    CHECK(root.at("a").at("b").at("c").get<double>() == 1.5);

    apply_override(root, "a.flag=true");
    CHECK(root.at("a").at("flag").get<bool>() == true);

    apply_override(root, "name=hello");
    CHECK(root.at("name").get<std::string>() == "hello");

    apply_override(root, "quoted=\"hi there\"");
    CHECK(root.at("quoted").get<std::string>() == "hi there");

    apply_override(root, "arr=[1,2,3]");
    CHECK(root.at("arr").get<std::vector<int>>() == std::vector<int>{1, 2, 3});

    apply_override(root, "a.b.c=2");
    CHECK(root.at("a").at("b").at("c").get<int>() == 2);

    // A value containing '=' splits at the first one and stays a bare string.
    apply_override(root, "expr=x=y");
    CHECK(root.at("expr").get<std::string>() == "x=y");
}

TEST_CASE("malformed overrides are rejected") {
    json root;
    CHECK_THROWS_AS(apply_override(root, "noequals"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(root, "=5"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(root, "a..b=1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(root, "a.=1"), std::invalid_argument);

    apply_override(root, "a.b=3");
    CHECK_THROWS_AS(apply_override(root, "a.b.c.d=1"), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected with their context") {
    const json ok = {{"a", 1}, {"b", 2}};
    CHECK_NOTHROW(check_keys(ok, {"a", "b", "c"}, "block"));
    CHECK_THROWS_AS(check_keys(ok, {"a"}, "block"), std::invalid_argument);
    CHECK_NOTHROW(check_keys(json(), {"a"}, "block"));
    CHECK_THROWS_AS(check_keys(json::array(), {"a"}, "block"), std::invalid_argument);
    try {
        check_keys(ok, {"a"}, "myblock");
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("myblock") != std::string::npos);
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
}

TEST_CASE("generator config reproduces the direct generator output") {
    const json block = {
        {"kind", "four_mode"}, {"n_per_mode", 5}, {"center", 3.0}, {"std_dev", 0.1}};
    const GeneratorConfig cfg = generator_from_config(block);
    const LabeledDataset got = run_generator(cfg, 7);

    FourModeConfig direct;
    direct.n_per_mode = 5;
    direct.center = 3.0;
    direct.std_dev = 0.1;
    direct.seed = 7;
    const LabeledDataset want = gen_four_mode(direct);
    CHECK(got.points == want.points);
    CHECK(got.labels == want.labels);
    CHECK(got.k == want.k);
}

TEST_CASE("generator config covers the ring and maze families") {
    const json ring = {{"kind", "ring_modes"},
                       {"k", 3},
                       {"n_per_mode", 2},
                       {"radius", 5.0},
                       {"std_dev", 0.0}};
    const LabeledDataset rd = run_generator(generator_from_config(ring), 1);
    CHECK(rd.k == 3);
    CHECK(rd.n == 6);
    const std::vector<Vec> centers = ring_mode_centers(3, 5.0);
    for (std::size_t i = 0; i < rd.n; ++i) {
        const auto row = rd.row(i);
        const Vec& c = centers[std::size_t(rd.labels[i])];
        CHECK(row[0] == c[0]);
        CHECK(row[1] == c[1]);
    }

    const json maze = {{"kind", "maze_lite"},
                       {"n_layouts", 2},
                       {"horizon", 2},
                       {"n_per_layout", 1},
                       {"noise_std", 0.0}};
    const LabeledDataset md = run_generator(generator_from_config(maze), 1);
    CHECK(md.dim == 4);
    CHECK(md.n == 2);
    MazeLiteConfig direct;
    direct.n_layouts = 2;
    direct.horizon = 2;
    direct.n_per_layout = 1;
    direct.noise_std = 0.0;
    direct.seed = 1;
    const LabeledDataset mwant = gen_maze_lite(direct);
    CHECK(md.points == mwant.points);
    CHECK(md.labels == mwant.labels);

    CHECK_THROWS_AS(generator_from_config(json{{"kind", "mystery"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(generator_from_config(json{{"kind", "four_mode"}, {"radius", 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(generator_from_config(json{{"n_per_mode", "many"}}),
                    std::invalid_argument);
}

TEST_CASE("schedule config defaults and overrides") {
    const NoiseSchedule def = schedule_from_config(json());
    CHECK(def.T == 100);
    CHECK(def.beta_min == 1e-3);
    CHECK(def.beta_max == 0.2);
    CHECK(def.kind == ScheduleKind::linear);

    const NoiseSchedule s = schedule_from_config(json{{"T", 10}, {"beta_max", 0.3}});
    CHECK(s.T == 10);
    CHECK(s.beta_max == 0.3);

    CHECK_THROWS_AS(schedule_from_config(json{{"tee", 5}}), std::invalid_argument);
    CHECK_THROWS_AS(schedule_from_config(json{{"kind", "cosine"}}),
                    std::invalid_argument);
}

TEST_CASE("prior config builds every prior family") {
    const MixturePrior def = prior_from_config(json());
    CHECK(def.k() == 1);
    CHECK(def.dim() == 2);
    CHECK(def.components[0].mean == Vec{0.0, 0.0});
    CHECK(def.components[0].sigma == 1.0);
    CHECK(def.components[0].weight == 1.0);

    CHECK(prior_from_config(json{{"kind", "standard"}, {"dim", 5}}).dim() == 5);

    const MixturePrior sim = prior_from_config(
        json{{"kind", "simplex"}, {"k", 2}, {"dim", 2}, {"delta", 1.0}});
    REQUIRE(sim.k() == 2);
    CHECK(sim.source == PriorSource::simplex);
    CHECK(sim.delta == 1.0);
    const double h = std::sqrt(2.0) / 2.0;
    CHECK(sim.components[0].mean[0] == doctest::Approx(h).epsilon(1e-15));
    CHECK(sim.components[0].mean[1] == doctest::Approx(-h).epsilon(1e-15));
    CHECK(sim.components[0].weight == 0.5);

    const MixturePrior ring = prior_from_config(
        json{{"kind", "ring"}, {"k", 4}, {"dim", 2}, {"delta", 4.0}, {"phase", 0.3}});
    REQUIRE(ring.k() == 4);
    CHECK(ring.delta == 4.0);
    for (const PriorComponent& c : ring.components) {
        CHECK(norm(c.mean) == doctest::Approx(4.0).epsilon(1e-12));
    }

    LabeledDataset data;
    data.dim = 2;
    data.k = 2;
    data.n = 4;
    data.points = {0.0, 0.0, 2.0, 0.0, 5.0, 5.0, 5.0, 7.0};
    data.labels = {0, 0, 1, 1};
    const MixturePrior emp = prior_from_config(json{{"kind", "empirical"}}, &data);
    REQUIRE(emp.k() == 2);
    CHECK(emp.components[0].mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(emp.components[1].mean[1] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(emp.components[0].weight == 0.5);
    CHECK_THROWS_AS(prior_from_config(json{{"kind", "empirical"}}),
                    std::invalid_argument);

    const json manual = {
        {"kind", "manual"},
        {"components",
         json::array({{{"mean", {1.0, 2.0}}, {"sigma", 0.5}, {"weight", 0.6}},
                      {{"mean", {-1.0, 0.0}}, {"weight", 0.4}}})}};
    const MixturePrior man = prior_from_config(manual);
    REQUIRE(man.k() == 2);
    CHECK(man.components[0].sigma == 0.5);
    CHECK(man.components[1].sigma == 1.0);
    CHECK(man.components[0].mean == Vec{1.0, 2.0});

    CHECK_THROWS_AS(prior_from_config(json{{"kind", "manual"}}), std::invalid_argument);
    CHECK_THROWS_AS(prior_from_config(json{{"kind", "galactic"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(prior_from_config(json{{"kind", "standard"}, {"k", 3}}),
                    std::invalid_argument);
}

TEST_CASE("training config merges the model and training blocks") {
    const TrainConfig def = train_from_config(json(), json());
    CHECK(def.steps == 6000);
    CHECK(def.batch == 128);
    CHECK(def.adam.lr == 1e-3);
    CHECK(def.label_dropout == 0.1);
    CHECK(def.log_every == 50);
    CHECK(def.hidden == std::vector<std::size_t>{128, 128, 128});
    CHECK(def.time_features == 32);
    CHECK(def.parameterization == Parameterization::clean);
    CHECK_FALSE(def.conditional);

    const json model = {{"hidden", {16, 8}},
                        {"time_features", 8},
                        {"parameterization", "noise"},
                        {"conditional", true}};
    const json training = {{"steps", 100},
                           {"batch", 32},
                           {"lr", 0.01},
                           {"label_dropout", 0.25},
                           {"log_every", 10}};
    const TrainConfig cfg = train_from_config(model, training);
    CHECK(cfg.hidden == std::vector<std::size_t>{16, 8});
    CHECK(cfg.time_features == 8);
    CHECK(cfg.parameterization == Parameterization::noise);
    CHECK(cfg.conditional);
    CHECK(cfg.steps == 100);
    CHECK(cfg.batch == 32);
    CHECK(cfg.adam.lr == 0.01);
    CHECK(cfg.label_dropout == 0.25);
    CHECK(cfg.log_every == 10);

    CHECK_THROWS_AS(train_from_config(json{{"width", 4}}, json()),
                    std::invalid_argument);
    CHECK_THROWS_AS(train_from_config(json(), json{{"momentum", 0.9}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(train_from_config(json{{"parameterization", "score"}}, json()),
                    std::invalid_argument);
}

TEST_CASE("sampling config defaults, guidance block, and validation") {
    const SamplingConfig def = sampling_from_config(json());
    CHECK(def.n == 1000);
    CHECK(def.selector == "mixture");
    CHECK_FALSE(def.zero_reverse_noise);
    CHECK_FALSE(def.clip.has_value());
    CHECK(def.guidance.kind == GuidanceKind::none);
    CHECK(def.temperature == 0.0);
    CHECK(def.svg);
    CHECK(def.svg_limit == 8.0);

    const json block = {{"n", 50},
                        {"selector", "component"},
                        {"component", 2},
                        {"zero_reverse_noise", true},
                        {"clip", {-1.5, 2.5}},
                        {"guidance",
                         {{"kind", "cg"}, {"weight", 3.0}, {"target", 1},
                          {"temperature", 0.8}}},
                        {"svg", false},
                        {"svg_limit", 5.0}};
    const SamplingConfig cfg = sampling_from_config(block);
    CHECK(cfg.n == 50);
    CHECK(cfg.selector == "component");
    CHECK(cfg.component == 2);
    CHECK(cfg.zero_reverse_noise);
    REQUIRE(cfg.clip.has_value());
    CHECK(cfg.clip->first == -1.5);
    CHECK(cfg.clip->second == 2.5);
    CHECK(cfg.guidance.kind == GuidanceKind::cg);
    CHECK(cfg.guidance.weight == 3.0);
    CHECK(cfg.guidance.target_label == 1);
    CHECK(cfg.temperature == 0.8);
    CHECK_FALSE(cfg.svg);
    CHECK(cfg.svg_limit == 5.0);

    CHECK(sampling_from_config(json{{"selector", "per_component"}}).selector ==
          "per_component");

    CHECK_THROWS_AS(sampling_from_config(json{{"clip", {2.0, 1.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sampling_from_config(json{{"clip", {1.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sampling_from_config(json{{"selector", "weird"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sampling_from_config(json{{"count", 10}}), std::invalid_argument);
    CHECK_THROWS_AS(
        sampling_from_config(json{{"guidance", {{"strength", 2.0}}}}),
        std::invalid_argument);
}

TEST_CASE("study config defaults mirror the frozen study recipe") {
    const ToyStudyConfig def = study_from_config(json(), 42);
    CHECK(def.seed == 42);
    CHECK(def.T == 50);
    CHECK(def.beta_min == 1e-3);
    CHECK(def.beta_max == 0.35);
    CHECK(def.small_delta == 0.3);
    CHECK(def.good_delta == 4.0);
    CHECK(def.large_delta == 30.0);
    CHECK(def.prior_sigma == 1.0);
    CHECK(def.train.steps == 1500);
    CHECK(def.train.hidden == std::vector<std::size_t>{32, 32});
    CHECK(def.n_cond_per_mode == 1000);
    CHECK(def.n_uncond == 4000);
    CHECK(def.rho == 3.0);
    CHECK(def.data.n_per_mode == 1000);
    CHECK(def.data.center == 2.0);
    CHECK(def.data.std_dev == 0.3);

    const json block = {{"data", {{"n_per_mode", 10}}},
                        {"training", {{"steps", 20}, {"hidden", {8}}}},
                        {"T", 30}};
    const ToyStudyConfig cfg = study_from_config(block, 1);
    CHECK(cfg.data.n_per_mode == 10);
    CHECK(cfg.train.steps == 20);
    CHECK(cfg.train.hidden == std::vector<std::size_t>{8});
    CHECK(cfg.T == 30);
    CHECK(cfg.data.center == 2.0);

    CHECK_THROWS_AS(study_from_config(json{{"deltas", {1, 2}}}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(study_from_config(json{{"training", {{"momentum", 0.9}}}}, 1),
                    std::invalid_argument);
}
