#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "modal/checkpoint.hpp"
#include "modal/csv.hpp"
#include "modal/jsonio.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/schedule.hpp"

using namespace modal;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(bool(out));
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("doubles round-trip bit-exactly through their text form") {
    const double values[] = {0.1,    1.0 / 3.0, 3.14159265358979323846, -1e-300,
                             1e300,  2.0,       -0.0,
                             5e-324, 1.7976931348623157e308};
    for (double v : values) {
        const std::string s = format_double(v);
        char* end = nullptr;
        const double back = std::strtod(s.c_str(), &end);
        CHECK(*end == '\0');
        CHECK(back == v);
        CHECK(std::signbit(back) == std::signbit(v));
    }
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("dataset CSV round-trips points, labels, and the label count") {
    LabeledDataset data;
    data.dim = 3;
    data.k = 3;
    data.n = 3;
    data.points = {0.1,   1.0 / 3.0, -1e-300, 3.14159265358979323846, -2.5,
                   1e300, 0.0,       -0.25,   7.0};
    data.labels = {0, 2, 1};

    const TempFile f("tmp_dataset_roundtrip.csv");
    write_dataset_csv(f.path, data);
    const LabeledDataset back = read_dataset_csv(f.path);

    CHECK(back.dim == 3);
    CHECK(back.n == 3);
    CHECK(back.k == 3);
    REQUIRE(back.points.size() == data.points.size());
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        CHECK(back.points[i] == data.points[i]);
    }
    CHECK(back.labels == data.labels);
}

TEST_CASE("the label count is inferred from the largest label seen") {
    const TempFile f("tmp_dataset_k.csv");
    write_text(f.path, "x1,label\n0.5,0\n1.5,4\n");
    const LabeledDataset back = read_dataset_csv(f.path);
    CHECK(back.k == 5);
    CHECK(back.dim == 1);
    CHECK(back.n == 2);
}

TEST_CASE("malformed dataset CSVs are rejected") {
    CHECK_THROWS_AS(read_dataset_csv("tmp_does_not_exist.csv"), std::invalid_argument);

    const TempFile f("tmp_dataset_bad.csv");

    write_text(f.path, "");
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2\n0.5,1.5\n");  // header must end in label
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2,label\n0.5,1.5\n");  // short row
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2,label\n0.5,1.5,0,7\n");  // long row
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2,label\n0.5,abc,0\n");  // non-numeric cell
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2,label\n0.5,1.5,-1\n");  // negative label
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);

    write_text(f.path, "x1,x2,label\n");  // no rows
    CHECK_THROWS_AS(read_dataset_csv(f.path), std::invalid_argument);
}

TEST_CASE("sample tables round-trip including unrequested labels") {
    SampleTable table;
    table.dim = 2;
    table.points = {{0.1, -0.2}, {1.0 / 3.0, 1e-9}, {2.0, -3.0}};
    table.requested = {0, -1, 2};
    table.assigned = {0, 1, 2};

    const TempFile f("tmp_samples_roundtrip.csv");
    write_samples_csv(f.path, table);
    const SampleTable back = read_samples_csv(f.path);

    CHECK(back.dim == 2);
    REQUIRE(back.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.points[i] == table.points[i]);
    }
    CHECK(back.requested == table.requested);
    CHECK(back.assigned == table.assigned);

    SampleTable bad = table;
    bad.assigned.pop_back();
    CHECK_THROWS_AS(write_samples_csv(f.path, bad), std::invalid_argument);

    write_text(f.path, "x1,x2,requested_label\n0.1,0.2,0\n");
    CHECK_THROWS_AS(read_samples_csv(f.path), std::invalid_argument);
}

TEST_CASE("loss curves are written as exact step,loss rows") {
    const TempFile f("tmp_loss_curve.csv");
    write_loss_curve_csv(f.path, {{50, 0.5}, {100, 0.25}, {150, 0.125}});
    CHECK(read_text(f.path) == "step,loss\n50,0.5\n100,0.25\n150,0.125\n");
}

TEST_CASE("checkpoints restore parameters, schedule, and prior exactly") {
    Rng rng(41);
    DenoiserConfig mcfg;
    mcfg.data_dim = 2;
    mcfg.hidden = {8, 8};
    mcfg.time_features = 4;
    mcfg.n_labels = 3;
    mcfg.parameterization = Parameterization::noise;

    Checkpoint ckpt;
    ckpt.model = make_denoiser(mcfg, rng);
    ckpt.schedule = build_schedule(20, 1e-3, 0.1);
    ckpt.prior = ring_prior(3, 2, 2.0, 1.0, 0.5);
    ckpt.trained_steps = 123;

    const TempFile f("tmp_checkpoint.json");
    save_checkpoint(f.path, ckpt);
    const Checkpoint back = load_checkpoint(f.path);

    CHECK(back.trained_steps == 123);
    CHECK(back.model.data_dim == 2);
    CHECK(back.model.time_features == 4);
    CHECK(back.model.n_labels == 3);
    CHECK(back.model.parameterization == Parameterization::noise);
    CHECK(back.model.widths() == ckpt.model.widths());

    const Vec p0 = flatten_params(ckpt.model);
    const Vec p1 = flatten_params(back.model);
    REQUIRE(p0.size() == p1.size());
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == p1[i]);

    CHECK(back.schedule.T == 20);
    CHECK(back.schedule.beta_min == 1e-3);
    CHECK(back.schedule.beta_max == 0.1);
    for (int t = 0; t <= 20; ++t) {
        CHECK(back.schedule.alpha_bar(t) == ckpt.schedule.alpha_bar(t));
        CHECK(back.schedule.eta(t) == ckpt.schedule.eta(t));
    }

    REQUIRE(back.prior.k() == 3);
    CHECK(back.prior.source == ckpt.prior.source);
    CHECK(back.prior.delta == ckpt.prior.delta);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.prior.components[i].mean == ckpt.prior.components[i].mean);
        CHECK(back.prior.components[i].sigma == ckpt.prior.components[i].sigma);
        CHECK(back.prior.components[i].weight == ckpt.prior.components[i].weight);
    }

    // Saving the loaded checkpoint reproduces the file byte for byte.
    const TempFile f2("tmp_checkpoint_resave.json");
    save_checkpoint(f2.path, back);
    CHECK(read_text(f2.path) == read_text(f.path));
}

TEST_CASE("checkpoints with a foreign format version or missing fields fail") {
    Rng rng(43);
    DenoiserConfig mcfg;
    mcfg.data_dim = 1;
    mcfg.hidden = {4};
    mcfg.time_features = 2;

    Checkpoint ckpt;
    ckpt.model = make_denoiser(mcfg, rng);
    ckpt.schedule = build_schedule(5, 1e-3, 0.1);
    ckpt.prior = standard_prior(1);
    ckpt.trained_steps = 1;

    const TempFile f("tmp_checkpoint_bad.json");
    save_checkpoint(f.path, ckpt);

    nlohmann::json j = read_json_file(f.path);
    j["format_version"] = 999;
    write_json_file(f.path, j);
    CHECK_THROWS_AS(load_checkpoint(f.path), std::invalid_argument);

    j["format_version"] = kCheckpointFormatVersion;
    j.erase("parameters");
    write_json_file(f.path, j);
    CHECK_THROWS_AS(load_checkpoint(f.path), std::invalid_argument);

    CHECK_THROWS_AS(load_checkpoint("tmp_no_such_checkpoint.json"),
                    std::invalid_argument);
}

TEST_CASE("emitted JSON is sorted, indented, and 17-digit exact") {
    nlohmann::json j;
    j["b"] = 1;
    j["a"] = 0.1;
    j["c"] = {{"nested", 1.0 / 3.0}};
    const std::string text = to_json_text(j);
    CHECK(text ==
          "{\n"
          "  \"a\": 0.10000000000000001,\n"
          "  \"b\": 1,\n"
          "  \"c\": {\n"
          "    \"nested\": 0.33333333333333331\n"
          "  }\n"
          "}\n");

    nlohmann::json arr = nlohmann::json::array({1.5, 2});
    CHECK(to_json_text(arr) == "[\n  1.5,\n  2\n]\n");
    CHECK(to_json_text(nlohmann::json::object()) == "{}\n");

    nlohmann::json bad;
    bad["x"] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(to_json_text(bad), std::runtime_error);
}

TEST_CASE("JSON files round-trip and malformed input is rejected") {
    const TempFile f("tmp_config.json");
    nlohmann::json j;
    j["value"] = 0.1;
    j["name"] = "run";
    write_json_file(f.path, j);
    const nlohmann::json back = read_json_file(f.path);
    CHECK(back.at("value").get<double>() == 0.1);
    CHECK(back.at("name").get<std::string>() == "run");

    CHECK_THROWS_AS(read_json_file("tmp_no_such_file.json"), std::invalid_argument);
    write_text(f.path, "{ not json");
    CHECK_THROWS_AS(read_json_file(f.path), std::invalid_argument);
}
