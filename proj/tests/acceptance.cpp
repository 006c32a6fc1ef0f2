// Acceptance gate: one line per criterion, nonzero exit if any fail.
// Tolerances are pinned inline next to each check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "modal/baselines.hpp"
#include "modal/datagen.hpp"
#include "modal/diffusion.hpp"
#include "modal/metrics.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/schedule.hpp"
#include "modal/study.hpp"
#include "modal/verify.hpp"

namespace fs = std::filesystem;
using namespace modal;

namespace {

constexpr std::uint64_t kOracleSeed = 1234;
constexpr std::uint64_t kStudySeed = 7;

struct Criterion {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Criterion from_checks(std::initializer_list<CheckResult> checks) {
    Criterion c;
    c.pass = true;
    std::string sep;
    for (const CheckResult& r : checks) {
        c.pass = c.pass && r.pass;
        c.detail += sep + r.name + " measured " + fmt(r.max_error) + " vs tol " +
                    fmt(r.tolerance);
        sep = "; ";
    }
    return c;
}

// ---- criterion 9: finite-difference gradient audit ----

double max_fd_gradient_error(Denoiser& model, std::span<const TrainingExample> batch) {
    const auto [loss, grads] = backward(model, batch);
    if (!std::isfinite(loss)) return 1e9;

    Vec flat_grads;
    for (const LinearLayer& l : grads.layers) {
        flat_grads.insert(flat_grads.end(), l.w.begin(), l.w.end());
        flat_grads.insert(flat_grads.end(), l.b.begin(), l.b.end());
    }
    flat_grads.insert(flat_grads.end(), grads.label_table.begin(),
                      grads.label_table.end());

    Vec params = flatten_params(model);
    if (params.size() != flat_grads.size()) return 1e9;

    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double theta = params[p];
        const double h = 1e-6 * std::max(1.0, std::abs(theta));
        params[p] = theta + h;
        unflatten_params(model, params);
        const double up = batch_loss(model, batch);
        params[p] = theta - h;
        unflatten_params(model, params);
        const double down = batch_loss(model, batch);
        params[p] = theta;

        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(flat_grads[p]), 1e-5});
        worst = std::max(worst, std::abs(fd - flat_grads[p]) / denom);
    }
    unflatten_params(model, params);
    return worst;
}

Criterion criterion_gradients() {
    struct Instance {
        std::size_t data_dim;
        std::vector<std::size_t> hidden;
        std::size_t time_features;
        std::size_t n_labels;
        Parameterization param;
    };
    const Instance instances[] = {
        {2, {8, 6}, 4, 0, Parameterization::clean},
        {3, {10}, 6, 0, Parameterization::noise},
        {2, {8}, 4, 3, Parameterization::clean},
        {1, {6, 6}, 2, 2, Parameterization::noise},
        {4, {12}, 8, 0, Parameterization::clean},
        {2, {5, 5, 5}, 4, 2, Parameterization::clean},
    };

    Rng rng(kOracleSeed + 9);
    double worst = 0.0;
    for (const Instance& inst : instances) {
        DenoiserConfig cfg;
        cfg.data_dim = inst.data_dim;
        cfg.hidden = inst.hidden;
        cfg.time_features = inst.time_features;
        cfg.n_labels = inst.n_labels;
        cfg.parameterization = inst.param;
        Denoiser model = make_denoiser(cfg, rng);

        std::vector<TrainingExample> batch(5);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            batch[i].x_t = rng.normal_vec(inst.data_dim);
            batch[i].t = 1 + static_cast<int>(rng.index(30));
            batch[i].target = rng.normal_vec(inst.data_dim);
            for (double& v : batch[i].target) v *= 2.0;
            if (inst.n_labels > 0) {
                if (i == 0) {
                    batch[i].label = std::nullopt;  // exercise the null row
                } else {
                    batch[i].label = static_cast<int>(rng.index(inst.n_labels));
                }
            }
        }
        worst = std::max(worst, max_fd_gradient_error(model, batch));
    }
    Criterion c;
    c.pass = worst < 1e-4;
    c.detail = "6 model/batch instances, max relative error " + fmt(worst) +
               " vs tol 0.0001";
    return c;
}

// ---- criteria 10 and 11 share one toy study ----

const StudyArm& find_arm(const StudyResult& res, const std::string& name) {
    for (const StudyArm& arm : res.arms) {
        if (arm.name == name) return arm;
    }
    throw std::runtime_error("missing study arm " + name);
}

Criterion criterion_toy_study(const StudyResult& res) {
    const StudyArm& ddpm = find_arm(res, "ddpm");
    const StudyArm& good = find_arm(res, "modal_good");
    const StudyArm& small = find_arm(res, "modal_small");
    const StudyArm& large = find_arm(res, "modal_large");

    double min_acc = 1.0;
    bool counts_ok = true;
    for (std::size_t m = 0; m < good.report.acc_per_mode.size(); ++m) {
        min_acc = std::min(min_acc, good.report.acc_per_mode[m]);
        counts_ok = counts_ok && good.report.n_per_mode[m] == 1000;
    }
    const bool acc_ok = counts_ok && min_acc >= 0.95;
    const bool spurious_ok = good.report.spurious < ddpm.report.spurious;
    const bool energy_ok = small.mean_energy > good.mean_energy &&
                           large.mean_energy > good.mean_energy;

    Criterion c;
    c.pass = acc_ok && spurious_ok && energy_ok;
    c.detail = "min per-mode acc " + fmt(min_acc) + " vs 0.95 over 1000/mode; spurious " +
               fmt(good.report.spurious) + " < baseline " + fmt(ddpm.report.spurious) +
               "; mean energy good " + fmt(good.mean_energy) + " vs small " +
               fmt(small.mean_energy) + " and large " + fmt(large.mean_energy);
    return c;
}

double sweep_accuracy(const std::function<Vec(int, Rng&)>& draw_target,
                      const ModeGeometry& geo, std::size_t per_mode,
                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> samples;
    std::vector<int> requested;
    for (int m = 0; m < static_cast<int>(geo.centers.size()); ++m) {
        for (std::size_t i = 0; i < per_mode; ++i) {
            samples.push_back(draw_target(m, rng));
            requested.push_back(m);
        }
    }
    return mode_accuracy(samples, requested, geo.centers, geo.sigmas).acc;
}

Criterion criterion_guidance(const StudyResult& res) {
    const NoiseSchedule& s = res.schedule;
    const Denoiser& base = find_arm(res, "ddpm").model;
    const ModeGeometry geo = geometry_from_dataset(res.data);

    SoftClassifier clf;
    clf.centers = geo.centers;
    clf.temperature = static_cast<double>(res.data.dim) * geo.data_std * geo.data_std;

    // cg at weight 0 must match the unguided sampler bit for bit.
    bool cg_identity = true;
    {
        Rng a(kStudySeed + 100), b(kStudySeed + 100);
        for (int rep = 0; rep < 5; ++rep) {
            const GuidanceConfig g{GuidanceKind::cg, 0.0, std::size_t(rep % 4)};
            const Vec guided = cg_sample(base, clf, g, s, a);
            const Vec plain = ddpm_sample(base, s, b);
            for (std::size_t j = 0; j < guided.size(); ++j) {
                cg_identity = cg_identity && guided[j] == plain[j];
            }
        }
    }

    // Conditional model over the plain prior for cfg (null token via dropout).
    TrainConfig tc;
    tc.steps = 1500;
    tc.batch = 128;
    tc.conditional = true;
    tc.label_dropout = 0.1;
    tc.hidden = {32, 32};
    Rng train_rng(kStudySeed + 200);
    const MixturePrior plain_prior = standard_prior(res.data.dim);
    const Denoiser cond =
        train_model(res.data, plain_prior, s, tc, train_rng).model;

    // cfg at weight 0 must match the null-token chain bit for bit.
    bool cfg_identity = true;
    {
        Rng a(kStudySeed + 300), b(kStudySeed + 300);
        for (int rep = 0; rep < 5; ++rep) {
            const GuidanceConfig g{GuidanceKind::cfg, 0.0, std::size_t(rep % 4)};
            const Vec guided = cfg_sample(cond, g, s, a);
            const Vec plain =
                sample_chain(cond, plain_prior, PriorSelector::component(0), {}, s, b)
                    .x0;
            for (std::size_t j = 0; j < guided.size(); ++j) {
                cfg_identity = cfg_identity && guided[j] == plain[j];
            }
        }
    }

    // Directional sweeps under common random numbers: 250 chains per mode.
    const std::size_t per_mode = 250;
    const auto cg_acc = [&](double weight) {
        return sweep_accuracy(
            [&](int target, Rng& rng) {
                const GuidanceConfig g{GuidanceKind::cg, weight, std::size_t(target)};
                return cg_sample(base, clf, g, s, rng);
            },
            geo, per_mode, kStudySeed + 400);
    };
    const auto cfg_acc = [&](double weight) {
        return sweep_accuracy(
            [&](int target, Rng& rng) {
                const GuidanceConfig g{GuidanceKind::cfg, weight, std::size_t(target)};
                return cfg_sample(cond, g, s, rng);
            },
            geo, per_mode, kStudySeed + 500);
    };
    const double cg1 = cg_acc(1.0), cg10 = cg_acc(10.0);
    const double cfg1 = cfg_acc(1.0), cfg105 = cfg_acc(1.05);
    const bool cg_dir = cg10 >= cg1;
    const bool cfg_dir = cfg105 >= cfg1;

    Criterion c;
    c.pass = cg_identity && cfg_identity && cg_dir && cfg_dir;
    c.detail = std::string("zero-weight bit identities cg ") +
               (cg_identity ? "ok" : "BROKEN") + ", cfg " +
               (cfg_identity ? "ok" : "BROKEN") + "; cg acc " + fmt(cg1) + " -> " +
               fmt(cg10) + " at weight 1 -> 10; cfg acc " + fmt(cfg1) + " -> " +
               fmt(cfg105) + " at weight 1 -> 1.05";
    return c;
}

// ---- criterion 12: CLI determinism ----

std::string find_cli(const char* argv0) {
    if (const char* env = std::getenv("MODAL_CLI")) {
        if (fs::exists(env)) return env;
    }
    const fs::path sibling = fs::path(argv0).parent_path() / ".." / "modal-diffusion";
    if (fs::exists(sibling)) return sibling.string();
    return {};
}

bool run_cli(const std::string& cli, const std::string& args, const std::string& out) {
    const std::string cmd = cli + " " + args + " --out " + out + " > " + out +
                            ".log 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool same_file_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool same_dir_bytes(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
    }
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        why = "file sets differ under " + a.string() + " and " + b.string();
        return false;
    }
    if (rel_a.empty()) {
        why = "no output files under " + a.string();
        return false;
    }
    for (const fs::path& rel : rel_a) {
        if (!same_file_bytes(a / rel, b / rel)) {
            why = "bytes differ: " + (a / rel).string() + " vs " + (b / rel).string();
            return false;
        }
    }
    return true;
}

Criterion criterion_cli_determinism(const char* argv0) {
    Criterion c;
    const std::string cli = find_cli(argv0);
    if (cli.empty()) {
        c.detail = "CLI binary not found (set MODAL_CLI)";
        return c;
    }

    const fs::path root = "acceptance_cli";
    std::error_code ec;
    fs::remove_all(root, ec);
    fs::create_directories(root);
    const auto dir = [&](const std::string& name) { return (root / name).string(); };

    struct Step {
        std::string name;
        std::string args;
    };
    const std::vector<Step> steps = {
        {"gen",
         "gen --seed 3 --set 'generator.kind=four_mode' --set 'generator.n_per_mode=40'"},
        {"train",
         "train --seed 4 --set 'files.dataset=" + dir("gen_1") + "/dataset.csv'"
         " --set 'schedule.T=10' --set 'schedule.beta_max=0.3'"
         " --set 'prior.kind=ring' --set 'prior.k=4' --set 'prior.delta=4'"
         " --set 'model.hidden=[8,8]' --set 'model.time_features=4'"
         " --set 'training.steps=30' --set 'training.batch=16'"},
        {"sample",
         "sample --seed 5 --set 'files.checkpoint=" + dir("train_1") + "/checkpoint.json'"
         " --set 'sampling.n=25' --set 'sampling.selector=per_component'"},
        {"eval",
         "eval --seed 6 --set 'files.samples=" + dir("sample_1") + "/samples.csv'"
         " --set 'files.dataset=" + dir("gen_1") + "/dataset.csv'"},
        {"verify", "verify --seed 7"},
        {"repro-toy",
         "repro-toy --seed 8 --set 'study.data.n_per_mode=25' --set 'study.T=12'"
         " --set 'study.training.steps=40' --set 'study.training.batch=16'"
         " --set 'study.training.hidden=[8]'"
         " --set 'study.n_cond_per_mode=15' --set 'study.n_uncond=60'"},
    };

    for (const Step& step : steps) {
        const std::string out1 = dir(step.name + "_1");
        const std::string out2 = dir(step.name + "_2");
        if (!run_cli(cli, step.args, out1) || !run_cli(cli, step.args, out2)) {
            c.detail = step.name + " exited nonzero (see " + out1 + ".log)";
            return c;
        }
        std::string why;
        if (!same_dir_bytes(out1, out2, why)) {
            c.detail = step.name + " rerun not byte-identical: " + why;
            return c;
        }
    }
    c.pass = true;
    c.detail = "gen, train, sample, eval, verify, repro-toy each rerun byte-identical";
    return c;
}

}  // namespace

int main(int, char** argv) {
    struct Row {
        std::string name;
        std::function<Criterion()> run;
    };

    // The study is shared by criteria 10 and 11.
    std::optional<StudyResult> study;
    const auto the_study = [&]() -> const StudyResult& {
        if (!study) {
            ToyStudyConfig cfg;
            cfg.seed = kStudySeed;
            study = run_toy_study(cfg);
        }
        return *study;
    };

    const std::vector<Row> rows = {
        {"eta sequence identity", [] { return from_checks({check_eta_recurrence()}); }},
        {"forward marginal Monte Carlo",
         [] { return from_checks({check_marginal_monte_carlo(kOracleSeed)}); }},
        {"terminal coupling",
         [] { return from_checks({check_terminal_coupling(kOracleSeed)}); }},
        {"reverse posterior oracle", [] { return from_checks({check_bayes_grid()}); }},
        {"parameterization equivalence",
         [] { return from_checks({check_parameterization_equivalence(kOracleSeed)}); }},
        {"plain-process reduction",
         [] {
             return from_checks({check_ddpm_formula_reduction(kOracleSeed),
                                 check_ddpm_sampler_reduction(kOracleSeed)});
         }},
        {"simplex geometry", [] { return from_checks({check_simplex_geometry()}); }},
        {"chi-square quantile",
         [] {
             return from_checks(
                 {check_chi_square_closed_form(), check_chi_square_integration()});
         }},
        {"gradient correctness", criterion_gradients},
        {"toy study mode control",
         [&] { return criterion_toy_study(the_study()); }},
        {"guidance sanity", [&] { return criterion_guidance(the_study()); }},
        {"CLI determinism", [&] { return criterion_cli_determinism(argv[0]); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Criterion c;
        try {
            c = rows[i].run();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        if (!c.pass) ++failures;
        std::printf("[%s] criterion %2zu %s (%s)\n", c.pass ? "PASS" : "FAIL", i + 1,
                    rows[i].name.c_str(), c.detail.c_str());
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all 12 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", failures);
    return 1;
}
