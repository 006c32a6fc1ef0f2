#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modal/baselines.hpp"
#include "modal/checkpoint.hpp"
#include "modal/config.hpp"
#include "modal/csv.hpp"
#include "modal/diffusion.hpp"
#include "modal/jsonio.hpp"
#include "modal/metrics.hpp"
#include "modal/nn.hpp"
#include "modal/prior.hpp"
#include "modal/rng.hpp"
#include "modal/study.hpp"
#include "modal/svg.hpp"
#include "modal/verify.hpp"

namespace {

using modal::Vec;
using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--set", args.sets, "dotted-path override, e.g. training.steps=200");
    sub->add_option("--seed", args.seed, "global seed (overrides the config)");
    sub->add_option("--out", args.out, "output directory");
}

json load_effective(const CommonArgs& args) {
    json cfg = args.config_path.empty() ? json::object()
                                        : modal::read_json_file(args.config_path);
    if (!cfg.is_object()) {
        throw std::invalid_argument("config root must be a JSON object");
    }
    for (const std::string& s : args.sets) modal::apply_override(cfg, s);
    if (args.seed) cfg["seed"] = *args.seed;
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    return cfg;
}

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

// The output directory is delivery, not configuration: the echo omits it so
// identical runs into different directories stay byte-identical.
void echo_config(const std::string& out, const json& cfg, const std::string& command) {
    json copy = cfg;
    copy["command"] = command;
    modal::write_json_file(out + "/effective_config.json", copy);
}

json block(const json& cfg, const char* key) {
    return cfg.contains(key) ? cfg.at(key) : json::object();
}

std::vector<Vec> dataset_points(const modal::LabeledDataset& data) {
    std::vector<Vec> pts;
    pts.reserve(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto row = data.row(i);
        pts.emplace_back(row.begin(), row.end());
    }
    return pts;
}

std::vector<bool> spurious_mask(const std::vector<Vec>& samples,
                                const modal::ModeGeometry& geom, double rho) {
    std::vector<bool> mask(samples.size(), false);
    const double cutoff = rho * geom.data_std;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double best = 1e300;
        for (const Vec& c : geom.centers) {
            best = std::min(best, modal::distance(samples[i], c));
        }
        mask[i] = best > cutoff;
    }
    return mask;
}

int cmd_gen(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed", "generator"}, "config");
    const modal::GeneratorConfig gen = modal::generator_from_config(block(cfg, "generator"));
    const modal::LabeledDataset data = modal::run_generator(gen, seed_of(cfg));
    modal::write_dataset_csv(out + "/dataset.csv", data);
    modal::write_json_file(out + "/dataset_provenance.json", json::parse(data.provenance));
    echo_config(out, cfg, "gen");
    std::cout << "wrote " << data.n << " points (dim " << data.dim << ", " << data.k
              << " labels) to " << out << "/dataset.csv\n";
    return 0;
}

int cmd_train(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed", "files", "schedule", "prior", "model", "training"},
                      "config");
    const json files = block(cfg, "files");
    modal::check_keys(files, {"dataset", "resume"}, "files");
    if (!files.contains("dataset")) {
        throw std::invalid_argument("train needs files.dataset");
    }
    const modal::LabeledDataset data =
        modal::read_dataset_csv(files.at("dataset").get<std::string>());

    modal::Rng rng(seed_of(cfg));
    modal::Checkpoint ckpt;
    std::vector<std::pair<long, double>> curve;

    if (files.contains("resume")) {
        for (const char* k : {"schedule", "prior", "model"}) {
            if (cfg.contains(k)) {
                throw std::invalid_argument(
                    std::string("resume takes its ") + k + " from the checkpoint; drop the '" +
                    k + "' block");
            }
        }
        ckpt = modal::load_checkpoint(files.at("resume").get<std::string>());
        modal::TrainConfig tc =
            modal::train_from_config(json::object(), block(cfg, "training"));
        tc.conditional = ckpt.model.conditional();
        tc.parameterization = ckpt.model.parameterization;
        tc.hidden.clear();  // architecture fixed by the checkpoint
        modal::train_more(ckpt.model, data, ckpt.prior, ckpt.schedule, tc, rng, curve,
                          ckpt.trained_steps);
        ckpt.trained_steps += tc.steps;
    } else {
        const modal::NoiseSchedule schedule =
            modal::schedule_from_config(block(cfg, "schedule"));
        const modal::MixturePrior prior =
            modal::prior_from_config(block(cfg, "prior"), &data);
        const modal::TrainConfig tc =
            modal::train_from_config(block(cfg, "model"), block(cfg, "training"));
        modal::TrainResult res = modal::train_model(data, prior, schedule, tc, rng);
        ckpt.model = std::move(res.model);
        ckpt.schedule = schedule;
        ckpt.prior = prior;
        ckpt.trained_steps = tc.steps;
        curve = std::move(res.loss_curve);
    }

    modal::save_checkpoint(out + "/checkpoint.json", ckpt);
    modal::write_loss_curve_csv(out + "/loss_curve.csv", curve);
    echo_config(out, cfg, "train");
    std::cout << "trained " << ckpt.trained_steps << " total steps; final loss "
              << (curve.empty() ? 0.0 : curve.back().second) << "\n";
    return 0;
}

int cmd_sample(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed", "files", "sampling"}, "config");
    const json files = block(cfg, "files");
    modal::check_keys(files, {"checkpoint", "dataset"}, "files");
    if (!files.contains("checkpoint")) {
        throw std::invalid_argument("sample needs files.checkpoint");
    }
    const modal::Checkpoint ckpt =
        modal::load_checkpoint(files.at("checkpoint").get<std::string>());
    const modal::SamplingConfig sc = modal::sampling_from_config(block(cfg, "sampling"));

    modal::Rng rng(seed_of(cfg));
    modal::StepCost cost;
    modal::ChainOptions opt;
    opt.zero_reverse_noise = sc.zero_reverse_noise;
    opt.clip = sc.clip;
    opt.cost = &cost;

    modal::SampleTable table;
    table.dim = ckpt.model.data_dim;

    if (sc.guidance.kind == modal::GuidanceKind::none) {
        const auto draw = [&](const modal::PriorSelector& sel, int requested) {
            modal::ChainResult r =
                modal::sample_chain(ckpt.model, ckpt.prior, sel, {}, ckpt.schedule, rng, opt);
            table.points.push_back(std::move(r.x0));
            table.requested.push_back(requested);
            table.assigned.push_back(static_cast<int>(r.component));
        };
        if (sc.selector == "mixture") {
            for (std::size_t i = 0; i < sc.n; ++i) {
                draw(modal::PriorSelector::mixture(), -1);
            }
        } else if (sc.selector == "component") {
            for (std::size_t i = 0; i < sc.n; ++i) {
                draw(modal::PriorSelector::component(sc.component),
                     static_cast<int>(sc.component));
            }
        } else {  // per_component
            for (std::size_t comp = 0; comp < ckpt.prior.k(); ++comp) {
                for (std::size_t i = 0; i < sc.n; ++i) {
                    draw(modal::PriorSelector::component(comp), static_cast<int>(comp));
                }
            }
        }
    } else {
        if (ckpt.prior.k() != 1) {
            throw std::invalid_argument(
                "guidance baselines run over the single-component standard prior");
        }
        if (sc.selector != "mixture") {
            throw std::invalid_argument("guidance ignores selectors; drop the selector");
        }
        const int requested = static_cast<int>(sc.guidance.target_label);
        if (sc.guidance.kind == modal::GuidanceKind::cg) {
            if (!files.contains("dataset")) {
                throw std::invalid_argument(
                    "cg guidance needs files.dataset for classifier centers");
            }
            const modal::LabeledDataset data =
                modal::read_dataset_csv(files.at("dataset").get<std::string>());
            const modal::ModeGeometry geom = modal::geometry_from_dataset(data);
            modal::SoftClassifier clf;
            clf.centers = geom.centers;
            clf.temperature = sc.temperature > 0.0
                                  ? sc.temperature
                                  : static_cast<double>(data.dim) * geom.data_std *
                                        geom.data_std;
            for (std::size_t i = 0; i < sc.n; ++i) {
                table.points.push_back(
                    modal::cg_sample(ckpt.model, clf, sc.guidance, ckpt.schedule, rng, opt));
                table.requested.push_back(requested);
                table.assigned.push_back(0);
            }
        } else {
            for (std::size_t i = 0; i < sc.n; ++i) {
                table.points.push_back(
                    modal::cfg_sample(ckpt.model, sc.guidance, ckpt.schedule, rng, opt));
                table.requested.push_back(requested);
                table.assigned.push_back(0);
            }
        }
    }

    modal::write_samples_csv(out + "/samples.csv", table);
    modal::write_json_file(out + "/sample_stats.json",
                           {{"chains", table.points.size()},
                            {"model_evals", cost.model_evals},
                            {"classifier_grads", cost.classifier_grads}});
    if (sc.svg && table.dim == 2) {
        std::vector<int> colors(table.points.size());
        for (std::size_t i = 0; i < colors.size(); ++i) {
            colors[i] = table.requested[i] >= 0 ? table.requested[i] : table.assigned[i];
        }
        modal::ScatterOptions sopt;
        sopt.limit = sc.svg_limit;
        sopt.title = "samples";
        modal::write_scatter_svg(out + "/samples.svg", table.points, colors, sopt);
    }
    echo_config(out, cfg, "sample");
    std::cout << "wrote " << table.points.size() << " samples to " << out
              << "/samples.csv (" << cost.model_evals << " model evals)\n";
    return 0;
}

int cmd_eval(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed", "files", "eval"}, "config");
    const json files = block(cfg, "files");
    modal::check_keys(files, {"samples", "dataset"}, "files");
    if (!files.contains("samples") || !files.contains("dataset")) {
        throw std::invalid_argument("eval needs files.samples and files.dataset");
    }
    const json eval_block = block(cfg, "eval");
    modal::check_keys(eval_block, {"rho"}, "eval");
    const double rho = eval_block.contains("rho") ? eval_block.at("rho").get<double>() : 3.0;

    const modal::SampleTable table =
        modal::read_samples_csv(files.at("samples").get<std::string>());
    const modal::LabeledDataset data =
        modal::read_dataset_csv(files.at("dataset").get<std::string>());
    const modal::EvalReport rep =
        modal::evaluate_samples(table.points, table.requested, data, rho);

    modal::write_json_file(out + "/eval_report.json",
                           {{"acc", rep.acc},
                            {"acc_per_mode", rep.acc_per_mode},
                            {"n_per_mode", rep.n_per_mode},
                            {"spurious", rep.spurious},
                            {"per_mode_energy", rep.per_mode_energy},
                            {"n_samples", rep.n_samples},
                            {"rho", rho}});

    std::string csv = "mode,requested_n,acc,energy\n";
    for (std::size_t m = 0; m < rep.acc_per_mode.size(); ++m) {
        csv += std::to_string(m) + "," + std::to_string(rep.n_per_mode[m]) + "," +
               modal::format_double(rep.acc_per_mode[m]) + "," +
               modal::format_double(rep.per_mode_energy[m]) + "\n";
    }
    csv += "all," + std::to_string(rep.n_samples) + "," + modal::format_double(rep.acc) +
           ",\n";
    std::ofstream csv_out(out + "/eval_report.csv", std::ios::binary);
    if (!csv_out) throw std::invalid_argument("cannot write " + out + "/eval_report.csv");
    csv_out << csv;

    echo_config(out, cfg, "eval");
    std::cout << "acc " << rep.acc << ", spurious " << rep.spurious << " over "
              << rep.n_samples << " samples\n";
    return 0;
}

int cmd_verify(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed"}, "config");
    const std::vector<modal::CheckResult> checks = modal::run_verification(seed_of(cfg));

    bool all_pass = true;
    json report = json::array();
    for (const modal::CheckResult& c : checks) {
        all_pass = all_pass && c.pass;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (measured "
                  << c.max_error << ", tolerance " << c.tolerance << ")\n";
        report.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"max_error", c.max_error},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    }
    modal::write_json_file(out + "/verify_report.json",
                           {{"checks", report}, {"pass", all_pass}});
    echo_config(out, cfg, "verify");
    std::cout << (all_pass ? "all checks passed\n" : "verification FAILED\n");
    return all_pass ? 0 : 2;
}

int cmd_repro_toy(const json& cfg, const std::string& out) {
    modal::check_keys(cfg, {"seed", "study"}, "config");
    const modal::ToyStudyConfig sc =
        modal::study_from_config(block(cfg, "study"), seed_of(cfg));
    const modal::StudyResult res =
        modal::run_toy_study(sc, [](const std::string& line) { std::cout << line << "\n"; });

    std::filesystem::create_directories(out + "/figures");
    const modal::ModeGeometry geom = modal::geometry_from_dataset(res.data);

    {
        modal::ScatterOptions sopt;
        sopt.title = "data";
        modal::write_scatter_svg(out + "/figures/data.svg", dataset_points(res.data),
                                 res.data.labels, sopt);
    }
    json arms = json::array();
    std::string csv = "arm,delta,final_loss,acc,spurious,mean_energy\n";
    for (const modal::StudyArm& arm : res.arms) {
        modal::ScatterOptions sopt;
        sopt.title = arm.name;
        sopt.highlight = spurious_mask(arm.samples, geom, sc.rho);
        std::vector<int> colors(arm.samples.size());
        for (std::size_t i = 0; i < colors.size(); ++i) {
            colors[i] = arm.requested[i] >= 0 ? arm.requested[i] : arm.assigned[i];
        }
        modal::write_scatter_svg(out + "/figures/" + arm.name + ".svg", arm.samples,
                                 colors, sopt);

        arms.push_back({{"name", arm.name},
                        {"delta", arm.delta},
                        {"final_loss", arm.final_loss},
                        {"acc", arm.report.acc},
                        {"acc_per_mode", arm.report.acc_per_mode},
                        {"n_per_mode", arm.report.n_per_mode},
                        {"spurious", arm.report.spurious},
                        {"per_mode_energy", arm.report.per_mode_energy},
                        {"mean_energy", arm.mean_energy}});
        csv += arm.name + "," + modal::format_double(arm.delta) + "," +
               modal::format_double(arm.final_loss) + "," +
               modal::format_double(arm.report.acc) + "," +
               modal::format_double(arm.report.spurious) + "," +
               modal::format_double(arm.mean_energy) + "\n";
    }
    modal::write_json_file(out + "/study_report.json", {{"arms", arms}});
    std::ofstream csv_out(out + "/summary.csv", std::ios::binary);
    if (!csv_out) throw std::invalid_argument("cannot write " + out + "/summary.csv");
    csv_out << csv;

    echo_config(out, cfg, "repro-toy");
    std::cout << "study complete; summary at " << out << "/summary.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modal-coupled diffusion: datasets, training, sampling, verification"};
    app.require_subcommand(1);

    struct Entry {
        CLI::App* sub;
        CommonArgs args;
        std::function<int(const json&, const std::string&)> fn;
    };
    std::list<Entry> entries;  // stable addresses: CLI11 keeps pointers to args

    const auto add = [&](const char* name, const char* help,
                         std::function<int(const json&, const std::string&)> fn) {
        Entry e;
        e.sub = app.add_subcommand(name, help);
        e.fn = std::move(fn);
        entries.push_back(std::move(e));
        add_common(entries.back().sub, entries.back().args);
    };

    add("gen", "generate a labeled dataset CSV", cmd_gen);
    add("train", "train a denoiser and write a checkpoint", cmd_train);
    add("sample", "run reverse chains from a checkpoint", cmd_sample);
    add("eval", "score a samples CSV against a dataset", cmd_eval);
    add("verify", "run the closed-form identity checks", cmd_verify);
    add("repro-toy", "four-mode comparison study with figures", cmd_repro_toy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (Entry& e : entries) {
        if (!e.sub->parsed()) continue;
        try {
            const json cfg = load_effective(e.args);
            std::filesystem::create_directories(e.args.out);
            return e.fn(cfg, e.args.out);
        } catch (const std::runtime_error& ex) {
            std::cerr << "error: " << ex.what() << "\n";
            return 2;
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << "\n";
            return 1;
        }
    }
    return 1;
}
