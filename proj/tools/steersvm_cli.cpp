// Copyright 2026 The steersvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steersvm/errors.hpp"
#include "steersvm/io.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/pipeline.hpp"
#include "steersvm/qstate.hpp"
#include "steersvm/s4vm.hpp"
#include "steersvm/sdp_steer.hpp"
#include "steersvm/svm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace steersvm;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    unsigned threads = 0;
};

// Flags shared by the experiment subcommands.
struct ExperimentFlags {
    ExperimentConfig config;
    std::vector<std::uint64_t> seeds;
    std::string pool;
};

void add_s4vm_flags(CLI::App* cmd, S4vmParams& p) {
    cmd->add_option("--beta", p.beta, "class balance tolerance")->capture_default_str();
    cmd->add_option("--lambda", p.lambda, "loss weight in the improvement")->capture_default_str();
    cmd->add_option("--separators", p.separators, "number of kept separators T")->capture_default_str();
    cmd->add_option("--samples", p.samples, "candidate labelings sampled")->capture_default_str();
    cmd->add_option("--varsigma", p.varsigma, "separator diversity threshold")->capture_default_str();
    cmd->add_option("--local-search-rounds", p.local_search_rounds)->capture_default_str();
    cmd->add_option("--maxmin-iterations", p.maxmin_iterations)->capture_default_str();
}

void add_sdp_flags(CLI::App* cmd, SdpSettings& s) {
    cmd->add_option("--sdp-tolerance", s.tolerance)->capture_default_str();
    cmd->add_option("--sdp-max-iterations", s.max_iterations)->capture_default_str();
    cmd->add_option("--steerable-threshold", s.steerable_threshold)->capture_default_str();
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
    ExperimentConfig& c = f.config;
    cmd->add_option("--m", c.m, "measurement settings")->capture_default_str();
    cmd->add_option("--l", c.l, "labeled states per run")->capture_default_str();
    cmd->add_option("--u", c.u, "unlabeled states")->capture_default_str();
    cmd->add_option("--splits", c.splits, "unlabeled chunks M")->capture_default_str();
    cmd->add_option("--trials", c.trials, "measurement draws per label")->capture_default_str();
    cmd->add_option("--runs", c.n_runs, "labeled-set draws")->capture_default_str();
    cmd->add_option("--seeds", f.seeds, "experiment seeds (default: --seed)");
    cmd->add_option("--folds", c.grid.folds, "grid search folds on the labeled set")->capture_default_str();
    cmd->add_option("--incremental-folds", c.incremental_folds)->capture_default_str();
    cmd->add_option("--unlabeled-cost-ratio", c.unlabeled_cost_ratio)->capture_default_str();
    cmd->add_option("--pool", f.pool, "reuse a labeled CSV pool instead of generating states")
        ->check(CLI::ExistingFile);
    add_s4vm_flags(cmd, c.s4vm);
    add_sdp_flags(cmd, c.sdp);
}

ExperimentConfig resolve(ExperimentFlags& f, const Globals& g) {
    f.config.seeds = f.seeds.empty() ? std::vector<std::uint64_t>{g.seed} : f.seeds;
    f.config.validate();
    return f.config;
}

void write_manifest(const Globals& g, const std::string& command, json config, const std::vector<std::string>& inputs) {
    config["seed"] = g.seed;
    config["threads"] = thread_count();
    config["out_dir"] = g.out_dir;
    write_text((fs::path(g.out_dir) / "manifest.json").string(), make_manifest(command, config, inputs).dump(2) + "\n");
}

std::string out_path(const Globals& g, const char* name) { return (fs::path(g.out_dir) / name).string(); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

ComparisonTable compare_from_pool(const ExperimentConfig& config, const std::string& pool_path) {
    const Dataset pool = read_dataset_csv(pool_path);
    ComparisonTable all;
    for (std::uint64_t seed : config.seeds) {
        const ExperimentData data = split_pool(pool, config.u, config.l, config.n_runs, seed);
        const ComparisonTable t = compare_runs(config, data, seed);
        all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
    }
    if (all.rows.empty()) return all;
    all.max_difference = -INFINITY;
    for (const auto& r : all.rows) {
        all.max_difference = std::max(all.max_difference, r.difference());
        all.mean_difference += r.difference();
        all.mean_svm_error += r.svm.overall_error;
        all.mean_s4vm_error += r.s4vm.overall_error;
    }
    const double n = static_cast<double>(all.rows.size());
    all.mean_difference /= n;
    all.mean_svm_error /= n;
    all.mean_s4vm_error /= n;
    return all;
}

ComparisonTable run_comparison(const ExperimentConfig& config, const std::string& pool) {
    return pool.empty() ? compare_runs(config) : compare_from_pool(config, pool);
}

// Mean over runs, skipping runs where the class is absent from the truth.
json class_means(const ComparisonTable& t, bool svm) {
    double pos = 0.0, neg = 0.0;
    int npos = 0, nneg = 0;
    for (const auto& row : t.rows) {
        const ErrorReport& r = svm ? row.svm : row.s4vm;
        if (r.positive_error) pos += *r.positive_error, ++npos;
        if (r.negative_error) neg += *r.negative_error, ++nneg;
    }
    return {{"pos_error", npos ? json(pos / npos) : json(nullptr)},
            {"neg_error", nneg ? json(neg / nneg) : json(nullptr)}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steersvm: steering labels by SDP and safe semi-supervised SVM classification"};
    app.name("steersvm");
    app.require_subcommand(1);
    app.fallthrough();  // globals may follow the subcommand
    app.set_config("--config", "", "flat key=value file with option defaults");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Globals g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for output files and manifest.json")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();

    // gen
    int gen_n = 0;
    int gen_m = 2;
    int gen_trials = 100;
    SdpSettings gen_sdp;
    auto* gen = app.add_subcommand("gen", "generate a class-balanced labeled dataset");
    gen->add_option("--n", gen_n, "number of states (even)")->required();
    gen->add_option("--m", gen_m)->capture_default_str();
    gen->add_option("--trials", gen_trials)->capture_default_str();
    add_sdp_flags(gen, gen_sdp);

    // label
    std::string label_state_path;
    int label_m = 2;
    int label_trials = 100;
    SdpSettings label_sdp;
    auto* label = app.add_subcommand("label", "SDP-label a two-qubit state (-1 steerable, +1 otherwise)");
    label->add_option("--state", label_state_path, "state JSON with re/im 4x4 matrices")
        ->required()
        ->check(CLI::ExistingFile);
    label->add_option("--m", label_m)->capture_default_str();
    label->add_option("--trials", label_trials)->capture_default_str();
    add_sdp_flags(label, label_sdp);

    // train-svm
    std::string train_data;
    std::string train_test;
    std::optional<double> train_cost;
    std::optional<double> train_gamma;
    int train_folds = 10;
    auto* train_cmd = app.add_subcommand("train-svm", "fit an RBF SVM, grid-searching C and gamma unless both are given");
    train_cmd->add_option("--data", train_data, "labeled CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--test", train_test, "labeled CSV to score")->check(CLI::ExistingFile);
    train_cmd->add_option("--C", train_cost);
    train_cmd->add_option("--gamma", train_gamma);
    train_cmd->add_option("--folds", train_folds)->capture_default_str();

    // s4vm
    std::string s4_labeled;
    std::string s4_unlabeled;
    S4vmParams s4_params;
    std::optional<double> s4_cost;
    std::optional<double> s4_gamma;
    double s4_ratio = 0.1;
    int s4_folds = 10;
    auto* s4 = app.add_subcommand("s4vm", "label an unlabeled CSV with S4VM");
    s4->add_option("--labeled", s4_labeled)->required()->check(CLI::ExistingFile);
    s4->add_option("--unlabeled", s4_unlabeled, "CSV; its label column is only used for scoring")
        ->required()
        ->check(CLI::ExistingFile);
    s4->add_option("--C1", s4_cost);
    s4->add_option("--gamma", s4_gamma);
    s4->add_option("--unlabeled-cost-ratio", s4_ratio)->capture_default_str();
    s4->add_option("--folds", s4_folds)->capture_default_str();
    add_s4vm_flags(s4, s4_params);

    // compare / class-errors
    ExperimentFlags cmp_flags;
    auto* cmp = app.add_subcommand("compare", "inductive SVM vs incremental S4VM over labeled-set draws");
    add_experiment_flags(cmp, cmp_flags);
    ExperimentFlags cls_flags;
    auto* cls = app.add_subcommand("class-errors", "per-class error rates of both methods");
    add_experiment_flags(cls, cls_flags);

    // werner
    ExperimentFlags w_flags;
    w_flags.config.m = 4;
    w_flags.config.l = 30;
    double w_xi = M_PI / 8.0;
    int w_points = 500;
    auto* wer = app.add_subcommand("werner", "classify a sweep of generalized Werner states");
    add_experiment_flags(wer, w_flags);
    wer->add_option("--xi", w_xi)->capture_default_str();
    wer->add_option("--points", w_points)->capture_default_str();

    // msplit
    ExperimentFlags ms_flags;
    std::vector<int> ms_list{1, 2, 5};
    auto* ms = app.add_subcommand("msplit", "error and runtime of incremental S4VM across chunk counts");
    add_experiment_flags(ms, ms_flags);
    ms->add_option("--splits-list", ms_list, "chunk counts to try")->delimiter(',')->capture_default_str();

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "steersvm: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (g.threads > 0) set_thread_count(g.threads);
        fs::create_directories(g.out_dir);

        if (*gen) {
            GenerationStats stats;
            const Dataset data = generate_balanced_dataset(gen_n, gen_m, gen_trials, gen_sdp, g.seed, &stats);
            const std::string path = out_path(g, "dataset.csv");
            write_dataset_csv(path, data);
            write_manifest(g, "gen",
                           {{"n", gen_n},
                            {"m", gen_m},
                            {"trials", gen_trials},
                            {"sdp", {{"tolerance", gen_sdp.tolerance},
                                     {"max_iterations", gen_sdp.max_iterations},
                                     {"steerable_threshold", gen_sdp.steerable_threshold}}}},
                           {});
            std::cout << json{{"path", path},
                              {"rows", data.size()},
                              {"positives", data.count(+1)},
                              {"negatives", data.count(-1)},
                              {"draws", stats.draws},
                              {"negative_fraction", stats.negative_fraction()}}
                             .dump()
                      << "\n";
        } else if (*label) {
            const TwoQubitState state = state_from_json(read_json(label_state_path));
            const int y = label_state(state, label_m, label_trials, label_sdp, g.seed);
            write_manifest(g, "label",
                           {{"state", label_state_path},
                            {"m", label_m},
                            {"trials", label_trials},
                            {"sdp", {{"tolerance", label_sdp.tolerance},
                                     {"max_iterations", label_sdp.max_iterations},
                                     {"steerable_threshold", label_sdp.steerable_threshold}}}},
                           {label_state_path});
            std::cout << y << "\n";
        } else if (*train_cmd) {
            const Dataset data = read_dataset_csv(train_data);
            json out;
            SvmParams params;
            if (train_cost && train_gamma) {
                params = SvmParams{*train_cost, *train_gamma};
                params.validate();
            } else {
                GridSpec grid = GridSpec::default_grid(train_folds);
                if (train_cost) grid.costs = {*train_cost};
                if (train_gamma) grid.gammas = {*train_gamma};
                const GridResult r = grid_search(data, grid, g.seed, SmoOptions{kCvTolerance});
                params = r.best;
                out["cv_accuracy"] = r.accuracy;
                out["folds_used"] = r.folds_used;
            }
            const SvmModel model = train(data, params);
            write_text(out_path(g, "model.json"), model_to_json(model).dump(2) + "\n");
            out["C"] = params.cost;
            out["gamma"] = params.gamma;
            out["support_vectors"] = model.support_vectors.rows();
            std::vector<std::string> inputs{train_data};
            if (!train_test.empty()) {
                const Dataset test = read_dataset_csv(train_test);
                const ErrorReport rep = class_errors(predict(model, test.features()), test.labels());
                out["test_error"] = rep.overall_error;
                out["test_pos_error"] = optional_json(rep.positive_error);
                out["test_neg_error"] = optional_json(rep.negative_error);
                inputs.push_back(train_test);
            }
            write_manifest(g, "train-svm",
                           {{"data", train_data},
                            {"test", train_test},
                            {"C", train_cost ? json(*train_cost) : json(nullptr)},
                            {"gamma", train_gamma ? json(*train_gamma) : json(nullptr)},
                            {"folds", train_folds}},
                           inputs);
            std::cout << out.dump() << "\n";
        } else if (*s4) {
            const Dataset labeled = read_dataset_csv(s4_labeled);
            const Dataset unlabeled = read_dataset_csv(s4_unlabeled);
            SvmParams base;
            if (s4_cost && s4_gamma) {
                base = SvmParams{*s4_cost, *s4_gamma};
            } else {
                GridSpec grid = GridSpec::default_grid(std::min<int>(s4_folds, static_cast<int>(labeled.size())));
                if (s4_cost) grid.costs = {*s4_cost};
                if (s4_gamma) grid.gammas = {*s4_gamma};
                base = grid_search(labeled, grid, g.seed, SmoOptions{kCvTolerance}).best;
            }
            S4vmParams params = s4_params;
            params.cost_labeled = base.cost;
            params.cost_unlabeled = s4_ratio * base.cost;
            params.gamma = base.gamma;
            params.validate();
            const S4vmResult result = s4vm_run(labeled, unlabeled.features(), params, g.seed);
            write_text(out_path(g, "s4vm_report.json"), s4vm_report_json(result).dump(2) + "\n");
            write_dataset_csv(out_path(g, "predictions.csv"), Dataset(unlabeled.features(), result.labels));
            const ErrorReport s4_err = class_errors(result.labels, unlabeled.labels());
            const ErrorReport svm_err = class_errors(result.ysvm, unlabeled.labels());
            write_manifest(g, "s4vm",
                           {{"labeled", s4_labeled},
                            {"unlabeled", s4_unlabeled},
                            {"folds", s4_folds},
                            {"unlabeled_cost_ratio", s4_ratio},
                            {"params", s4vm_params_to_json(params)}},
                           {s4_labeled, s4_unlabeled});
            std::cout << json{{"C1", params.cost_labeled},
                              {"gamma", params.gamma},
                              {"svm_error", svm_err.overall_error},
                              {"s4vm_error", s4_err.overall_error},
                              {"fallback_used", result.fallback_used},
                              {"min_j_output", result.min_j_output},
                              {"min_j_ysvm", result.min_j_ysvm}}
                             .dump()
                      << "\n";
        } else if (*cmp || *cls) {
            ExperimentFlags& f = *cmp ? cmp_flags : cls_flags;
            const ExperimentConfig config = resolve(f, g);
            const ComparisonTable table = run_comparison(config, f.pool);
            write_comparison_csv(out_path(g, "comparison.csv"), table, config);
            std::vector<std::string> inputs;
            if (!f.pool.empty()) inputs.push_back(f.pool);
            json cfg = config_to_json(config);
            cfg["pool"] = f.pool;
            write_manifest(g, *cmp ? "compare" : "class-errors", cfg, inputs);
            json out{{"runs", table.rows.size()},
                     {"mean_svm_error", table.mean_svm_error},
                     {"mean_s4vm_error", table.mean_s4vm_error},
                     {"mean_difference", table.mean_difference},
                     {"max_difference", table.max_difference}};
            if (*cls) out["classes"] = {{"svm", class_means(table, true)}, {"s4vm", class_means(table, false)}};
            std::cout << out.dump() << "\n";
        } else if (*wer) {
            const ExperimentConfig config = resolve(w_flags, g);
            const SweepReport rep = werner_sweep(config.l, w_xi, w_points, config.m, config, g.seed);
            write_sweep_csv(out_path(g, "werner_sweep.csv"), rep);
            json cfg = config_to_json(config);
            cfg["xi"] = w_xi;
            cfg["points"] = w_points;
            write_manifest(g, "werner", cfg, {});
            std::cout << json{{"svm_accuracy", rep.svm_accuracy},
                              {"s4vm_accuracy", rep.s4vm_accuracy},
                              {"fallback_used", rep.fallback_used}}
                             .dump()
                      << "\n";
        } else if (*ms) {
            const ExperimentConfig config = resolve(ms_flags, g);
            // Check every M before spending minutes on data generation.
            for (int splits : ms_list) {
                ExperimentConfig c = config;
                c.splits = splits;
                c.validate();
            }
            std::vector<MsplitRow> rows;
            std::vector<std::string> inputs;
            for (std::uint64_t seed : config.seeds) {
                const ExperimentData data =
                    ms_flags.pool.empty()
                        ? generate_experiment_data(config, seed)
                        : split_pool(read_dataset_csv(ms_flags.pool), config.u, config.l, config.n_runs, seed);
                auto part = msplit_experiment(config, data, ms_list, seed);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            if (!ms_flags.pool.empty()) inputs.push_back(ms_flags.pool);
            write_msplit_csv(out_path(g, "msplit.csv"), rows, config);
            json cfg = config_to_json(config);
            cfg["pool"] = ms_flags.pool;
            cfg["splits_list"] = ms_list;
            write_manifest(g, "msplit", cfg, inputs);
            json out = json::array();
            for (int s : ms_list) {
                double err = 0.0, secs = 0.0;
                int n = 0;
                for (const auto& r : rows)
                    if (r.splits == s) err += r.report.overall_error, secs += r.seconds, ++n;
                out.push_back({{"M", s}, {"mean_error", n ? err / n : 0.0}, {"mean_seconds", n ? secs / n : 0.0}});
            }
            std::cout << out.dump() << "\n";
        }
    } catch (const DomainError& e) {
        std::cerr << "steersvm: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        // Malformed JSON, filesystem failures and the like.
        std::cerr << "steersvm: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
