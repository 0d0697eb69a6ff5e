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

#include "steersvm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "steersvm/errors.hpp"
#include "steersvm/io.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/qstate.hpp"
#include "steersvm/rng.hpp"

namespace steersvm {

namespace {

constexpr long kDrawsPerRow = 50;

SmoOptions cv_options() { return SmoOptions{kCvTolerance}; }

Dataset rows_of(const Dataset& data, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    return data.subset(idx);
}

std::string format_error(const std::optional<double>& e) {
    if (!e) return "NA";
    std::ostringstream s;
    s << std::setprecision(12) << *e;
    return s.str();
}

std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

GridResult labeled_grid(const Dataset& labeled, const GridSpec& grid, int folds, std::uint64_t seed) {
    GridSpec g = grid;
    g.folds = std::min<int>(folds, static_cast<int>(labeled.size()));
    return grid_search(labeled, g, seed, cv_options());
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (m < 1) fail("m must be at least 1");
    if (l < 2 || l % 2 != 0) fail("l must be an even count of at least 2 (balanced classes)");
    if (u < 2 || u % 2 != 0) fail("u must be an even count of at least 2");
    if (splits < 1) fail("M must be at least 1");
    if (u % splits != 0) fail("M must divide u");
    if (u / splits < 2) fail("unlabeled chunks must hold at least two instances");
    if (trials < 1) fail("trials must be at least 1");
    if (n_runs < 1) fail("n_runs must be at least 1");
    if (seeds.empty()) fail("seed list must be non-empty");
    if (incremental_folds < 2) fail("incremental folds must be at least 2");
    if (!(unlabeled_cost_ratio > 0.0)) fail("unlabeled cost ratio must be positive");
    try {
        grid.validate();
        s4vm.validate();
        sdp.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        fail(e.what());
    }
}

Dataset generate_balanced_dataset(int n, int m, int trials, const SdpSettings& sdp, std::uint64_t seed,
                                  GenerationStats* stats) {
    if (n < 2 || n % 2 != 0) throw DomainError("balanced dataset size must be even and at least 2");
    if (m < 1 || trials < 1) throw DomainError("m and trials must be positive");
    sdp.validate();
    const long max_draws = kDrawsPerRow * n;
    const std::size_t quota = static_cast<std::size_t>(n / 2);
    const std::size_t batch = std::max<std::size_t>(16, 4 * thread_count());

    std::vector<FeatureVector9> feats;
    LabelVector labels;
    std::size_t pos = 0;
    std::size_t neg = 0;
    GenerationStats local;
    for (long start = 0; start < max_draws && (pos < quota || neg < quota); start += static_cast<long>(batch)) {
        const std::size_t count = std::min<std::size_t>(batch, static_cast<std::size_t>(max_draws - start));
        std::vector<int> lab(count, 0);
        std::vector<FeatureVector9> x(count);
        parallel_for(count, [&](std::size_t i) {
            const auto k = static_cast<std::uint64_t>(start) + i;
            const TwoQubitState state = random_density_matrix(derive_seed(seed, streams::kStateDraw, k));
            lab[i] = label_state(state, m, trials, sdp, derive_seed(seed, streams::kMeasurement, k));
            x[i] = feature_vector(state);
        });
        for (std::size_t i = 0; i < count && (pos < quota || neg < quota); ++i) {
            ++local.draws;
            ++(lab[i] > 0 ? local.positive_draws : local.negative_draws);
            std::size_t& have = lab[i] > 0 ? pos : neg;
            if (have >= quota) continue;
            ++have;
            feats.push_back(x[i]);
            labels.push_back(lab[i]);
        }
    }
    if (stats != nullptr) *stats = local;
    if (pos < quota || neg < quota) {
        throw GenerationError("balanced quotas unfilled after " + std::to_string(max_draws) + " draws (" +
                              std::to_string(pos) + " unsteerable, " + std::to_string(neg) + " steerable)");
    }
    FeatureMatrix xs(n, 9);
    for (int i = 0; i < n; ++i) xs.row(i) = feats[static_cast<std::size_t>(i)].transpose();
    return Dataset(std::move(xs), std::move(labels));
}

Dataset generate_balanced_dataset(int n, const ExperimentConfig& config, std::uint64_t seed, GenerationStats* stats) {
    return generate_balanced_dataset(n, config.m, config.trials, config.sdp, seed, stats);
}

ErrorReport class_errors(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw DomainError("predictions and truth differ in length");
    ErrorReport r;
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t pos_wrong = 0;
    std::size_t neg_wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool wrong = predicted[i] != truth[i];
        if (truth[i] > 0) {
            ++pos;
            pos_wrong += wrong;
        } else {
            ++neg;
            neg_wrong += wrong;
        }
    }
    r.total = truth.size();
    r.mistakes = pos_wrong + neg_wrong;
    r.overall_error = r.total == 0 ? 0.0 : static_cast<double>(r.mistakes) / static_cast<double>(r.total);
    if (pos > 0) r.positive_error = static_cast<double>(pos_wrong) / static_cast<double>(pos);
    if (neg > 0) r.negative_error = static_cast<double>(neg_wrong) / static_cast<double>(neg);
    r.per_split_errors = {r.overall_error};
    r.predictions.assign(predicted.begin(), predicted.end());
    return r;
}

ErrorReport run_inductive_baseline(const Dataset& labeled, const Dataset& unlabeled, const GridSpec& grid,
                                   std::uint64_t seed) {
    const GridResult g = labeled_grid(labeled, grid, grid.folds, derive_seed(seed, streams::kFolds));
    const SvmModel model = train(labeled, g.best);
    ErrorReport r = class_errors(predict(model, unlabeled.features()), unlabeled.labels());
    r.folds_used = g.folds_used;
    r.params = g.best;
    return r;
}

ErrorReport run_incremental_s4vm(const Dataset& labeled, const Dataset& unlabeled, const ExperimentConfig& config,
                                 std::uint64_t seed) {
    const std::size_t u = unlabeled.size();
    const auto splits = static_cast<std::size_t>(config.splits);
    if (splits < 1 || u % splits != 0) throw ConfigError("M must divide the unlabeled count");
    const std::size_t chunk = u / splits;
    if (chunk < 2) throw ConfigError("unlabeled chunks must hold at least two instances");

    const GridResult base = labeled_grid(labeled, config.grid, config.grid.folds, derive_seed(seed, streams::kFolds));
    SvmParams hyper = base.best;
    Dataset accumulated = labeled;
    LabelVector predictions;
    std::vector<double> chunk_errors;
    bool fallback = false;
    bool safe = true;
    for (std::size_t k = 0; k < splits; ++k) {
        const Dataset part = rows_of(unlabeled, k * chunk, (k + 1) * chunk);
        S4vmParams params = config.s4vm;
        params.cost_labeled = hyper.cost;
        params.cost_unlabeled = config.unlabeled_cost_ratio * hyper.cost;
        params.gamma = hyper.gamma;
        const S4vmResult s = s4vm_run(accumulated, part.features(), params, derive_seed(seed, streams::kCandidates, k));
        fallback = fallback || s.fallback_used;
        safe = safe && s.min_j_output >= s.min_j_ysvm;

        const Dataset augmented = accumulated.concatenated(Dataset(part.features(), s.labels));
        const GridResult g = labeled_grid(augmented, config.grid, config.incremental_folds,
                                          derive_seed(seed, streams::kFolds, k + 1));
        const LabelVector adopted = predict(train(augmented, g.best), part.features());
        chunk_errors.push_back(class_errors(adopted, part.labels()).overall_error);
        predictions.insert(predictions.end(), adopted.begin(), adopted.end());
        accumulated = accumulated.concatenated(Dataset(part.features(), adopted));
        hyper = g.best;
    }

    // Equal chunk sizes make the chunk mean coincide with the pooled rate.
    ErrorReport r = class_errors(predictions, unlabeled.labels());
    r.per_split_errors = chunk_errors;
    r.fallback_used = fallback;
    r.safety_held = safe;
    r.folds_used = base.folds_used;
    r.params = hyper;
    return r;
}

ExperimentData split_pool(const Dataset& pool, int u, int l, int n_runs, std::uint64_t seed) {
    if (u < 2 || u % 2 != 0 || l < 2 || l % 2 != 0 || n_runs < 1) throw DomainError("invalid pool split");
    const std::size_t need = static_cast<std::size_t>(u) + static_cast<std::size_t>(n_runs) * static_cast<std::size_t>(l);
    if (pool.count(1) < need / 2 || pool.count(-1) < need / 2) throw DomainError("pool too small for the requested split");
    std::vector<std::size_t> unl;
    std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(n_runs));
    std::size_t unl_pos = 0;
    std::size_t unl_neg = 0;
    std::vector<std::size_t> set_pos(sets.size(), 0);
    std::vector<std::size_t> set_neg(sets.size(), 0);
    // Quotas fill class by class in draw order, so rows are shuffled first.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(derive_seed(seed, streams::kUnlabeledSet));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
        const bool positive = pool.labels()[i] > 0;
        std::size_t& uc = positive ? unl_pos : unl_neg;
        if (uc < static_cast<std::size_t>(u / 2)) {
            ++uc;
            unl.push_back(i);
            continue;
        }
        for (std::size_t r = 0; r < sets.size(); ++r) {
            std::size_t& sc = positive ? set_pos[r] : set_neg[r];
            if (sc < static_cast<std::size_t>(l / 2)) {
                ++sc;
                sets[r].push_back(i);
                break;
            }
        }
    }
    ExperimentData data;
    data.unlabeled = pool.subset(unl);
    for (const auto& s : sets) data.labeled_sets.push_back(pool.subset(s));
    return data;
}

ExperimentData generate_experiment_data(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    GenerationStats stats;
    const Dataset pool =
        generate_balanced_dataset(config.u + config.n_runs * config.l, config, derive_seed(seed, streams::kUnlabeledSet), &stats);
    ExperimentData data = split_pool(pool, config.u, config.l, config.n_runs, seed);
    data.stats = stats;
    return data;
}

namespace {

void summarize(ComparisonTable& t) {
    if (t.rows.empty()) return;
    t.max_difference = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    double svm = 0.0;
    double s4 = 0.0;
    for (const auto& r : t.rows) {
        t.max_difference = std::max(t.max_difference, r.difference());
        sum += r.difference();
        svm += r.svm.overall_error;
        s4 += r.s4vm.overall_error;
    }
    const auto n = static_cast<double>(t.rows.size());
    t.mean_difference = sum / n;
    t.mean_svm_error = svm / n;
    t.mean_s4vm_error = s4 / n;
}

}  // namespace

ComparisonTable compare_runs(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed) {
    config.validate();
    if (data.labeled_sets.size() < static_cast<std::size_t>(config.n_runs)) {
        throw DomainError("fewer labeled sets than runs");
    }
    ComparisonTable t;
    t.rows.resize(static_cast<std::size_t>(config.n_runs));
    parallel_for(t.rows.size(), [&](std::size_t r) {
        const std::uint64_t cell = derive_seed(seed, streams::kExperiment, r);
        ComparisonRow& row = t.rows[r];
        row.seed = seed;
        row.run = static_cast<int>(r);
        row.svm = run_inductive_baseline(data.labeled_sets[r], data.unlabeled, config.grid, cell);
        row.s4vm = run_incremental_s4vm(data.labeled_sets[r], data.unlabeled, config, cell);
    });
    summarize(t);
    return t;
}

ComparisonTable compare_runs(const ExperimentConfig& config) {
    config.validate();
    ComparisonTable all;
    for (std::uint64_t seed : config.seeds) {
        const ComparisonTable t = compare_runs(config, generate_experiment_data(config, seed), seed);
        all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
    }
    summarize(all);
    return all;
}

std::vector<MsplitRow> msplit_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                         const std::vector<int>& split_counts, std::uint64_t seed) {
    for (int splits : split_counts) {
        ExperimentConfig c = config;
        c.splits = splits;
        c.validate();
    }
    std::vector<MsplitRow> rows;
    for (int splits : split_counts) {
        ExperimentConfig c = config;
        c.splits = splits;
        for (int r = 0; r < config.n_runs; ++r) {
            const auto start = std::chrono::steady_clock::now();
            MsplitRow row;
            row.splits = splits;
            row.run = r;
            row.report = run_incremental_s4vm(data.labeled_sets.at(static_cast<std::size_t>(r)), data.unlabeled, c,
                                              derive_seed(seed, streams::kExperiment, static_cast<std::uint64_t>(r)));
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SweepReport werner_sweep(int l, double xi, int n_points, int m, const ExperimentConfig& config, std::uint64_t seed) {
    if (n_points < 2) throw DomainError("the sweep needs at least two points");
    if (!(xi >= 0.0 && xi <= M_PI / 4.0 + 1e-12)) throw DomainError("xi must lie in [0, pi/4]");
    ExperimentConfig c = config;
    c.m = m;
    c.l = l;
    c.u = n_points % 2 == 0 ? n_points : n_points + 1;
    c.splits = 1;
    c.validate();

    SweepReport rep;
    rep.xi = xi;
    FeatureMatrix x(n_points, 9);
    for (int k = 0; k < n_points; ++k) {
        const double p = static_cast<double>(k) / static_cast<double>(n_points - 1);
        rep.p.push_back(p);
        rep.truth.push_back(werner_unsteerable_analytic({p, xi}) ? 1 : -1);
        x.row(k) = feature_vector(werner_state({p, xi})).transpose();
    }
    const Dataset unlabeled(x, rep.truth);
    const Dataset labeled = generate_balanced_dataset(l, c, derive_seed(seed, streams::kLabeledSet));
    const ErrorReport svm = run_inductive_baseline(labeled, unlabeled, c.grid, seed);
    const ErrorReport s4 = run_incremental_s4vm(labeled, unlabeled, c, seed);
    rep.svm_predictions = svm.predictions;
    rep.s4vm_predictions = s4.predictions;
    rep.svm_accuracy = 1.0 - svm.overall_error;
    rep.s4vm_accuracy = 1.0 - s4.overall_error;
    rep.fallback_used = s4.fallback_used;
    return rep;
}

void write_comparison_csv(const std::string& path, const ComparisonTable& table, const ExperimentConfig& config) {
    std::ostringstream out;
    out << "run_id,method,m,l,u,M,overall_error,pos_error,neg_error\n";
    std::size_t id = 0;
    for (const auto& row : table.rows) {
        for (const auto* method : {"svm", "s4vm"}) {
            const ErrorReport& r = std::string(method) == "svm" ? row.svm : row.s4vm;
            out << id << ',' << method << ',' << config.m << ',' << config.l << ',' << config.u << ','
                << (std::string(method) == "svm" ? 0 : config.splits) << ',' << format_number(r.overall_error) << ','
                << format_error(r.positive_error) << ',' << format_error(r.negative_error) << '\n';
        }
        ++id;
    }
    write_text(path, out.str());
}

void write_msplit_csv(const std::string& path, const std::vector<MsplitRow>& rows, const ExperimentConfig& config) {
    std::ostringstream out;
    out << "run_id,M,m,l,u,overall_error,pos_error,neg_error,seconds\n";
    for (const auto& row : rows) {
        out << row.run << ',' << row.splits << ',' << config.m << ',' << config.l << ',' << config.u << ','
            << format_number(row.report.overall_error) << ',' << format_error(row.report.positive_error) << ','
            << format_error(row.report.negative_error) << ',' << format_number(row.seconds) << '\n';
    }
    write_text(path, out.str());
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
    std::ostringstream out;
    out << "p,truth,svm_pred,s4vm_pred\n";
    for (std::size_t k = 0; k < report.p.size(); ++k) {
        out << format_number(report.p[k]) << ',' << report.truth[k] << ',' << report.svm_predictions[k] << ','
            << report.s4vm_predictions[k] << '\n';
    }
    write_text(path, out.str());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"m", c.m},
            {"l", c.l},
            {"u", c.u},
            {"M", c.splits},
            {"trials", c.trials},
            {"n_runs", c.n_runs},
            {"seeds", c.seeds},
            {"grid", {{"C", c.grid.costs}, {"gamma", c.grid.gammas}, {"folds", c.grid.folds}}},
            {"incremental_folds", c.incremental_folds},
            {"unlabeled_cost_ratio", c.unlabeled_cost_ratio},
            {"s4vm", s4vm_params_to_json(c.s4vm)},
            {"sdp",
             {{"tolerance", c.sdp.tolerance},
              {"max_iterations", c.sdp.max_iterations},
              {"steerable_threshold", c.sdp.steerable_threshold}}}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.m = j.at("m");
        c.l = j.at("l");
        c.u = j.at("u");
        c.splits = j.at("M");
        c.trials = j.at("trials");
        c.n_runs = j.at("n_runs");
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.grid.costs = j.at("grid").at("C").get<std::vector<double>>();
        c.grid.gammas = j.at("grid").at("gamma").get<std::vector<double>>();
        c.grid.folds = j.at("grid").at("folds");
        c.incremental_folds = j.at("incremental_folds");
        c.unlabeled_cost_ratio = j.at("unlabeled_cost_ratio");
        const auto& s = j.at("s4vm");
        c.s4vm.beta = s.at("beta");
        c.s4vm.lambda = s.at("lambda");
        c.s4vm.separators = s.at("T");
        c.s4vm.samples = s.at("n_samples");
        c.s4vm.cost_labeled = s.at("C1");
        c.s4vm.cost_unlabeled = s.at("C2");
        c.s4vm.gamma = s.at("gamma");
        c.s4vm.varsigma = s.at("varsigma");
        c.s4vm.diversity_penalty = s.at("G");
        c.s4vm.flip_schedule = s.at("flip_schedule").get<std::vector<double>>();
        c.s4vm.balance_retries = s.at("balance_retries");
        c.s4vm.local_search_rounds = s.at("local_search_rounds");
        c.s4vm.maxmin_iterations = s.at("maxmin_iterations");
        const auto& d = j.at("sdp");
        c.sdp.tolerance = d.at("tolerance");
        c.sdp.max_iterations = d.at("max_iterations");
        c.sdp.steerable_threshold = d.at("steerable_threshold");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json error_report_json(const ErrorReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"overall_error", r.overall_error},
            {"positive_error", opt(r.positive_error)},
            {"negative_error", opt(r.negative_error)},
            {"per_split_errors", r.per_split_errors},
            {"fallback_used", r.fallback_used},
            {"safety_held", r.safety_held},
            {"mistakes", r.mistakes},
            {"total", r.total},
            {"folds_used", r.folds_used},
            {"C", r.params.cost},
            {"gamma", r.params.gamma}};
}

}  // namespace steersvm
