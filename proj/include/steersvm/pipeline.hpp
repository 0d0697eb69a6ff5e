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

#pragma once

// Experiment harness: balanced SDP-labeled datasets, the inductive SVM
// baseline, the incremental M-split S4VM protocol, run comparisons, per-class
// errors and the generalized Werner sweep.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "steersvm/s4vm.hpp"
#include "steersvm/sdp_steer.hpp"
#include "steersvm/svm.hpp"

namespace steersvm {

struct ExperimentConfig {
    int m = 2;
    int l = 10;
    int u = 500;
    int splits = 2;  // M
    int trials = 100;
    int n_runs = 10;
    std::vector<std::uint64_t> seeds{1};
    GridSpec grid = GridSpec::default_grid(10);
    int incremental_folds = 5;
    double unlabeled_cost_ratio = 0.1;
    S4vmParams s4vm;
    SdpSettings sdp;

    // Throws ConfigError.
    void validate() const;
};

struct GenerationStats {
    long draws = 0;
    long positive_draws = 0;
    long negative_draws = 0;
    double negative_fraction() const {
        return draws == 0 ? 0.0 : static_cast<double>(negative_draws) / static_cast<double>(draws);
    }
};

// n/2 states of each label, in draw order. Throws DomainError for odd n and
// GenerationError when 50 n draws do not fill both quotas.
Dataset generate_balanced_dataset(int n, int m, int trials, const SdpSettings& sdp, std::uint64_t seed,
                                  GenerationStats* stats = nullptr);
Dataset generate_balanced_dataset(int n, const ExperimentConfig& config, std::uint64_t seed,
                                  GenerationStats* stats = nullptr);

struct ErrorReport {
    double overall_error = 0.0;
    std::optional<double> positive_error;  // empty when the truth has no such class
    std::optional<double> negative_error;
    std::vector<double> per_split_errors;
    bool fallback_used = false;
    bool safety_held = true;  // min-J of every S4VM output >= min-J of ysvm
    std::size_t mistakes = 0;
    std::size_t total = 0;
    int folds_used = 0;
    SvmParams params;
    LabelVector predictions;
};

ErrorReport class_errors(std::span<const int> predicted, std::span<const int> truth);

// Grid search with k-fold CV on the labeled set (folds capped at l), then
// prediction of the unlabeled rows.
ErrorReport run_inductive_baseline(const Dataset& labeled, const Dataset& unlabeled, const GridSpec& grid,
                                   std::uint64_t seed);

// For chunk k: S4VM on the accumulated labeled set, a 5-fold CV grid search over
// accumulated + chunk, and the retrained SVM's chunk labels become the chunk's
// labels. S4VM's C1 and gamma come from the previous grid search (the labeled
// baseline for the first chunk); C2 = unlabeled_cost_ratio * C1.
ErrorReport run_incremental_s4vm(const Dataset& labeled, const Dataset& unlabeled, const ExperimentConfig& config,
                                 std::uint64_t seed);

// Unlabeled rows then n_runs disjoint balanced labeled sets, cut from one
// balanced pool after a seeded shuffle.
struct ExperimentData {
    Dataset unlabeled;
    std::vector<Dataset> labeled_sets;
    GenerationStats stats;
};
// Rows beyond the per-class quotas are dropped. Throws DomainError when a class is short.
ExperimentData split_pool(const Dataset& pool, int u, int l, int n_runs, std::uint64_t seed);
ExperimentData generate_experiment_data(const ExperimentConfig& config, std::uint64_t seed);

struct ComparisonRow {
    std::uint64_t seed = 0;
    int run = 0;
    ErrorReport svm;
    ErrorReport s4vm;
    double difference() const { return svm.overall_error - s4vm.overall_error; }
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    double max_difference = 0.0;
    double mean_difference = 0.0;
    double mean_svm_error = 0.0;
    double mean_s4vm_error = 0.0;
};

ComparisonTable compare_runs(const ExperimentConfig& config);
// Same, on pre-generated data for one seed.
ComparisonTable compare_runs(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed);

struct MsplitRow {
    int splits = 0;
    int run = 0;
    ErrorReport report;
    double seconds = 0.0;
};
std::vector<MsplitRow> msplit_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                         const std::vector<int>& split_counts, std::uint64_t seed);

struct SweepReport {
    double xi = 0.0;
    std::vector<double> p;
    LabelVector truth;
    LabelVector svm_predictions;
    LabelVector s4vm_predictions;
    double svm_accuracy = 0.0;
    double s4vm_accuracy = 0.0;
    bool fallback_used = false;
};

// Werner(p_k, xi) on p_k = k / (n_points - 1) with analytic truth; labeled set
// of l random states labeled by the SDP; SVM baseline and M = 1 S4VM.
SweepReport werner_sweep(int l, double xi, int n_points, int m, const ExperimentConfig& config, std::uint64_t seed);

// Report files.
void write_comparison_csv(const std::string& path, const ComparisonTable& table, const ExperimentConfig& config);
void write_msplit_csv(const std::string& path, const std::vector<MsplitRow>& rows, const ExperimentConfig& config);
void write_sweep_csv(const std::string& path, const SweepReport& report);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json error_report_json(const ErrorReport& report);

}  // namespace steersvm
