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

// Safe semi-supervised SVM: diverse large-margin candidate labelings of the
// unlabeled set, clustered into T representative separators, and a label
// assignment maximizing the worst-case gain over the inductive SVM.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "steersvm/svm.hpp"

namespace steersvm {

struct S4vmParams {
    double beta = 0.1;
    double lambda = 3.0;
    int separators = 10;  // T
    int samples = 100;
    double cost_labeled = 1.0;     // C1
    double cost_unlabeled = 0.1;   // C2
    double gamma = 1.0;
    // Diversity constants of the annealing formulation; the sampling strategy ignores them.
    double varsigma = 0.1;
    double diversity_penalty = 1e4;
    std::vector<double> flip_schedule{0.05, 0.1, 0.2, 0.3};
    int balance_retries = 100;
    // Alternating-optimization passes applied to each sampled labeling.
    int local_search_rounds = 10;
    int maxmin_iterations = 500;

    // C1 and gamma as given, C2 = 0.1 C1.
    static S4vmParams with_svm(double cost, double gamma);
    void validate() const;
};

// |mean(yhat) - mean(labeled)| <= beta, closed at the boundary.
bool balance_ok(std::span<const int> yhat, std::span<const int> labeled_labels, double beta);

// Smallest change restoring balance: flips surplus-class entries in order of
// increasing |decision value|. Throws SamplingError when no labeling of this
// length can satisfy the constraint.
void enforce_balance(LabelVector& yhat, std::span<const double> decision_values, std::span<const int> labeled_labels,
                     double beta);

// n_samples labelings. Candidate 0 is ysvm when balanced. Every other entry j is
// flipped with probability p / (1 + |f_j|), p drawn per candidate from the flip
// schedule; unbalanced draws are resampled up to balance_retries times and then
// repaired with enforce_balance.
std::vector<LabelVector> sample_candidates(const LabelVector& ysvm, std::span<const double> decision_values,
                                           std::span<const int> labeled_labels, const S4vmParams& params,
                                           std::uint64_t seed);

// Primal objective 1/2 ||w||^2 + C1 sum xi_i + C2 sum xi_j of the SVM trained on
// labeled plus unlabeled-with-labeling; +infinity when the union has one class.
double separator_objective(const LabelVector& labeling, const Dataset& labeled, const FeatureMatrix& unlabeled,
                           const S4vmParams& params);

struct SeparatorPool {
    std::vector<LabelVector> members;
    std::vector<double> objectives;
    // Cluster per input candidate, -1 for discarded (infinite objective).
    std::vector<int> assignment;
    bool shrunk = false;  // fewer distinct usable candidates than T
};

// k-medoids on Hamming distance with farthest-point initialization from the
// best candidate; one minimum-objective member per cluster.
SeparatorPool select_separators(const std::vector<LabelVector>& candidates, std::span<const double> objectives,
                                int separators);

struct GainLoss {
    int gain = 0;
    int loss = 0;
};

GainLoss gain_loss(std::span<const int> y, std::span<const int> yhat, std::span<const int> ysvm);
// gain - lambda * loss.
double improvement(std::span<const int> y, std::span<const int> yhat, std::span<const int> ysvm, double lambda);
// Worst case over the pool.
double min_improvement(std::span<const int> y, const std::vector<LabelVector>& pool, std::span<const int> ysvm,
                       double lambda);

// c_t and d_t with improvement(y, yhat, ysvm) = c' y + d.
struct LinearImprovement {
    Eigen::VectorXd c;
    double d = 0.0;
};
LinearImprovement linear_improvement(std::span<const int> yhat, std::span<const int> ysvm, double lambda);

struct MaxMinResult {
    LabelVector labels;
    double relaxed_value = 0.0;  // best min_t(c_t'y + d_t) found on the box
    double min_j_output = 0.0;
    double min_j_ysvm = 0.0;
    bool fallback_used = false;
};

// Projected supergradient ascent on the box, sign rounding, ysvm fallback.
MaxMinResult solve_maxmin(const std::vector<LabelVector>& pool, const LabelVector& ysvm, double lambda,
                          int iterations = 500);

struct S4vmResult {
    std::uint64_t seed = 0;
    S4vmParams params;
    LabelVector ysvm;
    LabelVector labels;
    std::vector<double> candidate_objectives;
    SeparatorPool pool;
    bool sampling_failed = false;
    bool fallback_used = false;
    double min_j_output = 0.0;
    double min_j_ysvm = 0.0;
};

S4vmResult s4vm_run(const Dataset& labeled, const FeatureMatrix& unlabeled, const S4vmParams& params,
                    std::uint64_t seed);
inline LabelVector s4vm_predict(const Dataset& labeled, const FeatureMatrix& unlabeled, const S4vmParams& params,
                                std::uint64_t seed) {
    return s4vm_run(labeled, unlabeled, params, seed).labels;
}

nlohmann::json s4vm_report_json(const S4vmResult& result);
nlohmann::json s4vm_params_to_json(const S4vmParams& params);

}  // namespace steersvm
