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

// Soft-margin RBF support vector machine trained by sequential minimal
// optimization, with stratified k-fold cross-validation and grid search.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace steersvm {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelVector = std::vector<int>;

// sign with sign(0) = +1.
inline int sign_label(double value) noexcept { return value >= 0.0 ? +1 : -1; }

class Dataset {
public:
    Dataset() = default;
    // Throws DomainError when row and label counts differ or a label is not +-1.
    Dataset(FeatureMatrix features, LabelVector labels);

    const FeatureMatrix& features() const noexcept { return features_; }
    const LabelVector& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    Eigen::Index dims() const noexcept { return features_.cols(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t count(int label) const;
    bool has_both_classes() const { return count(+1) > 0 && count(-1) > 0; }

    Dataset subset(std::span<const std::size_t> rows) const;
    Dataset concatenated(const Dataset& other) const;

private:
    FeatureMatrix features_;
    LabelVector labels_;
};

struct SvmParams {
    double cost = 1.0;
    double gamma = 1.0;

    void validate() const;
};

inline constexpr double kCvTolerance = 1e-3;

struct SmoOptions {
    // Stop once the maximal KKT violating pair is within this gap. Cross-validated
    // scoring is insensitive to it and may use the coarser kCvTolerance.
    double tolerance = 1e-9;
    long max_iterations = 10'000'000;
};

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

// Pairwise squared Euclidean distances between the rows of a and b.
Eigen::MatrixXd squared_distances(const FeatureMatrix& a, const FeatureMatrix& b);

inline Eigen::MatrixXd rbf_from_distances(const Eigen::MatrixXd& sq_dist, double gamma) {
    return (-gamma * sq_dist.array()).exp().matrix();
}

// Solution of  max sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij
//              s.t. 0 <= alpha_i <= upper_i, sum alpha_i y_i = 0.
struct DualSolution {
    Eigen::VectorXd alpha;
    double bias = 0.0;            // decision = sum alpha_i y_i K(x_i, x) + bias
    double dual_objective = 0.0;  // maximization form
    double max_violation = 0.0;   // final KKT gap of the maximal violating pair
    long iterations = 0;
};

// SMO on a precomputed kernel with per-point cost bounds. Throws
// DegenerateDataError unless both labels are present.
DualSolution solve_dual(const Eigen::MatrixXd& kernel, std::span<const int> labels, std::span<const double> upper,
                        const SmoOptions& options = {});

// 1/2 ||w||^2 + sum upper_i * max(0, 1 - y_i f(x_i)) at the given dual solution.
double primal_objective(const Eigen::MatrixXd& kernel, std::span<const int> labels, std::span<const double> upper,
                        const DualSolution& solution);

struct SvmModel {
    SvmParams params;
    FeatureMatrix support_vectors;
    Eigen::VectorXd coefficients;  // alpha_i y_i
    double bias = 0.0;
    double dual_objective = 0.0;
    long iterations = 0;

    double decision_value(std::span<const double> x) const;
    Eigen::VectorXd decision_values(const FeatureMatrix& xs) const;
};

// Throws DegenerateDataError for single-class data or fewer than two rows.
SvmModel train(const Dataset& data, const SvmParams& params, const SmoOptions& options = {});
// Model with an explicit upper bound per training row (weighted costs).
SvmModel train_weighted(const Dataset& data, double gamma, std::span<const double> upper, const SmoOptions& options = {});

inline double decision_value(const SvmModel& model, std::span<const double> x) { return model.decision_value(x); }
LabelVector predict(const SvmModel& model, const FeatureMatrix& xs);

// Fold index per row, stratified by label: each class is shuffled with the seed
// and dealt round-robin, continuing the deal across classes.
std::vector<int> stratified_fold_assignment(std::span<const int> labels, int folds, std::uint64_t seed);

struct CvResult {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Pooled held-out accuracy. Throws DomainError when folds < 2 or folds > n and
// DegenerateDataError when a class is missing. A training split that lost a
// class predicts its remaining class.
CvResult k_fold_cv_detailed(const Dataset& data, const SvmParams& params, int folds, std::uint64_t seed,
                            const SmoOptions& options = {});
double k_fold_cv(const Dataset& data, const SvmParams& params, int folds, std::uint64_t seed,
                 const SmoOptions& options = {});

struct GridSpec {
    std::vector<double> costs;
    std::vector<double> gammas;
    int folds = 10;

    // C in {2^-5, 2^-3, ..., 2^15}, gamma in {2^-15, 2^-13, ..., 2^3}.
    static GridSpec default_grid(int folds = 10);
    void validate() const;
};

struct GridPoint {
    SvmParams params;
    CvResult cv;
};

struct GridResult {
    SvmParams best;
    double accuracy = 0.0;
    int folds_used = 0;
    std::vector<GridPoint> table;  // cost-major, gamma-minor, ascending
};

// Arg-max of k-fold CV accuracy over the grid; ties go to the smallest C, then
// the smallest gamma. Folds are capped at the dataset size.
GridResult grid_search(const Dataset& data, const GridSpec& grid, std::uint64_t seed, const SmoOptions& options = {});

nlohmann::json model_to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);

}  // namespace steersvm
