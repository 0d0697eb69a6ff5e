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

#include "steersvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "steersvm/errors.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/rng.hpp"

namespace steersvm {

namespace {

constexpr double kTau = 1e-12;

void check_labels(std::span<const int> labels) {
    for (int y : labels) {
        if (y != 1 && y != -1) throw DomainError("labels must be +1 or -1");
    }
}

bool both_classes(std::span<const int> labels) {
    bool pos = false;
    bool neg = false;
    for (int y : labels) (y > 0 ? pos : neg) = true;
    return pos && neg;
}

}  // namespace

Dataset::Dataset(FeatureMatrix features, LabelVector labels) : features_(std::move(features)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
        throw DomainError("feature rows and labels differ in count");
    }
    check_labels(labels_);
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
    LabelVector y(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= size()) throw DomainError("subset row out of range");
        x.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(rows[k]));
        y[k] = labels_[rows[k]];
    }
    return Dataset(std::move(x), std::move(y));
}

Dataset Dataset::concatenated(const Dataset& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    if (dims() != other.dims()) throw DomainError("datasets differ in dimension");
    FeatureMatrix x(features_.rows() + other.features_.rows(), dims());
    x << features_, other.features_;
    LabelVector y = labels_;
    y.insert(y.end(), other.labels_.begin(), other.labels_.end());
    return Dataset(std::move(x), std::move(y));
}

void SvmParams::validate() const {
    if (!(cost > 0.0) || !std::isfinite(cost)) throw DomainError("SVM cost must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("RBF gamma must be positive");
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
    if (x.size() != z.size()) throw DomainError("kernel arguments differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

Eigen::MatrixXd squared_distances(const FeatureMatrix& a, const FeatureMatrix& b) {
    Eigen::MatrixXd d(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    }
    return d;
}

DualSolution solve_dual(const Eigen::MatrixXd& kernel, std::span<const int> labels, std::span<const double> upper,
                        const SmoOptions& options) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (kernel.rows() != n || kernel.cols() != n || upper.size() != labels.size()) {
        throw DomainError("kernel, labels and bounds differ in size");
    }
    check_labels(labels);
    if (!both_classes(labels)) throw DegenerateDataError("training data needs both classes");
    for (double c : upper) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("cost bounds must be positive");
    }

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - e
    auto y = [&](Eigen::Index i) { return static_cast<double>(labels[static_cast<std::size_t>(i)]); };
    auto ub = [&](Eigen::Index i) { return upper[static_cast<std::size_t>(i)]; };
    auto in_up = [&](Eigen::Index t) { return y(t) > 0 ? alpha(t) < ub(t) : alpha(t) > 0.0; };
    auto in_low = [&](Eigen::Index t) { return y(t) > 0 ? alpha(t) > 0.0 : alpha(t) < ub(t); };

    DualSolution out;
    long it = 0;
    double gap = 0.0;
    for (;; ++it) {
        Eigen::Index i = -1;
        Eigen::Index j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y(t) * grad(t);
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        gap = (i < 0 || j < 0) ? 0.0 : gmax - gmin;
        if (gap <= options.tolerance || it >= options.max_iterations) break;

        const double kii = kernel(i, i);
        const double kjj = kernel(j, j);
        const double kij = kernel(i, j);
        const double ci = ub(i);
        const double cj = ub(j);
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);
        double quad = kii + kjj - 2.0 * kij;
        if (quad <= 0.0) quad = kTau;

        if (y(i) != y(j)) {
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = -diff;
            }
            if (diff > ci - cj) {
                if (alpha(i) > ci) {
                    alpha(i) = ci;
                    alpha(j) = ci - diff;
                }
            } else if (alpha(j) > cj) {
                alpha(j) = cj;
                alpha(i) = cj + diff;
            }
        } else {
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > ci) {
                if (alpha(i) > ci) {
                    alpha(i) = ci;
                    alpha(j) = sum - ci;
                }
            } else if (alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = sum;
            }
            if (sum > cj) {
                if (alpha(j) > cj) {
                    alpha(j) = cj;
                    alpha(i) = sum - cj;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = sum;
            }
        }

        const double dai = (alpha(i) - old_ai) * y(i);
        const double daj = (alpha(j) - old_aj) * y(j);
        for (Eigen::Index t = 0; t < n; ++t) {
            grad(t) += y(t) * (kernel(t, i) * dai + kernel(t, j) * daj);
        }
    }

    // Bias from free vectors, else the midpoint of the feasible interval.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y(t) * grad(t);
        if (alpha(t) >= ub(t)) {
            if (y(t) < 0) hi = std::min(hi, yg);
            else lo = std::max(lo, yg);
        } else if (alpha(t) <= 0.0) {
            if (y(t) > 0) hi = std::min(hi, yg);
            else lo = std::max(lo, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (lo + hi);

    out.alpha = std::move(alpha);
    out.bias = -rho;
    out.dual_objective = -0.5 * out.alpha.dot(grad - Eigen::VectorXd::Ones(n));
    out.max_violation = gap;
    out.iterations = it;
    return out;
}

double primal_objective(const Eigen::MatrixXd& kernel, std::span<const int> labels, std::span<const double> upper,
                        const DualSolution& solution) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::VectorXd ya(n);
    for (Eigen::Index i = 0; i < n; ++i) ya(i) = solution.alpha(i) * labels[static_cast<std::size_t>(i)];
    const Eigen::VectorXd f = kernel * ya;
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double margin = labels[static_cast<std::size_t>(i)] * (f(i) + solution.bias);
        hinge += upper[static_cast<std::size_t>(i)] * std::max(0.0, 1.0 - margin);
    }
    return 0.5 * ya.dot(f) + hinge;
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != support_vectors.cols()) {
        throw DomainError("probe dimension differs from the model");
    }
    const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    double value = bias;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        value += coefficients(i) * std::exp(-params.gamma * (support_vectors.row(i) - xv).squaredNorm());
    }
    return value;
}

Eigen::VectorXd SvmModel::decision_values(const FeatureMatrix& xs) const {
    Eigen::VectorXd out(xs.rows());
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
        out(r) = decision_value(std::span<const double>(xs.row(r).data(), static_cast<std::size_t>(xs.cols())));
    }
    return out;
}

namespace {

SvmModel model_from_dual(const Dataset& data, double gamma, double cost, const DualSolution& sol) {
    SvmModel model;
    model.params = {cost, gamma};
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha(i) > 0.0) sv.push_back(i);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), data.dims());
    model.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        model.support_vectors.row(r) = data.features().row(sv[k]);
        model.coefficients(r) = sol.alpha(sv[k]) * data.labels()[static_cast<std::size_t>(sv[k])];
    }
    model.bias = sol.bias;
    model.dual_objective = sol.dual_objective;
    model.iterations = sol.iterations;
    return model;
}

void require_trainable(const Dataset& data) {
    if (data.size() < 2) throw DegenerateDataError("training needs at least two rows");
    if (!data.has_both_classes()) throw DegenerateDataError("training data needs both classes");
}

}  // namespace

SvmModel train(const Dataset& data, const SvmParams& params, const SmoOptions& options) {
    params.validate();
    require_trainable(data);
    const std::vector<double> upper(data.size(), params.cost);
    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(data.features(), data.features()), params.gamma);
    return model_from_dual(data, params.gamma, params.cost, solve_dual(k, data.labels(), upper, options));
}

SvmModel train_weighted(const Dataset& data, double gamma, std::span<const double> upper, const SmoOptions& options) {
    SvmParams{1.0, gamma}.validate();
    require_trainable(data);
    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(data.features(), data.features()), gamma);
    const double cmax = upper.empty() ? 0.0 : *std::max_element(upper.begin(), upper.end());
    return model_from_dual(data, gamma, cmax, solve_dual(k, data.labels(), upper, options));
}

LabelVector predict(const SvmModel& model, const FeatureMatrix& xs) {
    LabelVector out(static_cast<std::size_t>(xs.rows()));
    if (xs.rows() == 0) return out;
    const Eigen::VectorXd f = model.decision_values(xs);
    for (Eigen::Index r = 0; r < xs.rows(); ++r) out[static_cast<std::size_t>(r)] = sign_label(f(r));
    return out;
}

std::vector<int> stratified_fold_assignment(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw DomainError("cross-validation needs at least two folds");
    if (static_cast<std::size_t>(folds) > labels.size()) throw DomainError("more folds than rows");
    Rng rng = make_rng(derive_seed(seed, streams::kFolds));
    std::vector<int> fold(labels.size(), 0);
    int next = 0;
    for (int cls : {+1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) {
            fold[i] = next;
            next = (next + 1) % folds;
        }
    }
    return fold;
}

namespace {

// Held-out correct count for one fold on a precomputed kernel.
std::size_t fold_correct(const Eigen::MatrixXd& kernel, std::span<const int> labels, std::span<const int> fold_of,
                         int fold, double cost, const SmoOptions& options) {
    std::vector<Eigen::Index> train_idx;
    std::vector<Eigen::Index> test_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (fold_of[i] == fold ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
    }
    std::vector<int> ytr(train_idx.size());
    for (std::size_t k = 0; k < train_idx.size(); ++k) ytr[k] = labels[static_cast<std::size_t>(train_idx[k])];

    std::size_t correct = 0;
    if (!both_classes(ytr)) {
        const int only = ytr.empty() ? 1 : ytr.front();
        for (Eigen::Index t : test_idx) correct += labels[static_cast<std::size_t>(t)] == only;
        return correct;
    }
    const Eigen::MatrixXd ktr = kernel(train_idx, train_idx);
    const std::vector<double> upper(train_idx.size(), cost);
    const DualSolution sol = solve_dual(ktr, ytr, upper, options);
    Eigen::VectorXd ya(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t k = 0; k < train_idx.size(); ++k) ya(static_cast<Eigen::Index>(k)) = sol.alpha(static_cast<Eigen::Index>(k)) * ytr[k];
    for (Eigen::Index t : test_idx) {
        double f = sol.bias;
        for (std::size_t k = 0; k < train_idx.size(); ++k) {
            const double a = ya(static_cast<Eigen::Index>(k));
            if (a != 0.0) f += a * kernel(t, train_idx[k]);
        }
        correct += sign_label(f) == labels[static_cast<std::size_t>(t)];
    }
    return correct;
}

void require_cv(const Dataset& data, int folds) {
    if (!data.has_both_classes()) throw DegenerateDataError("cross-validation needs both classes");
    if (folds < 2 || static_cast<std::size_t>(folds) > data.size()) throw DomainError("infeasible fold count");
}

}  // namespace

CvResult k_fold_cv_detailed(const Dataset& data, const SvmParams& params, int folds, std::uint64_t seed,
                            const SmoOptions& options) {
    params.validate();
    require_cv(data, folds);
    const std::vector<int> fold_of = stratified_fold_assignment(data.labels(), folds, seed);
    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(data.features(), data.features()), params.gamma);
    std::vector<std::size_t> correct(static_cast<std::size_t>(folds), 0);
    parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
        correct[f] = fold_correct(k, data.labels(), fold_of, static_cast<int>(f), params.cost, options);
    });
    return {std::accumulate(correct.begin(), correct.end(), std::size_t{0}), data.size()};
}

double k_fold_cv(const Dataset& data, const SvmParams& params, int folds, std::uint64_t seed,
                 const SmoOptions& options) {
    return k_fold_cv_detailed(data, params, folds, seed, options).accuracy();
}

GridSpec GridSpec::default_grid(int folds) {
    GridSpec g;
    for (int e = -5; e <= 15; e += 2) g.costs.push_back(std::ldexp(1.0, e));
    for (int e = -15; e <= 3; e += 2) g.gammas.push_back(std::ldexp(1.0, e));
    g.folds = folds;
    return g;
}

void GridSpec::validate() const {
    if (costs.empty() || gammas.empty()) throw DomainError("grid must be non-empty");
    if (folds < 2) throw DomainError("grid search needs at least two folds");
    for (double c : costs) SvmParams{c, 1.0}.validate();
    for (double g : gammas) SvmParams{1.0, g}.validate();
}

GridResult grid_search(const Dataset& data, const GridSpec& grid, std::uint64_t seed, const SmoOptions& options) {
    grid.validate();
    if (!data.has_both_classes()) throw DegenerateDataError("grid search needs both classes");
    const int folds = std::min<int>(grid.folds, static_cast<int>(data.size()));
    require_cv(data, folds);

    std::vector<double> costs = grid.costs;
    std::vector<double> gammas = grid.gammas;
    std::sort(costs.begin(), costs.end());
    std::sort(gammas.begin(), gammas.end());

    const std::vector<int> fold_of = stratified_fold_assignment(data.labels(), folds, seed);
    const Eigen::MatrixXd d2 = squared_distances(data.features(), data.features());
    std::vector<Eigen::MatrixXd> kernels;
    kernels.reserve(gammas.size());
    for (double g : gammas) kernels.push_back(rbf_from_distances(d2, g));

    const std::size_t ng = gammas.size();
    const std::size_t jobs = costs.size() * ng * static_cast<std::size_t>(folds);
    std::vector<std::size_t> correct(jobs, 0);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t f = job % static_cast<std::size_t>(folds);
        const std::size_t point = job / static_cast<std::size_t>(folds);
        correct[job] = fold_correct(kernels[point % ng], data.labels(), fold_of, static_cast<int>(f),
                                    costs[point / ng], options);
    });

    GridResult result;
    result.folds_used = folds;
    std::size_t best_correct = 0;
    bool have = false;
    for (std::size_t point = 0; point < costs.size() * ng; ++point) {
        std::size_t c = 0;
        for (int f = 0; f < folds; ++f) c += correct[point * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f)];
        const SvmParams params{costs[point / ng], gammas[point % ng]};
        result.table.push_back({params, {c, data.size()}});
        if (!have || c > best_correct) {
            have = true;
            best_correct = c;
            result.best = params;
        }
    }
    result.accuracy = static_cast<double>(best_correct) / static_cast<double>(data.size());
    return result;
}

nlohmann::json model_to_json(const SvmModel& model) {
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        sv.push_back(std::vector<double>(model.support_vectors.row(i).begin(), model.support_vectors.row(i).end()));
    }
    return {{"params", {{"C", model.params.cost}, {"gamma", model.params.gamma}}},
            {"bias", model.bias},
            {"support_vectors", sv},
            {"alphas", std::vector<double>(model.coefficients.begin(), model.coefficients.end())}};
}

SvmModel model_from_json(const nlohmann::json& j) {
    try {
        SvmModel m;
        m.params = {j.at("params").at("C").get<double>(), j.at("params").at("gamma").get<double>()};
        m.params.validate();
        m.bias = j.at("bias").get<double>();
        const auto alphas = j.at("alphas").get<std::vector<double>>();
        const auto& sv = j.at("support_vectors");
        if (sv.size() != alphas.size()) throw DomainError("support vector and alpha counts differ");
        const auto dims = sv.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(sv.front().size());
        m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), dims);
        m.coefficients = Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
        for (std::size_t i = 0; i < sv.size(); ++i) {
            const auto row = sv[i].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != dims) throw DomainError("ragged support vectors");
            m.support_vectors.row(static_cast<Eigen::Index>(i)) =
                Eigen::Map<const Eigen::RowVectorXd>(row.data(), dims);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace steersvm
