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

#include "steersvm/s4vm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "steersvm/errors.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/rng.hpp"

namespace steersvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double label_sum(std::span<const int> y) { return std::accumulate(y.begin(), y.end(), 0.0); }

bool feasible_balance(std::size_t u, std::span<const int> labeled_labels, double beta) {
    LabelVector probe(u, -1);
    for (std::size_t k = 0; k <= u; ++k) {
        if (balance_ok(probe, labeled_labels, beta)) return true;
        if (k < u) probe[k] = 1;
    }
    return false;
}

void check_same_length(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DomainError("label vectors differ in length");
}

int hamming(const LabelVector& a, const LabelVector& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

}  // namespace

S4vmParams S4vmParams::with_svm(double cost, double gamma) {
    S4vmParams p;
    p.cost_labeled = cost;
    p.cost_unlabeled = 0.1 * cost;
    p.gamma = gamma;
    return p;
}

void S4vmParams::validate() const {
    if (!(beta >= 0.0)) throw DomainError("beta must be non-negative");
    if (!(lambda > 1.0)) throw DomainError("lambda must exceed 1");
    if (separators < 1) throw DomainError("need at least one separator");
    if (samples < separators) throw DomainError("samples must be at least the separator count");
    SvmParams{cost_labeled, gamma}.validate();
    SvmParams{cost_unlabeled, gamma}.validate();
    if (varsigma < 0.0 || varsigma > 1.0) throw DomainError("varsigma must lie in [0, 1]");
    if (flip_schedule.empty()) throw DomainError("flip schedule must be non-empty");
    for (double p : flip_schedule) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("flip probabilities must lie in [0, 1]");
    }
    if (balance_retries < 0 || local_search_rounds < 0 || maxmin_iterations < 1) {
        throw DomainError("iteration counts must be non-negative");
    }
}

bool balance_ok(std::span<const int> yhat, std::span<const int> labeled_labels, double beta) {
    if (yhat.empty() || labeled_labels.empty()) throw DomainError("balance needs non-empty label sets");
    const double u = static_cast<double>(yhat.size());
    const double l = static_cast<double>(labeled_labels.size());
    // Cross-multiplied to keep the integer part exact.
    const double gap = std::abs(label_sum(yhat) * l - label_sum(labeled_labels) * u);
    return gap <= beta * u * l * (1.0 + 1e-12);
}

void enforce_balance(LabelVector& yhat, std::span<const double> decision_values, std::span<const int> labeled_labels,
                     double beta) {
    if (decision_values.size() != yhat.size()) throw DomainError("decision values and labels differ in length");
    if (balance_ok(yhat, labeled_labels, beta)) return;
    if (!feasible_balance(yhat.size(), labeled_labels, beta)) {
        throw SamplingError("no labeling of the unlabeled set satisfies the balance constraint");
    }
    const double target = label_sum(labeled_labels) / static_cast<double>(labeled_labels.size());
    const int surplus = label_sum(yhat) / static_cast<double>(yhat.size()) > target ? 1 : -1;
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < yhat.size(); ++j) {
        if (yhat[j] == surplus) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(decision_values[a]) < std::abs(decision_values[b]);
    });
    for (std::size_t j : order) {
        yhat[j] = -surplus;
        if (balance_ok(yhat, labeled_labels, beta)) return;
    }
    throw SamplingError("balance repair failed");
}

std::vector<LabelVector> sample_candidates(const LabelVector& ysvm, std::span<const double> decision_values,
                                           std::span<const int> labeled_labels, const S4vmParams& params,
                                           std::uint64_t seed) {
    params.validate();
    if (ysvm.size() < 2) throw DomainError("sampling needs at least two unlabeled instances");
    if (decision_values.size() != ysvm.size()) throw DomainError("decision values and labels differ in length");
    if (!feasible_balance(ysvm.size(), labeled_labels, params.beta)) {
        throw SamplingError("no labeling of the unlabeled set satisfies the balance constraint");
    }

    Rng rng = make_rng(derive_seed(seed, streams::kCandidates));
    std::uniform_int_distribution<std::size_t> pick(0, params.flip_schedule.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> scale(ysvm.size());
    for (std::size_t j = 0; j < ysvm.size(); ++j) scale[j] = 1.0 / (1.0 + std::abs(decision_values[j]));

    std::vector<LabelVector> out;
    out.reserve(static_cast<std::size_t>(params.samples));
    const bool ysvm_balanced = balance_ok(ysvm, labeled_labels, params.beta);
    for (int k = 0; k < params.samples; ++k) {
        if (k == 0 && ysvm_balanced) {
            out.push_back(ysvm);
            continue;
        }
        const double p = params.flip_schedule[pick(rng)];
        LabelVector draw;
        for (int attempt = 0; attempt <= params.balance_retries; ++attempt) {
            draw = ysvm;
            for (std::size_t j = 0; j < draw.size(); ++j) {
                if (unit(rng) < p * scale[j]) draw[j] = -draw[j];
            }
            if (balance_ok(draw, labeled_labels, params.beta)) break;
        }
        enforce_balance(draw, decision_values, labeled_labels, params.beta);
        out.push_back(std::move(draw));
    }
    return out;
}

namespace {

struct CombinedProblem {
    Eigen::MatrixXd kernel;  // over labeled rows then unlabeled rows
    std::vector<int> labeled_labels;
    std::vector<double> upper;
    std::size_t l = 0;
    std::size_t u = 0;
};

CombinedProblem combine(const Dataset& labeled, const FeatureMatrix& unlabeled, const S4vmParams& params) {
    if (!labeled.empty() && unlabeled.rows() > 0 && labeled.dims() != unlabeled.cols()) {
        throw DomainError("labeled and unlabeled features differ in dimension");
    }
    CombinedProblem p;
    p.l = labeled.size();
    p.u = static_cast<std::size_t>(unlabeled.rows());
    FeatureMatrix all(static_cast<Eigen::Index>(p.l + p.u), unlabeled.rows() > 0 ? unlabeled.cols() : labeled.dims());
    if (p.l > 0) all.topRows(static_cast<Eigen::Index>(p.l)) = labeled.features();
    if (p.u > 0) all.bottomRows(static_cast<Eigen::Index>(p.u)) = unlabeled;
    p.kernel = rbf_from_distances(squared_distances(all, all), params.gamma);
    p.labeled_labels = labeled.labels();
    p.upper.assign(p.l, params.cost_labeled);
    p.upper.resize(p.l + p.u, params.cost_unlabeled);
    return p;
}

struct Fit {
    double objective = kInf;
    Eigen::VectorXd unlabeled_decision;
};

Fit fit_labeling(const CombinedProblem& p, const LabelVector& labeling) {
    std::vector<int> y = p.labeled_labels;
    y.insert(y.end(), labeling.begin(), labeling.end());
    const bool pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool neg = std::find(y.begin(), y.end(), -1) != y.end();
    Fit fit;
    if (!pos || !neg) return fit;
    const DualSolution sol = solve_dual(p.kernel, y, p.upper);
    fit.objective = primal_objective(p.kernel, y, p.upper, sol);
    Eigen::VectorXd ya(sol.alpha.size());
    for (Eigen::Index i = 0; i < ya.size(); ++i) ya(i) = sol.alpha(i) * y[static_cast<std::size_t>(i)];
    fit.unlabeled_decision = (p.kernel.bottomRows(static_cast<Eigen::Index>(p.u)) * ya).array() + sol.bias;
    return fit;
}

}  // namespace

double separator_objective(const LabelVector& labeling, const Dataset& labeled, const FeatureMatrix& unlabeled,
                           const S4vmParams& params) {
    params.validate();
    if (labeling.size() != static_cast<std::size_t>(unlabeled.rows())) {
        throw DomainError("labeling and unlabeled set differ in length");
    }
    for (int y : labeling) {
        if (y != 1 && y != -1) throw DomainError("labels must be +1 or -1");
    }
    return fit_labeling(combine(labeled, unlabeled, params), labeling).objective;
}

SeparatorPool select_separators(const std::vector<LabelVector>& candidates, std::span<const double> objectives,
                                int separators) {
    if (separators < 1) throw DomainError("need at least one separator");
    if (objectives.size() != candidates.size()) throw DomainError("candidates and objectives differ in count");

    SeparatorPool pool;
    pool.assignment.assign(candidates.size(), -1);
    std::vector<std::size_t> distinct;
    std::vector<std::size_t> owner(candidates.size(), 0);  // distinct slot per candidate
    std::map<LabelVector, std::size_t> seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!std::isfinite(objectives[i])) continue;
        const auto [it, inserted] = seen.emplace(candidates[i], distinct.size());
        if (inserted) distinct.push_back(i);
        owner[i] = it->second;
    }
    const std::size_t n = distinct.size();
    const auto t = static_cast<std::size_t>(separators);
    pool.shrunk = n < t;
    if (n == 0) return pool;

    std::vector<int> cluster(n, 0);
    std::size_t k = std::min(n, t);
    if (n <= t) {
        std::iota(cluster.begin(), cluster.end(), 0);
    } else {
        std::vector<std::vector<int>> dist(n, std::vector<int>(n, 0));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                dist[a][b] = dist[b][a] = hamming(candidates[distinct[a]], candidates[distinct[b]]);
            }
        }
        std::vector<std::size_t> medoids;
        std::size_t first = 0;
        for (std::size_t a = 1; a < n; ++a) {
            if (objectives[distinct[a]] < objectives[distinct[first]]) first = a;
        }
        medoids.push_back(first);
        std::vector<int> nearest(n);
        for (std::size_t a = 0; a < n; ++a) nearest[a] = dist[a][first];
        while (medoids.size() < k) {
            std::size_t far = 0;
            for (std::size_t a = 1; a < n; ++a) {
                if (nearest[a] > nearest[far]) far = a;
            }
            medoids.push_back(far);
            for (std::size_t a = 0; a < n; ++a) nearest[a] = std::min(nearest[a], dist[a][far]);
        }
        for (int iter = 0; iter < 100; ++iter) {
            for (std::size_t a = 0; a < n; ++a) {
                std::size_t best = 0;
                for (std::size_t c = 1; c < k; ++c) {
                    if (dist[a][medoids[c]] < dist[a][medoids[best]]) best = c;
                }
                cluster[a] = static_cast<int>(best);
            }
            bool changed = false;
            for (std::size_t c = 0; c < k; ++c) {
                std::size_t best = medoids[c];
                long best_cost = std::numeric_limits<long>::max();
                for (std::size_t a = 0; a < n; ++a) {
                    if (cluster[a] != static_cast<int>(c)) continue;
                    long cost = 0;
                    for (std::size_t b = 0; b < n; ++b) {
                        if (cluster[b] == static_cast<int>(c)) cost += dist[a][b];
                    }
                    if (cost < best_cost || (cost == best_cost && a == medoids[c])) {
                        best_cost = cost;
                        best = a;
                    }
                }
                if (best != medoids[c]) {
                    medoids[c] = best;
                    changed = true;
                }
            }
            if (!changed) break;
        }
    }

    std::vector<std::size_t> rep(k, n);
    for (std::size_t a = 0; a < n; ++a) {
        const auto c = static_cast<std::size_t>(cluster[a]);
        if (rep[c] == n || objectives[distinct[a]] < objectives[distinct[rep[c]]]) rep[c] = a;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (rep[c] == n) continue;
        pool.members.push_back(candidates[distinct[rep[c]]]);
        pool.objectives.push_back(objectives[distinct[rep[c]]]);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (std::isfinite(objectives[i])) pool.assignment[i] = cluster[owner[i]];
    }
    return pool;
}

GainLoss gain_loss(std::span<const int> y, std::span<const int> yhat, std::span<const int> ysvm) {
    check_same_length(y, yhat);
    check_same_length(y, ysvm);
    GainLoss g;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[j] == yhat[j] && yhat[j] != ysvm[j]) ++g.gain;
        if (y[j] != yhat[j] && yhat[j] == ysvm[j]) ++g.loss;
    }
    return g;
}

double improvement(std::span<const int> y, std::span<const int> yhat, std::span<const int> ysvm, double lambda) {
    const GainLoss g = gain_loss(y, yhat, ysvm);
    return g.gain - lambda * g.loss;
}

double min_improvement(std::span<const int> y, const std::vector<LabelVector>& pool, std::span<const int> ysvm,
                       double lambda) {
    if (pool.empty()) throw DomainError("separator pool is empty");
    double worst = kInf;
    for (const auto& yhat : pool) worst = std::min(worst, improvement(y, yhat, ysvm, lambda));
    return worst;
}

LinearImprovement linear_improvement(std::span<const int> yhat, std::span<const int> ysvm, double lambda) {
    check_same_length(yhat, ysvm);
    LinearImprovement li;
    li.c.resize(static_cast<Eigen::Index>(yhat.size()));
    double overlap = 0.0;
    for (std::size_t j = 0; j < yhat.size(); ++j) {
        li.c(static_cast<Eigen::Index>(j)) = 0.25 * ((1.0 + lambda) * yhat[j] + (lambda - 1.0) * ysvm[j]);
        overlap += yhat[j] * ysvm[j];
    }
    li.d = 0.25 * (-(1.0 + lambda) * overlap + (1.0 - lambda) * static_cast<double>(yhat.size()));
    return li;
}

MaxMinResult solve_maxmin(const std::vector<LabelVector>& pool, const LabelVector& ysvm, double lambda,
                          int iterations) {
    if (pool.empty()) throw DomainError("separator pool is empty");
    const auto u = static_cast<Eigen::Index>(ysvm.size());
    std::vector<LinearImprovement> terms;
    for (const auto& yhat : pool) terms.push_back(linear_improvement(yhat, ysvm, lambda));

    auto relaxed = [&](const Eigen::VectorXd& y, std::size_t* arg) {
        double v = kInf;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const double s = terms[t].c.dot(y) + terms[t].d;
            if (s < v) {
                v = s;
                if (arg != nullptr) *arg = t;
            }
        }
        return v;
    };
    auto round = [&](const Eigen::VectorXd& y) {
        LabelVector out(static_cast<std::size_t>(u));
        for (Eigen::Index j = 0; j < u; ++j) out[static_cast<std::size_t>(j)] = sign_label(y(j));
        return out;
    };

    Eigen::VectorXd y(u);
    for (Eigen::Index j = 0; j < u; ++j) y(j) = ysvm[static_cast<std::size_t>(j)];
    Eigen::VectorXd best_y = y;
    double best = relaxed(y, nullptr);
    for (int k = 1; k <= iterations; ++k) {
        std::size_t active = 0;
        relaxed(y, &active);
        // Unnormalized on purpose: entries of c are O(1), so early steps can cross
        // zero. Dividing by ||c|| ~ sqrt(u) stalls the iterate near ysvm.
        y = (y + terms[active].c / std::sqrt(static_cast<double>(k))).cwiseMax(-1.0).cwiseMin(1.0);
        const double v = relaxed(y, nullptr);
        if (v > best) {
            best = v;
            best_y = y;
        }
    }

    MaxMinResult result;
    result.relaxed_value = best;
    result.min_j_ysvm = min_improvement(ysvm, pool, ysvm, lambda);
    result.labels = round(best_y);
    result.min_j_output = min_improvement(result.labels, pool, ysvm, lambda);
    if (result.min_j_output < result.min_j_ysvm) {
        result.labels = ysvm;
        result.min_j_output = result.min_j_ysvm;
        result.fallback_used = true;
    }
    return result;
}

S4vmResult s4vm_run(const Dataset& labeled, const FeatureMatrix& unlabeled, const S4vmParams& params,
                    std::uint64_t seed) {
    params.validate();
    S4vmResult result;
    result.seed = seed;
    result.params = params;
    const SvmModel inductive = train(labeled, {params.cost_labeled, params.gamma});
    if (unlabeled.rows() == 0) return result;
    if (unlabeled.cols() != labeled.dims()) throw DomainError("labeled and unlabeled features differ in dimension");
    const Eigen::VectorXd f = inductive.decision_values(unlabeled);
    result.ysvm.resize(static_cast<std::size_t>(f.size()));
    for (Eigen::Index j = 0; j < f.size(); ++j) result.ysvm[static_cast<std::size_t>(j)] = sign_label(f(j));
    const std::span<const double> fspan(f.data(), static_cast<std::size_t>(f.size()));

    auto fall_back = [&](bool sampling) {
        result.labels = result.ysvm;
        result.sampling_failed = sampling;
        result.fallback_used = true;
        result.min_j_output = 0.0;
        result.min_j_ysvm = 0.0;
        return result;
    };

    std::vector<LabelVector> candidates;
    try {
        candidates = sample_candidates(result.ysvm, fspan, labeled.labels(), params, seed);
    } catch (const SamplingError&) {
        return fall_back(true);
    }

    const CombinedProblem problem = combine(labeled, unlabeled, params);
    result.candidate_objectives.assign(candidates.size(), kInf);
    parallel_for(candidates.size(), [&](std::size_t i) {
        LabelVector& y = candidates[i];
        Fit fit = fit_labeling(problem, y);
        for (int round = 0; round < params.local_search_rounds && std::isfinite(fit.objective); ++round) {
            LabelVector next(y.size());
            for (std::size_t j = 0; j < y.size(); ++j) next[j] = sign_label(fit.unlabeled_decision(static_cast<Eigen::Index>(j)));
            enforce_balance(next, {fit.unlabeled_decision.data(), next.size()}, problem.labeled_labels, params.beta);
            if (next == y) break;
            y = std::move(next);
            fit = fit_labeling(problem, y);
        }
        result.candidate_objectives[i] = fit.objective;
    });

    result.pool = select_separators(candidates, result.candidate_objectives, params.separators);
    if (result.pool.members.empty()) return fall_back(false);

    const MaxMinResult mm = solve_maxmin(result.pool.members, result.ysvm, params.lambda, params.maxmin_iterations);
    result.labels = mm.labels;
    result.fallback_used = mm.fallback_used;
    result.min_j_output = mm.min_j_output;
    result.min_j_ysvm = mm.min_j_ysvm;
    return result;
}

nlohmann::json s4vm_params_to_json(const S4vmParams& p) {
    return {{"beta", p.beta},
            {"lambda", p.lambda},
            {"T", p.separators},
            {"n_samples", p.samples},
            {"C1", p.cost_labeled},
            {"C2", p.cost_unlabeled},
            {"gamma", p.gamma},
            {"varsigma", p.varsigma},
            {"G", p.diversity_penalty},
            {"flip_schedule", p.flip_schedule},
            {"balance_retries", p.balance_retries},
            {"local_search_rounds", p.local_search_rounds},
            {"maxmin_iterations", p.maxmin_iterations}};
}

nlohmann::json s4vm_report_json(const S4vmResult& r) {
    return {{"seed", r.seed},
            {"params", s4vm_params_to_json(r.params)},
            {"ysvm", r.ysvm},
            {"pool_objectives", r.pool.objectives},
            {"pool_shrunk", r.pool.shrunk},
            {"labels", r.labels},
            {"sampling_failed", r.sampling_failed},
            {"fallback_used", r.fallback_used},
            {"min_J_output", r.min_j_output},
            {"min_J_ysvm", r.min_j_ysvm}};
}

}  // namespace steersvm
