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


// Acceptance runner: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; --criterion N (repeatable) selects a subset.

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/lhs_oracle.hpp"
#include "oracles/svm_qp_oracle.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/pipeline.hpp"
#include "steersvm/qstate.hpp"
#include "steersvm/s4vm.hpp"
#include "steersvm/sdp_steer.hpp"
#include "steersvm/svm.hpp"

using namespace steersvm;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // runtime bound, part of the verdict
    std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

// Product states and the maximally mixed state never certify steering.
Outcome sdp_soundness() {
    Rng rng = make_rng(101);
    std::vector<TwoQubitState> states;
    for (int i = 0; i < 200; ++i) states.push_back(random_product_state(rng));
    states.push_back(maximally_mixed_state());
    std::ostringstream detail;
    int total_negative = 0;
    for (int m : {2, 4, 8}) {
        std::vector<int> labels(states.size());
        parallel_for(states.size(), [&](std::size_t i) {
            labels[i] = label_state(states[i], m, 100, SdpSettings{}, derive_seed(7, static_cast<std::uint64_t>(m), i));
        });
        const auto neg = std::count(labels.begin(), labels.end(), -1);
        total_negative += static_cast<int>(neg);
        detail << (m == 2 ? "" : ", ") << "m=" << m << ": " << neg << "/" << states.size() << " steerable";
    }
    return {total_negative == 0, detail.str()};
}

// Werner(pi/4) with two settings: threshold 1/sqrt(2).
Outcome sdp_sharpness() {
    int above = 0;
    int below = 0;
    const TwoQubitState hi = werner_state({0.80, std::numbers::pi / 4});
    const TwoQubitState lo = werner_state({0.65, std::numbers::pi / 4});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        above += label_state(hi, 2, 100, SdpSettings{}, seed) == -1;
        below += label_state(lo, 2, 100, SdpSettings{}, seed) == +1;
    }
    return {above == 10 && below == 10,
            "p=0.80 steerable in " + std::to_string(above) + "/10 seeds, p=0.65 unsteerable in " +
                std::to_string(below) + "/10 seeds"};
}

// Witness objective against the LHS-side barrier formulation.
Outcome sdp_cross_validation() {
    double worst = 0.0;
    int failures = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const Assemblage sig =
            assemblage(random_density_matrix(derive_seed(31, 1, k)), random_measurement_set(2, derive_seed(31, 2, k)));
        const SteeringWitness w = solve_steering_sdp(sig);
        const oracle::LhsResult ref = oracle::lhs_optimal_value(sig);
        if (w.status != SolveStatus::Optimal || !ref.converged) {
            ++failures;
            continue;
        }
        worst = std::max(worst, std::abs(w.objective - ref.value));
    }
    return {failures == 0 && worst <= 1e-6,
            "max |difference| = " + fmt(worst, 3) + " over 50 assemblages, " + std::to_string(failures) + " unsolved"};
}

// Largest KKT residual of a box-constrained dual solution.
double kkt_violation(const DualSolution& s, const Eigen::MatrixXd& k, const LabelVector& y, double cost) {
    double worst = 0.0;
    double balance = 0.0;
    Eigen::VectorXd ya(s.alpha.size());
    for (Eigen::Index i = 0; i < ya.size(); ++i) {
        ya(i) = s.alpha(i) * y[static_cast<std::size_t>(i)];
        balance += ya(i);
        worst = std::max({worst, -s.alpha(i), s.alpha(i) - cost});
    }
    worst = std::max(worst, std::abs(balance));
    const Eigen::VectorXd f = (k * ya).array() + s.bias;
    for (Eigen::Index i = 0; i < ya.size(); ++i) {
        const double margin = y[static_cast<std::size_t>(i)] * f(i);
        if (s.alpha(i) <= 0.0)
            worst = std::max(worst, 1.0 - margin);
        else if (s.alpha(i) >= cost)
            worst = std::max(worst, margin - 1.0);
        else
            worst = std::max(worst, std::abs(margin - 1.0));
    }
    return worst;
}

Outcome svm_oracle_equivalence() {
    Rng rng = make_rng(404);
    std::normal_distribution<double> g;
    double worst_obj = 0.0;
    double worst_kkt = 0.0;
    for (int r = 0; r < 100; ++r) {
        const int n = 2 + r % 19;
        FeatureMatrix x(n, 9);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 9; ++j) x(i, j) = 0.5 * g(rng);
        LabelVector y(static_cast<std::size_t>(n));
        for (auto& v : y) v = (rng() & 1u) ? 1 : -1;
        y[0] = 1;
        y[1] = -1;
        const double cost = std::ldexp(1.0, static_cast<int>(rng() % 11) - 5);
        const double gamma = std::ldexp(1.0, static_cast<int>(rng() % 9) - 5);
        const Eigen::MatrixXd k = rbf_from_distances(squared_distances(x, x), gamma);
        const DualSolution s = solve_dual(k, y, std::vector<double>(static_cast<std::size_t>(n), cost));
        const auto ref = oracle::svm_dual_qp(k, y, Eigen::VectorXd::Constant(n, cost));
        worst_obj = std::max(worst_obj, std::abs(s.dual_objective - ref.objective));
        worst_kkt = std::max(worst_kkt, kkt_violation(s, k, y, cost));
    }
    return {worst_obj <= 1e-6 && worst_kkt <= 1e-3,
            "max |dual - QP| = " + fmt(worst_obj, 3) + ", max KKT violation = " + fmt(worst_kkt, 3)};
}

LabelVector from_bits(std::uint32_t bits, std::size_t u) {
    LabelVector y(u);
    for (std::size_t j = 0; j < u; ++j) y[j] = ((bits >> j) & 1u) ? 1 : -1;
    return y;
}

Dataset noisy_clusters(int n, double spread, Rng& rng) {
    std::normal_distribution<double> g;
    FeatureMatrix x(n, 9);
    LabelVector y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        y[static_cast<std::size_t>(i)] = label;
        for (int j = 0; j < 9; ++j) x(i, j) = spread * g(rng);
        x(i, 0) += 0.5 * label;
    }
    return {x, y};
}

Outcome s4vm_identity_and_safety() {
    Rng rng = make_rng(505);
    const double lambda = 3.0;

    // Linear form of the improvement, compared with exact equality.
    int identity_failures = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t u = 1 + rng() % 60;
        LabelVector y(u), yhat(u), ysvm(u);
        for (std::size_t j = 0; j < u; ++j) {
            y[j] = (rng() & 1u) ? 1 : -1;
            yhat[j] = (rng() & 1u) ? 1 : -1;
            ysvm[j] = (rng() & 1u) ? 1 : -1;
        }
        const GainLoss gl = gain_loss(y, yhat, ysvm);
        const LinearImprovement li = linear_improvement(yhat, ysvm, lambda);
        double lin = li.d;
        for (std::size_t j = 0; j < u; ++j) lin += li.c(static_cast<Eigen::Index>(j)) * y[j];
        identity_failures += (gl.gain - lambda * gl.loss) != lin;
    }

    // Safety over end-to-end runs on assorted small problems.
    int unsafe = 0;
    int runs = 0;
    std::vector<int> unsafe_flags(200, 0);
    std::vector<Dataset> labeled(200), unlabeled(200);
    std::vector<S4vmParams> params(200);
    for (int r = 0; r < 200; ++r) {
        const int l = 4 + 2 * static_cast<int>(rng() % 4);
        const int u = 10 + 2 * static_cast<int>(rng() % 16);
        const double spread = 0.2 + 0.2 * static_cast<double>(rng() % 5);
        const Dataset all = noisy_clusters(l + u, spread, rng);
        std::vector<std::size_t> li(static_cast<std::size_t>(l)), ui(static_cast<std::size_t>(u));
        std::iota(li.begin(), li.end(), 0);
        std::iota(ui.begin(), ui.end(), static_cast<std::size_t>(l));
        labeled[r] = all.subset(li);
        unlabeled[r] = all.subset(ui);
        params[r] = S4vmParams::with_svm(std::ldexp(1.0, static_cast<int>(rng() % 5) - 1),
                                          std::ldexp(1.0, static_cast<int>(rng() % 5) - 4));
    }
    parallel_for(200, [&](std::size_t r) {
        const S4vmResult res = s4vm_run(labeled[r], unlabeled[r].features(), params[r], derive_seed(55, r));
        const double out = min_improvement(res.labels, res.pool.members, res.ysvm, params[r].lambda);
        const double base = min_improvement(res.ysvm, res.pool.members, res.ysvm, params[r].lambda);
        unsafe_flags[r] = !(out >= base && res.min_j_output >= res.min_j_ysvm);
    });
    for (int f : unsafe_flags) unsafe += f, ++runs;

    // Max-min against exhaustive enumeration for u <= 12.
    int mismatches = 0;
    int fallbacks = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t u = 4 + static_cast<std::size_t>(t % 9);
        LabelVector ysvm(u);
        for (auto& v : ysvm) v = (rng() & 1u) ? 1 : -1;
        std::vector<LabelVector> pool;
        const int members = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < members; ++k) {
            LabelVector c = ysvm;
            for (auto& v : c)
                if (rng() % 3 == 0) v = -v;
            pool.push_back(c);
        }
        double best = -std::numeric_limits<double>::infinity();
        for (std::uint32_t b = 0; b < (1u << u); ++b)
            best = std::max(best, min_improvement(from_bits(b, u), pool, ysvm, lambda));
        const MaxMinResult res = solve_maxmin(pool, ysvm, lambda);
        fallbacks += res.fallback_used;
        mismatches += !(res.min_j_output == best || res.fallback_used);
    }

    std::ostringstream d;
    d << "identity failures " << identity_failures << "/1000; unsafe runs " << unsafe << "/" << runs
      << "; max-min mismatches " << mismatches << "/100 (" << fallbacks << " fallbacks)";
    return {identity_failures == 0 && unsafe == 0 && mismatches == 0, d.str()};
}

// Balanced l/2 + l/2 subset, taken in set order.
Dataset balanced_prefix(const Dataset& set, int l) {
    std::vector<std::size_t> rows;
    int pos = 0;
    int neg = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        int& c = set.labels()[i] > 0 ? pos : neg;
        if (c < l / 2) {
            ++c;
            rows.push_back(i);
        }
    }
    return set.subset(rows);
}

Outcome trend_reproduction() {
    const std::uint64_t seed = 1;
    ExperimentConfig config;
    config.m = 2;
    config.u = 500;
    config.splits = 2;
    config.n_runs = 10;
    config.l = 30;
    config.validate();

    // One pool: a shared unlabeled set, l = 30 draws, and l = 10 sets nested inside them.
    GenerationStats stats;
    const Dataset pool =
        generate_balanced_dataset(config.u + config.n_runs * config.l, config, derive_seed(seed, streams::kUnlabeledSet), &stats);
    std::cerr << "  pool: " << pool.size() << " states from " << stats.draws << " draws\n";
    const ExperimentData data30 = split_pool(pool, config.u, 30, config.n_runs, seed);
    ExperimentData data10 = data30;
    for (auto& s : data10.labeled_sets) s = balanced_prefix(s, 10);

    std::ostringstream d;
    double gain[2] = {0.0, 0.0};
    bool better = true;
    int idx = 0;
    for (int l : {10, 30}) {
        ExperimentConfig c = config;
        c.l = l;
        const ComparisonTable t = compare_runs(c, l == 10 ? data10 : data30, seed);
        gain[idx] = t.mean_svm_error - t.mean_s4vm_error;
        better = better && t.mean_s4vm_error < t.mean_svm_error;
        d << "l=" << l << ": SVM " << fmt(t.mean_svm_error) << " S4VM " << fmt(t.mean_s4vm_error) << "; ";
        for (const auto& row : t.rows)
            std::cerr << "  l=" << l << " run " << row.run << ": svm " << fmt(row.svm.overall_error) << " s4vm "
                      << fmt(row.s4vm.overall_error) << (row.s4vm.fallback_used ? " (fallback)" : "") << "\n";
        ++idx;
    }
    d << "gain l=10 " << fmt(gain[0], 3) << " vs l=30 " << fmt(gain[1], 3);
    return {better && gain[0] > gain[1], d.str()};
}

Outcome werner_sweep_trend() {
    ExperimentConfig config;
    config.m = 4;
    config.l = 30;
    config.splits = 1;
    double svm = 0.0;
    double s4 = 0.0;
    std::ostringstream d;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SweepReport rep = werner_sweep(30, std::numbers::pi / 8, 500, 4, config, seed);
        svm += rep.svm_accuracy;
        s4 += rep.s4vm_accuracy;
        std::cerr << "  seed " << seed << ": svm " << fmt(rep.svm_accuracy) << " s4vm " << fmt(rep.s4vm_accuracy)
                  << "\n";
    }
    svm /= 5.0;
    s4 /= 5.0;
    d << "mean accuracy SVM " << fmt(svm) << ", S4VM " << fmt(s4) << " over 5 seeds";
    return {s4 >= 0.90 && s4 >= svm - 0.02, d.str()};
}

Outcome feature_invariants() {
    double worst_trace = 0.0;
    double worst_round_trip = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const TwoQubitState st = random_density_matrix(derive_seed(808, k));
        const Mat2 rb = partial_trace_alice(st);
        const double lhs = steering_weighted_state(st).trace().real();
        const double rhs = (rb * rb).trace().real();
        worst_trace = std::max(worst_trace, std::abs(lhs - rhs));
        worst_round_trip = std::max(worst_round_trip, (pauli_decompose(st).reconstruct() - st.rho()).cwiseAbs().maxCoeff());
    }
    return {worst_trace <= 1e-10 && worst_round_trip <= 1e-12,
            "max |tr(rho_0) - tr(rho_B^2)| = " + fmt(worst_trace, 3) + ", max round-trip error = " +
                fmt(worst_round_trip, 3)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steersvm acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criterion number to run (repeatable)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "SDP soundness", 600.0, sdp_soundness},
        {2, "SDP sharpness at the Werner threshold", 300.0, sdp_sharpness},
        {3, "SDP cross-validation", std::numeric_limits<double>::infinity(), sdp_cross_validation},
        {4, "SVM oracle equivalence", std::numeric_limits<double>::infinity(), svm_oracle_equivalence},
        {5, "S4VM identity and safety", std::numeric_limits<double>::infinity(), s4vm_identity_and_safety},
        {6, "trend at desk scale", 3600.0, trend_reproduction},
        {7, "Werner sweep trend", 1800.0, werner_sweep_trend},
        {8, "feature-layer invariants", 60.0, feature_invariants},
    };

    int failed = 0;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::cout << "criterion " << c.id << " (" << c.name << "): " << (pass ? "PASS" : "FAIL") << "  " << o.detail
                  << "; " << fmt(secs, 3) << " s";
        if (!in_time) std::cout << " exceeds the " << c.budget_seconds << " s budget";
        std::cout << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
