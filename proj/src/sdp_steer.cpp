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

#include "steersvm/sdp_steer.hpp"

#include <algorithm>
#include <limits>

#include "steersvm/errors.hpp"
#include "steersvm/rng.hpp"

namespace steersvm {

StrategyTable enumerate_strategies(int m, int q) {
    if (m < 1 || q < 1) throw DomainError("strategy enumeration needs m >= 1 and q >= 1");
    std::size_t rows = 1;
    for (int i = 0; i < m; ++i) {
        rows *= static_cast<std::size_t>(q);
        if (rows > kMaxStrategies) throw SizeError("q^m exceeds the strategy enumeration guard of 2^16");
    }
    StrategyTable t;
    t.m_ = m;
    t.q_ = q;
    t.table_.resize(rows * static_cast<std::size_t>(m));
    for (std::size_t lambda = 0; lambda < rows; ++lambda) {
        std::size_t rest = lambda;
        for (int A = m - 1; A >= 0; --A) {
            t.table_[lambda * static_cast<std::size_t>(m) + static_cast<std::size_t>(A)] = static_cast<int>(rest % static_cast<std::size_t>(q));
            rest /= static_cast<std::size_t>(q);
        }
    }
    return t;
}

void SdpSettings::validate() const {
    if (!(tolerance > 0.0)) throw DomainError("SDP tolerance must be positive");
    if (!(steerable_threshold < 0.0)) throw DomainError("steerable threshold must be negative");
    if (max_iterations < 1) throw DomainError("SDP max_iterations must be positive");
}

Mat2 SteeringWitness::strategy_operator(const StrategyTable& table, std::size_t lambda) const {
    Mat2 sum = Mat2::Zero();
    for (int A = 0; A < measurements; ++A) sum += (*this)(table.outcome(lambda, A), A);
    return sum;
}

double SteeringWitness::pairing(const Assemblage& sigma) const {
    double total = 0.0;
    for (int A = 0; A < measurements; ++A)
        for (int a = 0; a < kOutcomes; ++a) total += ((*this)(a, A) * sigma(a, A)).trace().real();
    return total;
}

namespace {

// Variable layout: four Pauli coordinates per free F_{a|A}.
struct GaugeLayout {
    int m = 0;
    std::vector<int> slot;  // (A * q + a) -> first variable index or -1 when fixed to zero

    explicit GaugeLayout(int measurements) : m(measurements), slot(static_cast<std::size_t>(measurements * kOutcomes), -1) {
        int next = 0;
        for (int A = 0; A < m; ++A)
            for (int a = 0; a < kOutcomes; ++a) {
                if (m >= 2 && A >= 1 && a == 1) continue;
                slot[static_cast<std::size_t>(A * kOutcomes + a)] = next;
                next += 4;
            }
    }
    int variables() const {
        return static_cast<int>(4 * std::count_if(slot.begin(), slot.end(), [](int s) { return s >= 0; }));
    }
};

}  // namespace

ConicProblem steering_conic_problem(const Assemblage& sigma, const StrategyTable& table) {
    const int m = sigma.measurements();
    const GaugeLayout layout(m);
    const int n = layout.variables();
    ConicProblem problem;
    problem.objective = Eigen::VectorXd::Zero(n);
    for (int A = 0; A < m; ++A)
        for (int a = 0; a < kOutcomes; ++a) {
            const int base = layout.slot[static_cast<std::size_t>(A * kOutcomes + a)];
            if (base < 0) continue;
            for (int j = 0; j < 4; ++j) problem.objective(base + j) = (pauli(j) * sigma(a, A)).trace().real();
        }

    problem.eq_matrix = Eigen::MatrixXd::Zero(1, n);
    problem.eq_rhs = Eigen::VectorXd::Ones(1);
    problem.blocks.resize(table.rows());
    for (std::size_t lambda = 0; lambda < table.rows(); ++lambda) {
        LmiBlock& block = problem.blocks[lambda];
        block.coefficients.assign(static_cast<std::size_t>(n), Mat2::Zero());
        for (int A = 0; A < m; ++A) {
            const int base = layout.slot[static_cast<std::size_t>(A * kOutcomes + table.outcome(lambda, A))];
            if (base < 0) continue;
            for (int j = 0; j < 4; ++j) block.coefficients[static_cast<std::size_t>(base + j)] += pauli(j);
            // tr(I) = 2, traceless Paulis contribute nothing.
            problem.eq_matrix(0, base) += 2.0;
        }
    }
    return problem;
}

SteeringWitness solve_steering_sdp(const Assemblage& sigma, const SdpSettings& settings) {
    settings.validate();
    const int m = sigma.measurements();
    const StrategyTable table = enumerate_strategies(m, kOutcomes);
    const ConicProblem problem = steering_conic_problem(sigma, table);
    IpSettings ip;
    ip.gap_tolerance = settings.tolerance;
    ip.feasibility_tolerance = std::min(1e-9, settings.tolerance);
    ip.max_iterations = settings.max_iterations;
    const ConicSolution sol = ip_solve(problem, ip);

    const GaugeLayout layout(m);
    SteeringWitness w;
    w.measurements = m;
    w.F.assign(static_cast<std::size_t>(m * kOutcomes), Mat2::Zero());
    for (std::size_t idx = 0; idx < w.F.size(); ++idx) {
        const int base = layout.slot[idx];
        if (base < 0) continue;
        for (int j = 0; j < 4; ++j) w.F[idx] += sol.x(base + j) * pauli(j);
    }
    w.status = sol.status;
    w.iterations = sol.iterations;
    w.objective = w.pairing(sigma);
    return w;
}

bool certifies_steering(const SteeringWitness& witness, const SdpSettings& settings) {
    return witness.status == SolveStatus::Optimal && witness.objective < settings.steerable_threshold;
}

std::uint64_t trial_measurement_seed(std::uint64_t seed, int trial) {
    return derive_seed(seed, streams::kMeasurement, static_cast<std::uint64_t>(trial));
}

LabelOutcome label_state_detailed(const TwoQubitState& state, int m, int trials, const SdpSettings& settings,
                                  std::uint64_t seed) {
    if (m < 1) throw DomainError("label_state needs m >= 1");
    if (trials < 1) throw DomainError("label_state needs at least one trial");
    settings.validate();
    // Fails early on oversized m instead of inside the first trial.
    (void)enumerate_strategies(m, kOutcomes);

    LabelOutcome out;
    out.min_objective = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t ms_seed = trial_measurement_seed(seed, t);
        const MeasurementSet ms = random_measurement_set(m, ms_seed);
        const SteeringWitness w = solve_steering_sdp(assemblage(state, ms), settings);
        ++out.trials_run;
        if (w.status != SolveStatus::Optimal) {
            ++out.inconclusive;
            continue;
        }
        out.min_objective = std::min(out.min_objective, w.objective);
        if (certifies_steering(w, settings)) {
            out.label = -1;
            out.certifying_seed = ms_seed;
            return out;
        }
    }
    return out;
}

int label_state(const TwoQubitState& state, int m, int trials, const SdpSettings& settings, std::uint64_t seed) {
    return label_state_detailed(state, m, trials, settings, seed).label;
}

nlohmann::json witness_to_json(const SteeringWitness& witness, const MeasurementSet& measurements, std::uint64_t seed) {
    using nlohmann::json;
    json terms = json::array();
    for (int A = 0; A < witness.measurements; ++A)
        for (int a = 0; a < kOutcomes; ++a) {
            const Mat2& f = witness(a, A);
            json re = json::array(), im = json::array();
            for (int r = 0; r < 2; ++r) {
                re.push_back({f(r, 0).real(), f(r, 1).real()});
                im.push_back({f(r, 0).imag(), f(r, 1).imag()});
            }
            terms.push_back({{"a", a}, {"A", A}, {"re", re}, {"im", im}});
        }
    json bloch = json::array();
    for (const auto& meas : measurements.measurements()) bloch.push_back({meas.bloch()(0), meas.bloch()(1), meas.bloch()(2)});
    return json{{"F", terms},
                {"objective", witness.objective},
                {"status", std::string(to_string(witness.status))},
                {"iterations", witness.iterations},
                {"measurements", bloch},
                {"seed", seed}};
}

}  // namespace steersvm
