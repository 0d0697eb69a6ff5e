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

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steersvm/conic.hpp"
#include "steersvm/qstate.hpp"

namespace steersvm {

// All q^m deterministic response functions lambda: A -> a, one per row.
// Row index enumerates outcomes base q with measurement 0 most significant.
class StrategyTable {
public:
    int measurements() const noexcept { return m_; }
    int outcomes() const noexcept { return q_; }
    std::size_t rows() const noexcept { return table_.size() / static_cast<std::size_t>(m_); }
    int outcome(std::size_t lambda, int A) const { return table_[lambda * static_cast<std::size_t>(m_) + static_cast<std::size_t>(A)]; }
    // D(a|A, lambda)
    bool deterministic(int a, int A, std::size_t lambda) const { return outcome(lambda, A) == a; }

private:
    friend StrategyTable enumerate_strategies(int m, int q);
    int m_ = 0;
    int q_ = 0;
    std::vector<int> table_;
};

inline constexpr std::size_t kMaxStrategies = std::size_t{1} << 16;

// Throws SizeError when q^m exceeds kMaxStrategies, DomainError for m < 1 or q < 1.
StrategyTable enumerate_strategies(int m, int q);

struct SdpSettings {
    double tolerance = 1e-8;  // duality gap
    int max_iterations = 200;
    double steerable_threshold = -1e-6;

    void validate() const;
};

struct SteeringWitness {
    int measurements = 0;
    std::vector<Mat2> F;  // F_{a|A}, A-major like Assemblage
    double objective = 0.0;
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;

    const Mat2& operator()(int a, int A) const { return F[static_cast<std::size_t>(A * kOutcomes + a)]; }
    // sum_{a,A} F_{a|A} D(a|A, lambda)
    Mat2 strategy_operator(const StrategyTable& table, std::size_t lambda) const;
    // tr sum_{a,A} F_{a|A} sigma_{a|A}
    double pairing(const Assemblage& sigma) const;
};

// Minimizes tr sum F_{a|A} sigma_{a|A} subject to sum_{a,A} F_{a|A} D(a|A,lambda) >= 0
// for every lambda and tr sum_{a,A,lambda} F_{a|A} D(a|A,lambda) = 1. A negative
// objective certifies that the assemblage is steerable.
SteeringWitness solve_steering_sdp(const Assemblage& sigma, const SdpSettings& settings = {});

// The conic program used by solve_steering_sdp. For m >= 2 the gauge F_{1|A} = 0
// (A >= 1) removes the directions along which every strategy operator is constant.
ConicProblem steering_conic_problem(const Assemblage& sigma, const StrategyTable& table);

// True when the witness certifies steering under the settings' threshold.
bool certifies_steering(const SteeringWitness& witness, const SdpSettings& settings);

struct LabelOutcome {
    int label = +1;  // -1 steerable, +1 otherwise
    int trials_run = 0;
    int inconclusive = 0;  // MaxIterations or Infeasible solves
    double min_objective = 0.0;
    std::uint64_t certifying_seed = 0;  // measurement seed of the certifying trial
};

// Draws `trials` random measurement sets of size m and labels the state -1 as
// soon as one yields an objective below the threshold. Trial t uses the
// measurement seed derive_seed(seed, streams::kMeasurement, t).
LabelOutcome label_state_detailed(const TwoQubitState& state, int m, int trials, const SdpSettings& settings,
                                  std::uint64_t seed);
int label_state(const TwoQubitState& state, int m, int trials, const SdpSettings& settings, std::uint64_t seed);

std::uint64_t trial_measurement_seed(std::uint64_t seed, int trial);

nlohmann::json witness_to_json(const SteeringWitness& witness, const MeasurementSet& measurements, std::uint64_t seed);

}  // namespace steersvm
