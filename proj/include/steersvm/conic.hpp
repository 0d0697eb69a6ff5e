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

// Small dense primal-dual interior-point solver for linear matrix inequalities
// built from 2x2 Hermitian blocks:
//
//     minimize    c'x
//     subject to  Z_k(x) = offset_k + sum_i x_i B_{k,i}  >= 0   (PSD, each k)
//                 A x = b
//
// A 2x2 Hermitian matrix z0 I + z.sigma is PSD iff z0 >= |z|, so every block
// is handled as a four-dimensional Lorentz cone in Pauli coordinates. Search
// directions use Nesterov-Todd scaling with a Mehrotra predictor-corrector.

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "steersvm/qstate.hpp"

namespace steersvm {

enum class SolveStatus { Optimal, Infeasible, MaxIterations };

std::string_view to_string(SolveStatus status);

struct LmiBlock {
    Mat2 offset = Mat2::Zero();
    std::vector<Mat2> coefficients;  // one Hermitian matrix per variable
};

struct ConicProblem {
    Eigen::VectorXd objective;
    std::vector<LmiBlock> blocks;
    Eigen::MatrixXd eq_matrix;  // rows may be zero
    Eigen::VectorXd eq_rhs;

    Eigen::Index variables() const { return objective.size(); }
    // Throws DomainError on inconsistent sizes or non-Hermitian coefficients.
    void validate() const;
};

struct IpSettings {
    double gap_tolerance = 1e-8;       // absolute s'z threshold
    double feasibility_tolerance = 1e-9;
    int max_iterations = 200;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::MaxIterations;
    Eigen::VectorXd x;
    Eigen::VectorXd eq_dual;
    std::vector<Mat2> slack;  // Z_k(x) at the returned point
    std::vector<Mat2> dual;   // PSD multipliers W_k, paired through tr(Z_k W_k)
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
};

ConicSolution ip_solve(const ConicProblem& problem, const IpSettings& settings = {});

// Z_k(x) for every block.
std::vector<Mat2> evaluate_blocks(const ConicProblem& problem, const Eigen::VectorXd& x);

}  // namespace steersvm
