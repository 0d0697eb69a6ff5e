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

// Test-only oracle for the steering program. Solves the local-hidden-state
// side directly,
//
//     maximize mu  s.t.  sigma_{a|A} = sum_lambda D(a|A,lambda) (X_lambda + mu I),  X_lambda >= 0,
//
// with a primal log-barrier Newton method on the affine solution set. Shares no
// code with the interior-point witness solver apart from the state types.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "steersvm/qstate.hpp"

namespace oracle {

struct LhsResult {
    double value = 0.0;
    bool converged = false;
};

inline LhsResult lhs_optimal_value(const steersvm::Assemblage& sigma, double final_t = 1e11) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int m = sigma.measurements();
    const int strategies = 1 << m;
    const int nvar = 4 * strategies + 1;  // Pauli coordinates of each X_lambda, then mu
    const int neq = 4 * 2 * m;

    auto outcome = [m](int lambda, int A) { return (lambda >> (m - 1 - A)) & 1; };

    // Equations in Pauli coordinates: X = x0 I + x.sigma, coordinate j of a matrix M is tr(M sigma_j)/2.
    MatrixXd e = MatrixXd::Zero(neq, nvar);
    VectorXd rhs(neq);
    for (int A = 0; A < m; ++A)
        for (int a = 0; a < 2; ++a) {
            const int row = 4 * (2 * A + a);
            for (int j = 0; j < 4; ++j) rhs(row + j) = 0.5 * (sigma(a, A) * steersvm::pauli(j)).trace().real();
            for (int lambda = 0; lambda < strategies; ++lambda) {
                if (outcome(lambda, A) != a) continue;
                for (int j = 0; j < 4; ++j) e(row + j, 4 * lambda + j) += 1.0;
                e(row, nvar - 1) += 1.0;
            }
        }

    Eigen::JacobiSVD<MatrixXd> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    const VectorXd particular = svd.solve(rhs);
    const MatrixXd null = svd.matrixV().rightCols(nvar - rank);

    // Shift along (X += delta I, mu -= delta), which lies in the null space.
    VectorXd start = particular;
    double worst = 0.0;
    for (int lambda = 0; lambda < strategies; ++lambda) {
        const auto x = start.segment<4>(4 * lambda);
        worst = std::max(worst, x.tail<3>().norm() - x(0));
    }
    const double delta = worst + 1.0;
    for (int lambda = 0; lambda < strategies; ++lambda) start(4 * lambda) += delta;
    start(nvar - 1) -= delta;
    VectorXd w = null.transpose() * (start - particular);

    auto point = [&](const VectorXd& ww) { return VectorXd(particular + null * ww); };
    auto feasible = [&](const VectorXd& v) {
        for (int lambda = 0; lambda < strategies; ++lambda) {
            const auto x = v.segment<4>(4 * lambda);
            if (!(x(0) > x.tail<3>().norm())) return false;
        }
        return true;
    };
    auto barrier_value = [&](const VectorXd& v, double t) {
        double f = -t * v(nvar - 1);
        for (int lambda = 0; lambda < strategies; ++lambda) {
            const auto x = v.segment<4>(4 * lambda);
            const double tail = x.tail<3>().norm();
            f -= std::log((x(0) - tail) * (x(0) + tail));
        }
        return f;
    };

    LhsResult result;
    if (!feasible(point(w))) return result;
    for (double t = 1.0; t <= final_t; t *= 8.0) {
        for (int newton = 0; newton < 200; ++newton) {
            const VectorXd v = point(w);
            VectorXd grad_v = VectorXd::Zero(nvar);
            MatrixXd hess_v = MatrixXd::Zero(nvar, nvar);
            grad_v(nvar - 1) = -t;
            for (int lambda = 0; lambda < strategies; ++lambda) {
                const Eigen::Vector4d x = v.segment<4>(4 * lambda);
                const double tail = x.tail<3>().norm();
                const double det = (x(0) - tail) * (x(0) + tail);
                Eigen::Vector4d dj(2.0 * x(0), -2.0 * x(1), -2.0 * x(2), -2.0 * x(3));
                Eigen::Matrix4d d2j = Eigen::Vector4d(2.0, -2.0, -2.0, -2.0).asDiagonal();
                grad_v.segment<4>(4 * lambda) -= dj / det;
                hess_v.block<4, 4>(4 * lambda, 4 * lambda) -= d2j / det - dj * dj.transpose() / (det * det);
            }
            const VectorXd grad = null.transpose() * grad_v;
            const MatrixXd hess = null.transpose() * hess_v * null;
            const VectorXd step = -hess.ldlt().solve(grad);
            const double decrement = -grad.dot(step);
            if (!std::isfinite(decrement)) return result;
            if (decrement < 1e-14) break;
            double alpha = 1.0;
            const double f0 = barrier_value(v, t);
            while (alpha > 1e-16) {
                const VectorXd trial = w + alpha * step;
                const VectorXd tv = point(trial);
                if (feasible(tv) && barrier_value(tv, t) <= f0 - 0.25 * alpha * decrement) {
                    w = trial;
                    break;
                }
                alpha *= 0.5;
            }
            if (alpha <= 1e-16) break;
        }
    }
    result.value = point(w)(nvar - 1);
    result.converged = true;
    return result;
}

}  // namespace oracle
