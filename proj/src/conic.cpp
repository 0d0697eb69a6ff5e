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

#include "steersvm/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steersvm/errors.hpp"

namespace steersvm {

namespace {

using Vec4 = Eigen::Vector4d;
using Mat44 = Eigen::Matrix4d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Pauli coordinates (z0, z1, z2, z3) with m = z0 I + z.sigma.
Vec4 to_coords(const Mat2& m) {
    Vec4 z;
    for (int j = 0; j < 4; ++j) z(j) = 0.5 * (m * pauli(j)).trace().real();
    return z;
}

Mat2 from_coords(const Eigen::Ref<const Vec4>& z) {
    return z(0) * pauli(0) + z(1) * pauli(1) + z(2) * pauli(2) + z(3) * pauli(3);
}

// J(u) = u0^2 - |u_bar|^2, evaluated as a product to keep precision near the boundary.
double lorentz_det(const Eigen::Ref<const Vec4>& u) {
    const double tail = u.tail<3>().norm();
    return (u(0) - tail) * (u(0) + tail);
}

bool interior(const Eigen::Ref<const Vec4>& u) { return u(0) > u.tail<3>().norm(); }

// Largest alpha with u + alpha du still in the cone (u interior).
double max_step(const Eigen::Ref<const Vec4>& u, const Eigen::Ref<const Vec4>& du) {
    const double a = lorentz_det(du);
    const double b = 2.0 * (u(0) * du(0) - u.tail<3>().dot(du.tail<3>()));
    const double c = lorentz_det(u);
    auto smallest_positive = [](double r1, double r2) {
        double best = kInfinity;
        if (r1 > 0.0) best = std::min(best, r1);
        if (r2 > 0.0) best = std::min(best, r2);
        return best;
    };
    if (std::abs(a) < 1e-300) {
        if (b < 0.0) return -c / b;
        return kInfinity;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return kInfinity;
    const double root = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? root : -root));
    if (q == 0.0) return kInfinity;
    return smallest_positive(q / a, c / q);
}

// Jordan product u o v = (u'v, u0 v_bar + v0 u_bar).
Vec4 jordan(const Vec4& u, const Vec4& v) {
    Vec4 out;
    out(0) = u.dot(v);
    out.tail<3>() = u(0) * v.tail<3>() + v(0) * u.tail<3>();
    return out;
}

// Solves lambda o x = v.
Vec4 jordan_solve(const Vec4& lambda, const Vec4& v) {
    const double det = lorentz_det(lambda);
    Vec4 x;
    x(0) = (lambda(0) * v(0) - lambda.tail<3>().dot(v.tail<3>())) / det;
    x.tail<3>() = (v.tail<3>() - x(0) * lambda.tail<3>()) / lambda(0);
    return x;
}

struct NtScaling {
    Mat44 w;
    Mat44 w_inv;
    Vec4 lambda;
};

NtScaling nt_scaling(const Vec4& s, const Vec4& z) {
    const double js = std::sqrt(lorentz_det(s));
    const double jz = std::sqrt(lorentz_det(z));
    const Vec4 sn = s / js;
    const Vec4 zn = z / jz;
    const double gamma = std::sqrt(0.5 * (1.0 + sn.dot(zn)));
    Vec4 wbar;
    wbar(0) = (sn(0) + zn(0)) / (2.0 * gamma);
    wbar.tail<3>() = (sn.tail<3>() - zn.tail<3>()) / (2.0 * gamma);
    const double eta = std::sqrt(js / jz);

    const Eigen::Vector3d v = wbar.tail<3>();
    const Eigen::Matrix3d inner = Eigen::Matrix3d::Identity() + v * v.transpose() / (1.0 + wbar(0));
    NtScaling out;
    out.w.setZero();
    out.w(0, 0) = wbar(0);
    out.w.block<1, 3>(0, 1) = v.transpose();
    out.w.block<3, 1>(1, 0) = v;
    out.w.block<3, 3>(1, 1) = inner;
    out.w_inv = out.w;
    out.w_inv.block<1, 3>(0, 1) *= -1.0;
    out.w_inv.block<3, 1>(1, 0) *= -1.0;
    out.w *= eta;
    out.w_inv /= eta;
    out.lambda = out.w * z;
    return out;
}

// Moves every cone block strictly inside the cone when the point is not already interior.
void shift_interior(VectorXd& u, Eigen::Index cones) {
    double worst = -kInfinity;
    for (Eigen::Index k = 0; k < cones; ++k) {
        const auto block = u.segment<4>(4 * k);
        worst = std::max(worst, block.tail<3>().norm() - block(0));
    }
    if (worst >= -1e-8) {
        for (Eigen::Index k = 0; k < cones; ++k) u(4 * k) += 1.0 + std::max(worst, 0.0);
    }
}

}  // namespace

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal:
            return "Optimal";
        case SolveStatus::Infeasible:
            return "Infeasible";
        case SolveStatus::MaxIterations:
            return "MaxIterations";
    }
    return "Unknown";
}

void ConicProblem::validate() const {
    const Eigen::Index n = variables();
    if (n < 1) throw DomainError("conic problem needs at least one variable");
    if (blocks.empty()) throw DomainError("conic problem needs at least one LMI block");
    for (const auto& block : blocks) {
        if (static_cast<Eigen::Index>(block.coefficients.size()) != n)
            throw DomainError("LMI block coefficient count does not match variable count");
        if ((block.offset - block.offset.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw DomainError("LMI offset is not Hermitian");
        for (const auto& b : block.coefficients)
            if ((b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("LMI coefficient is not Hermitian");
    }
    if (eq_matrix.rows() != eq_rhs.size()) throw DomainError("equality matrix and right-hand side disagree");
    if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) throw DomainError("equality matrix column count mismatch");
}

std::vector<Mat2> evaluate_blocks(const ConicProblem& problem, const Eigen::VectorXd& x) {
    std::vector<Mat2> out;
    out.reserve(problem.blocks.size());
    for (const auto& block : problem.blocks) {
        Mat2 z = block.offset;
        for (Eigen::Index i = 0; i < x.size(); ++i) z += x(i) * block.coefficients[static_cast<std::size_t>(i)];
        out.push_back(z);
    }
    return out;
}

ConicSolution ip_solve(const ConicProblem& problem, const IpSettings& settings) {
    problem.validate();
    const Eigen::Index n = problem.variables();
    const Eigen::Index p = problem.eq_matrix.rows();
    const auto cones = static_cast<Eigen::Index>(problem.blocks.size());
    const Eigen::Index dim = 4 * cones;

    // Gx + s = h with s = coordinates of Z_k(x).
    MatrixXd g(dim, n);
    VectorXd h(dim);
    for (Eigen::Index k = 0; k < cones; ++k) {
        const auto& block = problem.blocks[static_cast<std::size_t>(k)];
        h.segment<4>(4 * k) = to_coords(block.offset);
        for (Eigen::Index i = 0; i < n; ++i) g.block<4, 1>(4 * k, i) = -to_coords(block.coefficients[static_cast<std::size_t>(i)]);
    }
    const VectorXd& c = problem.objective;
    const MatrixXd& a = problem.eq_matrix;
    const VectorXd& b = problem.eq_rhs;

    ConicSolution result;
    auto finish = [&](SolveStatus status, const VectorXd& x, const VectorXd& y, const VectorXd& s, const VectorXd& z, int iters) {
        result.status = status;
        result.x = x;
        result.eq_dual = y;
        result.slack = evaluate_blocks(problem, x);
        result.dual.clear();
        for (Eigen::Index k = 0; k < cones; ++k) result.dual.push_back(0.5 * from_coords(z.segment<4>(4 * k)));
        result.primal_objective = c.dot(x);
        result.dual_objective = -h.dot(z) - (p > 0 ? b.dot(y) : 0.0);
        result.gap = s.dot(z);
        result.iterations = iters;
        return result;
    };

    const MatrixXd zero_pp = MatrixXd::Zero(p, p);
    auto assemble = [&](const MatrixXd& hess) {
        MatrixXd kkt(n + p, n + p);
        kkt.topLeftCorner(n, n) = hess;
        if (p > 0) {
            kkt.topRightCorner(n, p) = a.transpose();
            kkt.bottomLeftCorner(p, n) = a;
            kkt.bottomRightCorner(p, p) = zero_pp;
        }
        return kkt;
    };

    VectorXd x = VectorXd::Zero(n), y = VectorXd::Zero(p), s(dim), z(dim);
    {
        Eigen::FullPivLU<MatrixXd> lu(assemble(g.transpose() * g));
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) return finish(SolveStatus::MaxIterations, x, y, h, VectorXd::Ones(dim), 0);
        VectorXd rhs(n + p);
        rhs.head(n) = g.transpose() * h;
        rhs.tail(p) = b;
        VectorXd sol = lu.solve(rhs);
        x = sol.head(n);
        s = h - g * x;
        rhs.head(n) = -c;
        rhs.tail(p).setZero();
        sol = lu.solve(rhs);
        z = g * sol.head(n);
        shift_interior(s, cones);
        shift_interior(z, cones);
    }

    const double primal_scale = std::max(1.0, std::sqrt(b.squaredNorm() + h.squaredNorm()));
    const double dual_scale = std::max(1.0, c.norm());
    std::vector<NtScaling> scaling(static_cast<std::size_t>(cones));
    MatrixXd scaled_g(dim, n);

    for (int iter = 0; iter <= settings.max_iterations; ++iter) {
        const VectorXd rx = c + g.transpose() * z + (p > 0 ? VectorXd(a.transpose() * y) : VectorXd::Zero(n));
        const VectorXd ry = p > 0 ? VectorXd(a * x - b) : VectorXd();
        const VectorXd rz = g * x + s - h;
        const double gap = s.dot(z);
        const double mu = gap / static_cast<double>(cones);
        result.primal_residual = std::max(p > 0 ? ry.norm() : 0.0, rz.norm()) / primal_scale;
        result.dual_residual = rx.norm() / dual_scale;

        if (result.primal_residual <= settings.feasibility_tolerance && result.dual_residual <= settings.feasibility_tolerance &&
            gap <= settings.gap_tolerance)
            return finish(SolveStatus::Optimal, x, y, s, z, iter);
        if (iter == settings.max_iterations) break;
        if (!x.allFinite() || !z.allFinite() || !s.allFinite()) break;
        if (x.norm() > 1e12 || z.norm() > 1e12) return finish(SolveStatus::Infeasible, x, y, s, z, iter);

        for (Eigen::Index k = 0; k < cones; ++k) {
            auto& sc = scaling[static_cast<std::size_t>(k)];
            sc = nt_scaling(s.segment<4>(4 * k), z.segment<4>(4 * k));
            scaled_g.middleRows<4>(4 * k) = sc.w_inv * g.middleRows<4>(4 * k);
        }
        // Near the optimum W is badly conditioned; partial pivoting stays accurate
        // enough and non-finite solutions end the loop below.
        const Eigen::PartialPivLU<MatrixXd> lu(assemble(scaled_g.transpose() * scaled_g));

        auto apply_w2 = [&](const VectorXd& v, bool inverse) {
            VectorXd out(dim);
            for (Eigen::Index k = 0; k < cones; ++k) {
                const auto& sc = scaling[static_cast<std::size_t>(k)];
                const Mat44& m = inverse ? sc.w_inv : sc.w;
                out.segment<4>(4 * k) = m * (m * v.segment<4>(4 * k));
            }
            return out;
        };

        // Solves A'dy + G'dz = bx, A dx = by, G dx - W^2 dz = bz by eliminating dz,
        // followed by two rounds of iterative refinement on the full system.
        auto solve_kkt = [&](const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& dx, VectorXd& dy,
                             VectorXd& dz) {
            auto reduced = [&](const VectorXd& ex, const VectorXd& ey, const VectorXd& ez, VectorXd& ox, VectorXd& oy,
                               VectorXd& oz) {
                const VectorXd winv2_ez = apply_w2(ez, true);
                VectorXd rhs(n + p);
                rhs.head(n) = ex + g.transpose() * winv2_ez;
                if (p > 0) rhs.tail(p) = ey;
                const VectorXd sol = lu.solve(rhs);
                ox = sol.head(n);
                oy = sol.tail(p);
                oz = apply_w2(g * ox, true) - winv2_ez;
            };
            reduced(bx, by, bz, dx, dy, dz);
            for (int round = 0; round < 2; ++round) {
                VectorXd ex = bx - g.transpose() * dz;
                if (p > 0) ex -= a.transpose() * dy;
                const VectorXd ey = p > 0 ? VectorXd(by - a * dx) : VectorXd();
                const VectorXd ez = bz - (g * dx - apply_w2(dz, false));
                VectorXd cx, cy, cz;
                reduced(ex, ey, ez, cx, cy, cz);
                dx += cx;
                if (p > 0) dy += cy;
                dz += cz;
            }
        };

        // Given the complementarity target d_s, returns the full step.
        auto direction = [&](const VectorXd& ds_target, VectorXd& dx, VectorXd& dy, VectorXd& dz, VectorXd& ds) {
            VectorXd w_lsolve(dim);
            for (Eigen::Index k = 0; k < cones; ++k) {
                const auto& sc = scaling[static_cast<std::size_t>(k)];
                w_lsolve.segment<4>(4 * k) = sc.w * jordan_solve(sc.lambda, ds_target.segment<4>(4 * k));
            }
            solve_kkt(-rx, p > 0 ? VectorXd(-ry) : VectorXd(), -rz + w_lsolve, dx, dy, dz);
            // Taken from the linearized primal equation G dx + ds = -rz; recovering ds
            // through W^2 loses accuracy once W becomes ill-conditioned.
            ds = -rz - g * dx;
        };

        auto step_to_boundary = [&](const VectorXd& ds, const VectorXd& dz) {
            double alpha = kInfinity;
            for (Eigen::Index k = 0; k < cones; ++k) {
                alpha = std::min(alpha, max_step(s.segment<4>(4 * k), ds.segment<4>(4 * k)));
                alpha = std::min(alpha, max_step(z.segment<4>(4 * k), dz.segment<4>(4 * k)));
            }
            return alpha;
        };

        VectorXd lambda_sq(dim);
        for (Eigen::Index k = 0; k < cones; ++k) {
            const Vec4 l = scaling[static_cast<std::size_t>(k)].lambda;
            lambda_sq.segment<4>(4 * k) = jordan(l, l);
        }

        // Predictor.
        VectorXd dx, dy, dz, ds;
        direction(lambda_sq, dx, dy, dz, ds);
        const double alpha_aff = std::min(1.0, step_to_boundary(ds, dz));
        const double gap_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz);
        const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

        // Corrector.
        VectorXd target = lambda_sq;
        for (Eigen::Index k = 0; k < cones; ++k) {
            const auto& sc = scaling[static_cast<std::size_t>(k)];
            const Vec4 ws = sc.w_inv * ds.segment<4>(4 * k);
            const Vec4 wz = sc.w * dz.segment<4>(4 * k);
            target.segment<4>(4 * k) += jordan(ws, wz);
            target(4 * k) -= sigma * mu;
        }
        direction(target, dx, dy, dz, ds);
        if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;
        double alpha = std::min(1.0, 0.99 * step_to_boundary(ds, dz));
        if (!(alpha > 0.0)) break;

        // Rounding can leave a full step on the boundary; shorten until interior.
        auto all_interior = [&](const VectorXd& s_new, const VectorXd& z_new) {
            for (Eigen::Index k = 0; k < cones; ++k)
                if (!interior(s_new.segment<4>(4 * k)) || !interior(z_new.segment<4>(4 * k))) return false;
            return true;
        };
        VectorXd s_new = s + alpha * ds, z_new = z + alpha * dz;
        while (!all_interior(s_new, z_new) && alpha > 1e-12) {
            alpha *= 0.5;
            s_new = s + alpha * ds;
            z_new = z + alpha * dz;
        }
        if (!all_interior(s_new, z_new)) break;

        x += alpha * dx;
        if (p > 0) y += alpha * dy;
        s = s_new;
        z = z_new;
        result.iterations = iter + 1;
    }
    return finish(SolveStatus::MaxIterations, x, y, s, z, result.iterations);
}

}  // namespace steersvm
