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

#include "steersvm/qstate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "steersvm/errors.hpp"

namespace steersvm {

namespace {

std::array<Mat2, 4> make_paulis() {
    const Complex i(0.0, 1.0);
    std::array<Mat2, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -i, i, 0;
    p[3] << 1, 0, 0, -1;
    return p;
}

Mat4 hermitize(const Mat4& m) { return 0.5 * (m + m.adjoint()); }

Mat2 random_qubit_density(Rng& rng) {
    std::normal_distribution<double> normal;
    Mat2 g;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) g(r, c) = Complex(normal(rng), normal(rng));
    Mat2 rho = g * g.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho / rho.trace().real();
}

}  // namespace

const Mat2& pauli(int index) {
    static const std::array<Mat2, 4> table = make_paulis();
    return table.at(static_cast<std::size_t>(index));
}

TwoQubitState TwoQubitState::from_matrix(const Mat4& rho) {
    if (!rho.allFinite()) throw DomainError("density matrix has non-finite entries");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol) throw DomainError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) throw DomainError("density matrix trace is not 1");
    Mat4 h = hermitize(rho);
    Eigen::SelfAdjointEigenSolver<Mat4> eig(h, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTol) throw DomainError("density matrix is not positive semidefinite");
    return TwoQubitState(h);
}

Eigen::Vector4d TwoQubitState::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Mat4> eig(rho_, Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

Mat4 PauliDecomposition::reconstruct() const {
    Mat4 out = kron(pauli(0), pauli(0));
    for (int i = 0; i < 3; ++i) {
        out += r(i) * kron(pauli(i + 1), pauli(0));
        out += s(i) * kron(pauli(0), pauli(i + 1));
        for (int j = 0; j < 3; ++j) out += t(i, j) * kron(pauli(i + 1), pauli(j + 1));
    }
    return 0.25 * out;
}

Measurement::Measurement(const Vec3& direction) {
    const double norm = direction.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("measurement direction must be a non-zero finite vector");
    bloch_ = direction / norm;
}

Mat2 Measurement::effect(int outcome) const {
    Mat2 ns = bloch_(0) * pauli(1) + bloch_(1) * pauli(2) + bloch_(2) * pauli(3);
    const double sign = outcome == 0 ? 1.0 : -1.0;
    return 0.5 * (pauli(0) + sign * ns);
}

MeasurementSet::MeasurementSet(std::vector<Measurement> measurements) : measurements_(std::move(measurements)) {
    if (measurements_.empty()) throw DomainError("a measurement set needs at least one measurement");
}

MeasurementSet MeasurementSet::extended(const MeasurementSet& more) const {
    std::vector<Measurement> all = measurements_;
    all.insert(all.end(), more.measurements_.begin(), more.measurements_.end());
    return MeasurementSet(std::move(all));
}

Assemblage::Assemblage(int measurements, std::vector<Mat2> sigma) : m_(measurements), sigma_(std::move(sigma)) {
    if (m_ < 1) throw DomainError("assemblage needs at least one measurement");
    if (sigma_.size() != static_cast<std::size_t>(m_ * kOutcomes))
        throw DomainError("assemblage size does not match measurements x outcomes");
}

Mat2 Assemblage::marginal(int A) const {
    Mat2 sum = Mat2::Zero();
    for (int a = 0; a < kOutcomes; ++a) sum += (*this)(a, A);
    return sum;
}

double Assemblage::signaling_residual() const {
    const Mat2 ref = marginal(0);
    double worst = 0.0;
    for (int A = 1; A < m_; ++A) worst = std::max(worst, (marginal(A) - ref).cwiseAbs().maxCoeff());
    return worst;
}

Assemblage Assemblage::scaled(double c) const {
    std::vector<Mat2> out = sigma_;
    for (auto& s : out) s *= c;
    return Assemblage(m_, std::move(out));
}

TwoQubitState random_density_matrix(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return random_density_matrix(rng);
}

TwoQubitState random_density_matrix(Rng& rng) {
    // Hilbert-Schmidt ensemble: G G^dagger / tr, G complex Ginibre.
    std::normal_distribution<double> normal;
    Mat4 g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = Complex(normal(rng), normal(rng));
    Mat4 rho = hermitize(g * g.adjoint());
    rho /= rho.trace().real();
    return TwoQubitState::from_matrix(hermitize(rho));
}

TwoQubitState random_product_state(Rng& rng) {
    const Mat2 a = random_qubit_density(rng);
    const Mat2 b = random_qubit_density(rng);
    return product_state(a, b);
}

TwoQubitState maximally_mixed_state() { return TwoQubitState::from_matrix(Mat4::Identity() / 4.0); }

TwoQubitState bell_state() {
    Eigen::Vector4cd psi(1.0, 0.0, 0.0, 1.0);
    psi /= std::sqrt(2.0);
    return TwoQubitState::from_matrix(psi * psi.adjoint());
}

TwoQubitState product_state(const Mat2& rho_a, const Mat2& rho_b) {
    Mat4 rho = hermitize(kron(rho_a, rho_b));
    rho /= rho.trace().real();
    return TwoQubitState::from_matrix(rho);
}

PauliDecomposition pauli_decompose(const TwoQubitState& state) {
    const Mat4& rho = state.rho();
    PauliDecomposition d;
    for (int i = 0; i < 3; ++i) {
        d.r(i) = (rho * kron(pauli(i + 1), pauli(0))).trace().real();
        d.s(i) = (rho * kron(pauli(0), pauli(i + 1))).trace().real();
        for (int j = 0; j < 3; ++j) d.t(i, j) = (rho * kron(pauli(i + 1), pauli(j + 1))).trace().real();
    }
    return d;
}

Mat2 partial_trace_alice(const TwoQubitState& state) {
    const Mat4& rho = state.rho();
    Mat2 out = rho.block<2, 2>(0, 0) + rho.block<2, 2>(2, 2);
    return 0.5 * (out + out.adjoint());
}

Mat2 partial_trace_bob(const TwoQubitState& state) {
    const Mat4& rho = state.rho();
    Mat2 out;
    for (int a = 0; a < 2; ++a)
        for (int a2 = 0; a2 < 2; ++a2) out(a, a2) = rho(2 * a, 2 * a2) + rho(2 * a + 1, 2 * a2 + 1);
    return 0.5 * (out + out.adjoint());
}

Mat2 psd_sqrt(const Mat2& m) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(m);
    Eigen::Vector2d roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().adjoint();
}

Mat4 steering_weighted_state(const TwoQubitState& state) {
    const Mat4 lift = kron(pauli(0), psd_sqrt(partial_trace_alice(state)));
    return lift * state.rho() * lift;
}

FeatureVector9 feature_vector(const TwoQubitState& state) {
    const Mat4 rho0 = steering_weighted_state(state);
    FeatureVector9 tau;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) tau(3 * k + l) = (rho0 * kron(pauli(k + 1), pauli(l + 1))).trace().real();
    return tau;
}

TwoQubitState werner_state(const WernerParams& params) {
    if (!(params.p >= 0.0 && params.p <= 1.0)) throw DomainError("Werner mixing weight p must lie in [0, 1]");
    const double c = std::cos(params.xi);
    const double s = std::sin(params.xi);
    Eigen::Vector4cd psi(c, 0.0, 0.0, s);
    const Mat4 pure = psi * psi.adjoint();
    Mat2 rho_a = Mat2::Zero();
    rho_a(0, 0) = c * c;
    rho_a(1, 1) = s * s;
    Mat4 rho = params.p * pure + (1.0 - params.p) * kron(rho_a, 0.5 * pauli(0));
    return TwoQubitState::from_matrix(hermitize(rho));
}

bool werner_unsteerable_analytic(const WernerParams& params) {
    const double p = params.p;
    if (p <= 0.0) return true;
    const double c2 = std::cos(2.0 * params.xi);
    return c2 * c2 >= (2.0 * p - 1.0) / ((2.0 - p) * p * p * p);
}

MeasurementSet random_measurement_set(int m, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return random_measurement_set(m, rng);
}

MeasurementSet random_measurement_set(int m, Rng& rng) {
    if (m < 1) throw DomainError("measurement count must be at least 1");
    std::normal_distribution<double> normal;
    std::vector<Measurement> out;
    out.reserve(static_cast<std::size_t>(m));
    while (static_cast<int>(out.size()) < m) {
        Vec3 v(normal(rng), normal(rng), normal(rng));
        if (v.norm() < 1e-12) continue;
        out.emplace_back(v);
    }
    return MeasurementSet(std::move(out));
}

Assemblage assemblage(const TwoQubitState& state, const MeasurementSet& measurements) {
    const int m = static_cast<int>(measurements.size());
    std::vector<Mat2> sigma;
    sigma.reserve(static_cast<std::size_t>(m * kOutcomes));
    const Mat4& rho = state.rho();
    for (int A = 0; A < m; ++A) {
        for (int a = 0; a < kOutcomes; ++a) {
            const Mat2 eff = measurements[static_cast<std::size_t>(A)].effect(a);
            // tr_A((E x I) rho)_{b b'} = sum_{x,y} E_{x y} rho_{(y b),(x b')}
            Mat2 out = Mat2::Zero();
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) out += eff(x, y) * rho.block<2, 2>(2 * y, 2 * x);
            sigma.push_back(0.5 * (out + out.adjoint()));
        }
    }
    return Assemblage(m, std::move(sigma));
}

}  // namespace steersvm
