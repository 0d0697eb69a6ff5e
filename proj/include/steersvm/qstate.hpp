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

// Two-qubit states, Pauli decomposition, steering features and measurement
// assemblages. Qubit ordering is Alice (A) first: basis index = 2*a + b.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "steersvm/rng.hpp"

namespace steersvm {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;
using FeatureVector9 = Eigen::Matrix<double, 9, 1>;

// Pauli matrix by index: 0 = identity, 1 = X, 2 = Y, 3 = Z.
const Mat2& pauli(int index);

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

// Tolerances of the TwoQubitState invariants.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

// 4x4 density matrix: Hermitian, unit trace, positive semidefinite.
class TwoQubitState {
public:
    // Validates the invariants; throws DomainError on violation.
    static TwoQubitState from_matrix(const Mat4& rho);

    const Mat4& rho() const noexcept { return rho_; }
    double purity() const { return (rho_ * rho_).trace().real(); }
    Eigen::Vector4d eigenvalues() const;

private:
    explicit TwoQubitState(const Mat4& rho) : rho_(rho) {}
    Mat4 rho_;
};

// rho = 1/4 (I + sum r_i s_i x I + sum s_i I x s_i + sum t_ij s_i x s_j)
struct PauliDecomposition {
    Vec3 r = Vec3::Zero();
    Vec3 s = Vec3::Zero();
    Eigen::Matrix3d t = Eigen::Matrix3d::Zero();

    Mat4 reconstruct() const;
};

// Two-outcome projective qubit measurement along a unit Bloch vector.
class Measurement {
public:
    // Normalizes the direction; throws DomainError for a zero vector.
    explicit Measurement(const Vec3& direction);

    const Vec3& bloch() const noexcept { return bloch_; }
    // Outcome 0 -> (I + n.sigma)/2, outcome 1 -> (I - n.sigma)/2.
    Mat2 effect(int outcome) const;

private:
    Vec3 bloch_;
};

class MeasurementSet {
public:
    // Throws DomainError when empty.
    explicit MeasurementSet(std::vector<Measurement> measurements);

    std::size_t size() const noexcept { return measurements_.size(); }
    const Measurement& operator[](std::size_t i) const { return measurements_[i]; }
    const std::vector<Measurement>& measurements() const noexcept { return measurements_; }

    // Returns a copy with extra measurements appended.
    MeasurementSet extended(const MeasurementSet& more) const;

private:
    std::vector<Measurement> measurements_;
};

inline constexpr int kOutcomes = 2;

// Bob's sub-normalized conditional states sigma_{a|A}, stored A-major.
class Assemblage {
public:
    Assemblage(int measurements, std::vector<Mat2> sigma);

    int measurements() const noexcept { return m_; }
    int outcomes() const noexcept { return kOutcomes; }
    const Mat2& operator()(int a, int A) const { return sigma_[static_cast<std::size_t>(A * kOutcomes + a)]; }
    Mat2 marginal(int A) const;

    // Largest deviation of sum_a sigma_{a|A} from the A = 0 marginal.
    double signaling_residual() const;

    Assemblage scaled(double c) const;

private:
    int m_;
    std::vector<Mat2> sigma_;
};

// Generalized Werner family: p |psi><psi| + (1 - p) rho_A x I/2 with
// |psi> = cos(xi)|00> + sin(xi)|11>.
struct WernerParams {
    double p = 0.0;
    double xi = 0.0;
};

TwoQubitState random_density_matrix(std::uint64_t seed);
TwoQubitState random_density_matrix(Rng& rng);

// rho_A x rho_B with each factor drawn from the single-qubit Hilbert-Schmidt ensemble.
TwoQubitState random_product_state(Rng& rng);

TwoQubitState maximally_mixed_state();
TwoQubitState bell_state();
TwoQubitState product_state(const Mat2& rho_a, const Mat2& rho_b);

PauliDecomposition pauli_decompose(const TwoQubitState& state);

// rho_B = tr_A rho.
Mat2 partial_trace_alice(const TwoQubitState& state);
// rho_A = tr_B rho.
Mat2 partial_trace_bob(const TwoQubitState& state);

// Square root of a 2x2 PSD Hermitian matrix with eigenvalues clamped at 0.
Mat2 psd_sqrt(const Mat2& m);

// rho_0 = (I x sqrt(rho_B)) rho (I x sqrt(rho_B)).
Mat4 steering_weighted_state(const TwoQubitState& state);

// [tau_11, tau_12, ..., tau_33] with tau_kl = tr(rho_0 (s_k x s_l)).
FeatureVector9 feature_vector(const TwoQubitState& state);

// Throws DomainError for p outside [0, 1].
TwoQubitState werner_state(const WernerParams& params);

// cos^2(2 xi) >= (2p - 1) / ((2 - p) p^3); p = 0 is a product state.
bool werner_unsteerable_analytic(const WernerParams& params);

// m Bloch directions uniform on the sphere. Throws DomainError for m = 0.
MeasurementSet random_measurement_set(int m, std::uint64_t seed);
MeasurementSet random_measurement_set(int m, Rng& rng);

// sigma_{a|A} = tr_A((M^a_A x I) rho).
Assemblage assemblage(const TwoQubitState& state, const MeasurementSet& measurements);

}  // namespace steersvm
