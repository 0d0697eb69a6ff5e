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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles/svm_qp_oracle.hpp"
#include "steersvm/errors.hpp"
#include "steersvm/qstate.hpp"
#include "steersvm/sdp_steer.hpp"
#include "steersvm/svm.hpp"

using namespace steersvm;

namespace {

FeatureMatrix gaussian_rows(int n, int d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    FeatureMatrix x(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = scale * g(rng);
    }
    return x;
}

std::span<const double> row_span(const FeatureMatrix& x, Eigen::Index r) {
    return {x.row(r).data(), static_cast<std::size_t>(x.cols())};
}

// Two well-separated clusters along the first coordinate.
Dataset separable(int n, std::mt19937_64& rng) {
    FeatureMatrix x = gaussian_rows(n, 9, rng, 0.1);
    LabelVector y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1 : -1;
        x(i, 0) += 2.0 * y[static_cast<std::size_t>(i)];
    }
    return {x, y};
}

void check_kkt(const DualSolution& s, const Eigen::MatrixXd& k, const LabelVector& y, double cost) {
    double balance = 0.0;
    for (Eigen::Index i = 0; i < s.alpha.size(); ++i) {
        CHECK(s.alpha(i) >= 0.0);
        CHECK(s.alpha(i) <= cost);
        balance += s.alpha(i) * y[static_cast<std::size_t>(i)];
    }
    CHECK(std::abs(balance) <= 1e-8);
    Eigen::VectorXd ya(s.alpha.size());
    for (Eigen::Index i = 0; i < ya.size(); ++i) ya(i) = s.alpha(i) * y[static_cast<std::size_t>(i)];
    const Eigen::VectorXd f = (k * ya).array() + s.bias;
    for (Eigen::Index i = 0; i < ya.size(); ++i) {
        const double m = y[static_cast<std::size_t>(i)] * f(i);
        if (m < 1.0 - 1e-3) CHECK(s.alpha(i) == cost);
        if (s.alpha(i) > 0.0 && s.alpha(i) < cost) CHECK(std::abs(m - 1.0) <= 1e-3);
        if (s.alpha(i) == 0.0) CHECK(m >= 1.0 - 1e-3);
    }
}

}  // namespace

TEST_CASE("rbf kernel values and Gram matrix") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<double> z = x;
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);
    z[3] += 1.0;
    CHECK(rbf_kernel(x, z, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(rbf_kernel(x, z, 0.3) == rbf_kernel(z, x, 0.3));

    std::mt19937_64 rng(3);
    const FeatureMatrix pts = gaussian_rows(50, 9, rng);
    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(pts, pts), 0.2);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            CHECK(k(i, j) == doctest::Approx(rbf_kernel(row_span(pts, i), row_span(pts, j), 0.2)).epsilon(1e-14));
        }
    }
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("two-point model is symmetric about the midpoint") {
    FeatureMatrix x = FeatureMatrix::Zero(2, 9);
    x(0, 0) = 1.0;
    x(1, 0) = -1.0;
    x(1, 4) = 0.5;
    const SvmModel m = train(Dataset(x, {+1, -1}), {1e4, 0.5});
    CHECK(m.support_vectors.rows() == 2);
    const FeatureMatrix mid = (0.5 * (x.row(0) + x.row(1))).eval();
    CHECK(std::abs(m.decision_value(row_span(mid, 0))) <= 1e-10);
    CHECK(m.decision_value(row_span(x, 0)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(m.decision_value(row_span(x, 1)) == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("XOR pattern is fit exactly") {
    FeatureMatrix x = FeatureMatrix::Zero(4, 9);
    x(0, 0) = 0; x(0, 1) = 0;
    x(1, 0) = 1; x(1, 1) = 1;
    x(2, 0) = 0; x(2, 1) = 1;
    x(3, 0) = 1; x(3, 1) = 0;
    const LabelVector y{+1, +1, -1, -1};
    const Dataset data(x, y);
    const SvmModel m = train(data, {100.0, 1.0});
    CHECK(predict(m, x) == y);

    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(x, x), 1.0);
    const auto ref = oracle::svm_dual_qp(k, y, Eigen::VectorXd::Constant(4, 100.0));
    CHECK(std::abs(m.dual_objective - ref.objective) <= 1e-6);
}

TEST_CASE("SMO agrees with the reference QP and satisfies KKT") {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int r = 0; r < 100; ++r) {
        const int n = 4 + r % 17;
        const FeatureMatrix x = gaussian_rows(n, 9, rng, 0.5);
        LabelVector y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = (rng() & 1u) ? 1 : -1;
        y[0] = 1;
        y[1] = -1;
        const double cost = std::ldexp(1.0, static_cast<int>(rng() % 9) - 3);
        const double gamma = std::ldexp(1.0, static_cast<int>(rng() % 7) - 4);
        const Eigen::MatrixXd k = rbf_from_distances(squared_distances(x, x), gamma);
        const std::vector<double> upper(static_cast<std::size_t>(n), cost);
        const DualSolution s = solve_dual(k, y, upper);
        check_kkt(s, k, y, cost);
        const auto ref = oracle::svm_dual_qp(k, y, Eigen::VectorXd::Constant(n, cost));
        worst = std::max(worst, std::abs(s.dual_objective - ref.objective));
        // Weak duality with a small gap at this tolerance.
        const double primal = primal_objective(k, y, upper, s);
        CHECK(primal >= s.dual_objective - 1e-9);
        CHECK(primal - s.dual_objective <= 1e-3 * (1.0 + std::abs(primal)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("per-point cost bounds are respected") {
    std::mt19937_64 rng(5);
    const FeatureMatrix x = gaussian_rows(16, 9, rng, 0.5);
    LabelVector y(16);
    std::vector<double> upper(16);
    for (int i = 0; i < 16; ++i) {
        y[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : -1;
        upper[static_cast<std::size_t>(i)] = i < 8 ? 2.0 : 0.2;
    }
    const Eigen::MatrixXd k = rbf_from_distances(squared_distances(x, x), 0.5);
    const DualSolution s = solve_dual(k, y, upper);
    for (int i = 0; i < 16; ++i) CHECK(s.alpha(i) <= upper[static_cast<std::size_t>(i)]);
    Eigen::VectorXd c(16);
    for (int i = 0; i < 16; ++i) c(i) = upper[static_cast<std::size_t>(i)];
    CHECK(std::abs(s.dual_objective - oracle::svm_dual_qp(k, y, c).objective) <= 1e-6);
}

TEST_CASE("decision values match the kernel expansion and margin condition") {
    std::mt19937_64 rng(21);
    const FeatureMatrix x = gaussian_rows(30, 9, rng, 0.6);
    LabelVector y(30);
    for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) + 0.3 * x(i, 1) > 0 ? 1 : -1;
    const Dataset data(x, y);
    const SvmModel m = train(data, {1.0, 0.3});
    const FeatureMatrix probes = gaussian_rows(20, 9, rng);
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
        double brute = m.bias;
        for (Eigen::Index s = 0; s < m.support_vectors.rows(); ++s) {
            brute += m.coefficients(s) * rbf_kernel(row_span(m.support_vectors, s), row_span(probes, p), 0.3);
        }
        CHECK(std::abs(m.decision_value(row_span(probes, p)) - brute) <= 1e-12);
        CHECK(decision_value(m, row_span(probes, p)) == m.decision_value(row_span(probes, p)));
    }
    int free_checked = 0;
    for (Eigen::Index s = 0; s < m.support_vectors.rows(); ++s) {
        if (std::abs(m.coefficients(s)) < m.params.cost) {
            CHECK(std::abs(std::abs(m.decision_value(row_span(m.support_vectors, s))) - 1.0) <= 1e-3);
            ++free_checked;
        }
    }
    CHECK(free_checked > 0);
}

TEST_CASE("row order does not change the model") {
    std::mt19937_64 rng(8);
    const FeatureMatrix x = gaussian_rows(40, 9, rng, 0.5);
    LabelVector y(40);
    for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = x(i, 2) * x(i, 3) > 0 ? 1 : -1;
    const Dataset data(x, y);
    const FeatureMatrix probes = gaussian_rows(25, 9, rng, 0.5);
    const Eigen::VectorXd base = train(data, {4.0, 0.25}).decision_values(probes);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::size_t> perm(40);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Eigen::VectorXd shuffled = train(data.subset(perm), {4.0, 0.25}).decision_values(probes);
        CHECK((shuffled - base).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("predict") {
    std::mt19937_64 rng(2);
    const Dataset data = separable(30, rng);
    const SvmModel m = train(data, {1e3, 0.1});
    CHECK(predict(m, FeatureMatrix(0, 9)).empty());
    CHECK(predict(m, data.features()) == data.labels());

    const FeatureMatrix many = gaussian_rows(1000, 9, rng, 2.0);
    const LabelVector labels = predict(m, many);
    for (Eigen::Index r = 0; r < many.rows(); ++r) {
        CHECK(labels[static_cast<std::size_t>(r)] == sign_label(m.decision_value(row_span(many, r))));
    }
    CHECK(sign_label(0.0) == 1);
    CHECK(sign_label(-0.0) == 1);
}

TEST_CASE("invalid training inputs") {
    FeatureMatrix x = FeatureMatrix::Zero(3, 9);
    CHECK_THROWS_AS(train(Dataset(x, {1, 1, 1}), {1.0, 1.0}), DegenerateDataError);
    CHECK_THROWS_AS(train(Dataset(FeatureMatrix::Zero(1, 9), {1}), {1.0, 1.0}), DegenerateDataError);
    CHECK_THROWS_AS(train(Dataset(x, {1, -1, 1}), {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(train(Dataset(x, {1, -1, 1}), {1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(Dataset(x, {1, 0, 1}), DomainError);
    CHECK_THROWS_AS(Dataset(x, {1, -1}), DomainError);
}

TEST_CASE("stratified folds") {
    LabelVector y;
    for (int i = 0; i < 23; ++i) y.push_back(i < 13 ? 1 : -1);
    const auto folds = stratified_fold_assignment(y, 5, 99);
    CHECK(folds == stratified_fold_assignment(y, 5, 99));
    std::vector<int> pos(5, 0);
    std::vector<int> all(5, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        ++all[static_cast<std::size_t>(folds[i])];
        if (y[i] > 0) ++pos[static_cast<std::size_t>(folds[i])];
    }
    CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
    CHECK(*std::max_element(all.begin(), all.end()) - *std::min_element(all.begin(), all.end()) <= 1);
    CHECK_THROWS_AS(stratified_fold_assignment(y, 1, 0), DomainError);
    CHECK_THROWS_AS(stratified_fold_assignment(y, 24, 0), DomainError);
}

TEST_CASE("cross-validation") {
    std::mt19937_64 rng(17);
    const Dataset sep = separable(40, rng);
    CHECK(k_fold_cv(sep, {10.0, 0.1}, 10, 1) == 1.0);
    CHECK(k_fold_cv(sep, {10.0, 0.1}, 10, 7) == k_fold_cv(sep, {10.0, 0.1}, 10, 7));
    CHECK_THROWS_AS(k_fold_cv(sep, {1.0, 1.0}, 41, 1), DomainError);
    CHECK_THROWS_AS(k_fold_cv(sep, {1.0, 1.0}, 1, 1), DomainError);

    SUBCASE("random labels score near chance") {
        double mean = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            std::mt19937_64 r(1000 + s);
            const FeatureMatrix x = gaussian_rows(60, 9, r);
            LabelVector y(60);
            for (int i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = i < 30 ? 1 : -1;
            std::shuffle(y.begin(), y.end(), r);
            mean += k_fold_cv(Dataset(x, y), {1.0, 0.1}, 10, s) / 20.0;
        }
        CHECK(std::abs(mean - 0.5) <= 0.1);
    }

    SUBCASE("leave-one-out equals a direct loop") {
        std::mt19937_64 r(4);
        const FeatureMatrix x = gaussian_rows(10, 9, r, 0.7);
        LabelVector y(10);
        for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) > 0 ? 1 : -1;
        y[0] = 1;
        y[1] = -1;
        const Dataset data(x, y);
        const SvmParams params{2.0, 0.2};
        std::size_t correct = 0;
        for (std::size_t held = 0; held < 10; ++held) {
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < 10; ++i) {
                if (i != held) rest.push_back(i);
            }
            const Dataset train_set = data.subset(rest);
            int guess = 0;
            if (train_set.has_both_classes()) {
                guess = sign_label(train(train_set, params).decision_value(row_span(x, static_cast<Eigen::Index>(held))));
            } else {
                guess = train_set.labels().front();
            }
            correct += guess == y[held];
        }
        CHECK(k_fold_cv_detailed(data, params, 10, 123).correct == correct);
    }
}

TEST_CASE("grid search") {
    std::mt19937_64 rng(31);
    const Dataset sep = separable(20, rng);

    GridSpec one{{4.0}, {0.5}, 5};
    const GridResult r1 = grid_search(sep, one, 3);
    CHECK(r1.best.cost == 4.0);
    CHECK(r1.best.gamma == 0.5);
    CHECK(r1.table.size() == 1);

    // A huge gamma memorises and fails on held-out rows; a moderate one separates.
    GridSpec two{{10.0}, {1e4, 0.1}, 5};
    const GridResult r2 = grid_search(sep, two, 3);
    CHECK(r2.best.gamma == 0.1);
    CHECK(r2.accuracy == 1.0);

    // Ties resolve to the smallest C then the smallest gamma.
    GridSpec ties{{8.0, 2.0}, {0.2, 0.1}, 5};
    const GridResult r3 = grid_search(sep, ties, 3);
    CHECK(r3.best.cost == 2.0);
    CHECK(r3.best.gamma == 0.1);

    CHECK_THROWS_AS(grid_search(sep, GridSpec{{}, {1.0}, 5}, 1), DomainError);
    CHECK_THROWS_AS(grid_search(sep, GridSpec{{1.0}, {1.0}, 1}, 1), DomainError);

    SUBCASE("default grid on steering data beats every re-evaluated point") {
        Rng srng = make_rng(77);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<FeatureVector9> feats;
        LabelVector y;
        std::size_t pos = 0;
        std::size_t neg = 0;
        for (std::uint64_t s = 0; pos + neg < 60 && s < 5000; ++s) {
            const double w = u(srng);
            const TwoQubitState st = TwoQubitState::from_matrix(w * bell_state().rho() +
                                                                (1.0 - w) * random_density_matrix(s).rho());
            const int label = label_state(st, 2, 10, SdpSettings{}, s);
            if ((label > 0 ? pos : neg) >= 30) continue;
            ++(label > 0 ? pos : neg);
            feats.push_back(feature_vector(st));
            y.push_back(label);
        }
        REQUIRE(y.size() == 60);
        FeatureMatrix x(60, 9);
        for (int i = 0; i < 60; ++i) x.row(i) = feats[static_cast<std::size_t>(i)].transpose();
        const Dataset data(x, y);
        const GridSpec grid = GridSpec::default_grid(10);
        const GridResult best = grid_search(data, grid, 5);
        CHECK(best.table.size() == grid.costs.size() * grid.gammas.size());
        for (double c : grid.costs) {
            for (double g : grid.gammas) CHECK(best.accuracy >= k_fold_cv(data, {c, g}, 10, 5));
        }
        CHECK(best.accuracy == k_fold_cv(data, best.best, 10, 5));
    }
}

TEST_CASE("model JSON round trip") {
    std::mt19937_64 rng(9);
    const Dataset data = separable(12, rng);
    const SvmModel m = train(data, {3.0, 0.4});
    const SvmModel back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    const FeatureMatrix probes = gaussian_rows(10, 9, rng);
    CHECK((back.decision_values(probes) - m.decision_values(probes)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"params":{"C":1}})")), IoError);
}
