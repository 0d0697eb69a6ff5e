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


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include "steersvm/errors.hpp"
#include "steersvm/parallel.hpp"
#include "steersvm/pipeline.hpp"
#include "steersvm/qstate.hpp"
#include "steersvm/s4vm.hpp"
#include "steersvm/sdp_steer.hpp"
#include "steersvm/svm.hpp"

namespace py = pybind11;
using namespace steersvm;

namespace {

py::object optional_to_py(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict report_dict(const ErrorReport& r) {
    py::dict d;
    d["overall_error"] = r.overall_error;
    d["pos_error"] = optional_to_py(r.positive_error);
    d["neg_error"] = optional_to_py(r.negative_error);
    d["mistakes"] = r.mistakes;
    d["total"] = r.total;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steering labels by SDP and safe semi-supervised SVM classification.";

    // Subclasses (ConfigError, IoError, ...) are caught by the base translator.
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def("set_thread_count", &set_thread_count, py::arg("n"));
    m.def("thread_count", &thread_count);

    // States travel as complex 4x4 numpy arrays and are validated on the way in.
    m.def("bell_state", [] { return bell_state().rho(); });
    m.def("maximally_mixed_state", [] { return maximally_mixed_state().rho(); });
    m.def("random_density_matrix", [](std::uint64_t seed) { return random_density_matrix(seed).rho(); },
          py::arg("seed"));
    m.def(
        "werner_state", [](double p, double xi) { return werner_state(WernerParams{p, xi}).rho(); }, py::arg("p"),
        py::arg("xi"));
    m.def(
        "werner_unsteerable_analytic",
        [](double p, double xi) { return werner_unsteerable_analytic(WernerParams{p, xi}); }, py::arg("p"),
        py::arg("xi"));
    m.def(
        "feature_vector",
        [](const Mat4& rho) {
            const FeatureVector9 f = feature_vector(TwoQubitState::from_matrix(rho));
            return Eigen::VectorXd(f);
        },
        py::arg("rho"), "tau_kl = tr(rho_0 (s_k x s_l)), flattened row-major.");
    m.def(
        "label_state",
        [](const Mat4& rho, int m_settings, int trials, std::uint64_t seed) {
            const TwoQubitState st = TwoQubitState::from_matrix(rho);
            py::gil_scoped_release release;
            return label_state(st, m_settings, trials, SdpSettings{}, seed);
        },
        py::arg("rho"), py::arg("m") = 2, py::arg("trials") = 100, py::arg("seed") = 1,
        "-1 when some measurement draw certifies steering, +1 otherwise.");

    m.def(
        "generate_dataset",
        [](int n, int m_settings, int trials, std::uint64_t seed) {
            Dataset d;
            {
                py::gil_scoped_release release;
                d = generate_balanced_dataset(n, m_settings, trials, SdpSettings{}, seed);
            }
            return py::make_tuple(FeatureMatrix(d.features()), d.labels());
        },
        py::arg("n"), py::arg("m") = 2, py::arg("trials") = 100, py::arg("seed") = 1,
        "Class-balanced (features, labels) from Hilbert-Schmidt random states.");

    py::class_<SvmModel>(m, "SvmModel")
        .def_readonly("support_vectors", &SvmModel::support_vectors)
        .def_readonly("coefficients", &SvmModel::coefficients)
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("dual_objective", &SvmModel::dual_objective)
        .def_property_readonly("C", [](const SvmModel& s) { return s.params.cost; })
        .def_property_readonly("gamma", [](const SvmModel& s) { return s.params.gamma; })
        .def("decision_values", &SvmModel::decision_values, py::arg("x"))
        .def("predict", [](const SvmModel& s, const FeatureMatrix& x) { return predict(s, x); }, py::arg("x"));

    m.def(
        "train_svm",
        [](const FeatureMatrix& x, const LabelVector& y, double c, double gamma) {
            SvmParams p{c, gamma};
            p.validate();
            return train(Dataset(x, y), p);
        },
        py::arg("x"), py::arg("y"), py::arg("C") = 1.0, py::arg("gamma") = 1.0);
    m.def(
        "grid_search",
        [](const FeatureMatrix& x, const LabelVector& y, int folds, std::uint64_t seed) {
            const GridResult r = grid_search(Dataset(x, y), GridSpec::default_grid(folds), seed,
                                             SmoOptions{kCvTolerance});
            py::dict d;
            d["C"] = r.best.cost;
            d["gamma"] = r.best.gamma;
            d["accuracy"] = r.accuracy;
            d["folds_used"] = r.folds_used;
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("folds") = 10, py::arg("seed") = 1,
        "Best (C, gamma) by k-fold CV over 2^-10..2^10.");

    m.def(
        "s4vm",
        [](const FeatureMatrix& xl, const LabelVector& yl, const FeatureMatrix& xu, double c1, double gamma,
           double unlabeled_cost_ratio, double beta, double lambda, int separators, int samples,
           std::uint64_t seed) {
            S4vmParams p;
            p.cost_labeled = c1;
            p.cost_unlabeled = unlabeled_cost_ratio * c1;
            p.gamma = gamma;
            p.beta = beta;
            p.lambda = lambda;
            p.separators = separators;
            p.samples = samples;
            p.validate();
            const Dataset labeled(xl, yl);
            S4vmResult r;
            {
                py::gil_scoped_release release;
                r = s4vm_run(labeled, xu, p, seed);
            }
            py::dict d;
            d["labels"] = r.labels;
            d["ysvm"] = r.ysvm;
            d["fallback_used"] = r.fallback_used;
            d["sampling_failed"] = r.sampling_failed;
            d["min_j_output"] = r.min_j_output;
            d["min_j_ysvm"] = r.min_j_ysvm;
            d["separators"] = r.pool.members;
            return d;
        },
        py::arg("x_labeled"), py::arg("y_labeled"), py::arg("x_unlabeled"), py::arg("C1") = 1.0,
        py::arg("gamma") = 1.0, py::arg("unlabeled_cost_ratio") = 0.1, py::arg("beta") = 0.1, py::arg("lam") = 3.0,
        py::arg("separators") = 10, py::arg("samples") = 100, py::arg("seed") = 1);

    m.def(
        "improvement",
        [](const LabelVector& y, const LabelVector& yhat, const LabelVector& ysvm, double lambda) {
            return improvement(y, yhat, ysvm, lambda);
        },
        py::arg("y"), py::arg("yhat"), py::arg("ysvm"), py::arg("lam") = 3.0);
    m.def(
        "class_errors",
        [](const LabelVector& predicted, const LabelVector& truth) {
            return report_dict(class_errors(predicted, truth));
        },
        py::arg("predicted"), py::arg("truth"));
}
