# Copyright 2026 The steersvm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Steering labels by SDP and safe semi-supervised SVM classification."""

from ._core import (
    DomainError,
    SvmModel,
    bell_state,
    class_errors,
    feature_vector,
    generate_dataset,
    grid_search,
    improvement,
    label_state,
    maximally_mixed_state,
    random_density_matrix,
    s4vm,
    set_thread_count,
    thread_count,
    train_svm,
    werner_state,
    werner_unsteerable_analytic,
)

__all__ = [
    "DomainError",
    "SvmModel",
    "bell_state",
    "class_errors",
    "feature_vector",
    "generate_dataset",
    "grid_search",
    "improvement",
    "label_state",
    "maximally_mixed_state",
    "random_density_matrix",
    "s4vm",
    "set_thread_count",
    "thread_count",
    "train_svm",
    "werner_state",
    "werner_unsteerable_analytic",
]
