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

// File formats: dataset CSV, state JSON, and run manifests.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "steersvm/qstate.hpp"
#include "steersvm/svm.hpp"

namespace steersvm {

// Header "t11,t12,...,t33,label"; nine feature columns and a +-1 label.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);

// {"re": 4x4, "im": 4x4}, rows then columns, Alice as the first tensor factor.
nlohmann::json state_to_json(const TwoQubitState& state);
TwoQubitState state_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);

// SHA-1 of "blob <size>\0<content>", hex encoded.
std::string git_blob_sha1(std::string_view content);

// Manifest with the resolved configuration, seeds, and the content hash of the
// configuration plus every listed input file.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::vector<std::string>& input_files);

}  // namespace steersvm
