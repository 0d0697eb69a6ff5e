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

#include <stdexcept>
#include <string>

namespace steersvm {

// Base class for argument/domain violations. The CLI maps these to exit code 1.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Enumeration or allocation would exceed a fixed guard.
class SizeError : public DomainError {
public:
    using DomainError::DomainError;
};

// Training data with a single class or too few rows.
class DegenerateDataError : public DomainError {
public:
    using DomainError::DomainError;
};

// Candidate labelings could not satisfy the balance constraint.
class SamplingError : public DomainError {
public:
    using DomainError::DomainError;
};

// Balanced dataset quotas not filled within the draw budget.
class GenerationError : public DomainError {
public:
    using DomainError::DomainError;
};

class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

class IoError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace steersvm
