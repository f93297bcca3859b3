/*
 *  Copyright 2026 The zydeco-sort Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace zydeco {

/// Base class for every error this library throws on purpose.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or parameter value; the message names the field.
class config_error : public error {
public:
    using error::error;
};

/// ODE step size outside the stability range.
class step_error : public error {
public:
    using error::error;
};

/// A fingerprint table operation would exceed the memory budget.
class capacity_error : public error {
public:
    using error::error;
};

/// Filesystem failure; the message carries the path.
class io_error : public error {
public:
    using error::error;
};

/// Dataset or table contents fail a hash or structural invariant.
class integrity_error : public error {
public:
    using error::error;
};

/// Caller violated an operation contract (unsorted input, degenerate
/// window, non-finite feature, too-short block, grid mismatch, ...).
class contract_error : public error {
public:
    using error::error;
};

}  // namespace zydeco
