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

#include <filesystem>
#include <string>

#include "zydeco/pipeline.hpp"
#include "zydeco/synth.hpp"

namespace zydeco::config {

/// Every tunable of the whole pipeline, with defaults matching the
/// reference values the rest of the library uses. Loadable from a
/// TOML-style key/value file (see parse_config).
struct RunConfig {
    synth::DatasetSpec dataset;
    pipeline::PipelineConfig pipeline;
    std::string dataset_dir;
    std::string out_dir = ".";
    std::string snapshot_file;

    void validate() const;
};

/// Parses the `key = value` config grammar:
///   - one `key = value` pair per line, keys dotted (e.g. detect.k)
///   - values: integers, floats, booleans (true/false), quoted strings,
///     and [v1, v2, ...] lists of numbers
///   - '#' starts a comment; blank lines ignored
/// Unknown keys raise config_error naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical serialization (sorted keys, one per line); parsing it back
/// reproduces the same config.
std::string dump_config(const RunConfig& cfg);

/// SHA-256 of the canonical serialization; embedded in every output file.
std::string config_hash(const RunConfig& cfg);

}  // namespace zydeco::config
