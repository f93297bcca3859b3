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
#include <vector>

#include "zydeco/detect.hpp"
#include "zydeco/fingerprint.hpp"
#include "zydeco/synth.hpp"

namespace zydeco::io {

/// Recording container format: little-endian, 32-byte header
///   magic "ZYDR" | u16 version | u16 channels | u32 fs | u64 samples |
///   i16 noise level in dB*100 | 10 reserved bytes
/// followed by channel-major int16 samples.
void write_recording(const std::filesystem::path& path, const synth::Recording& rec);
synth::Recording read_recording(const std::filesystem::path& path, double full_scale = 8.0);

/// Ground-truth sidecar: CSV with header neuron_id,channel,sample_index,
/// sorted by sample index.
void write_truth_csv(const std::filesystem::path& path,
                     const std::vector<synth::TruthEvent>& truth);
std::vector<synth::TruthEvent> read_truth_csv(const std::filesystem::path& path);

/// Debug export of detected events: channel,pivot,threshold.
std::string events_csv(const std::vector<detect::SpikeEvent>& events);

/// Offline inspection export: channel,pivot plus the 33 code bytes.
std::string fingerprints_csv(
    const std::vector<std::pair<detect::SpikeEvent, fp::Fingerprint>>& rows);

struct ManifestEntry {
    double level_db = 0.0;
    std::string recording;
    std::string truth;
    std::string recording_sha256;
    std::string truth_sha256;
};

struct Manifest {
    synth::DatasetSpec spec;
    std::string config_hash;
    std::string scene_file;
    std::string scene_sha256;
    std::vector<ManifestEntry> entries;
    std::filesystem::path dir;  ///< directory the manifest was loaded from
};

/// Renders every noise level of the spec into `dir`: one recording plus
/// one ground-truth sidecar per level, the canonical scene JSON, and
/// manifest.json listing files, seed, and content hashes. Partial output
/// is removed on failure. Regeneration from the same spec reproduces
/// identical hashes.
Manifest write_dataset(const synth::DatasetSpec& spec, const std::filesystem::path& dir,
                       const std::string& config_hash = "");

Manifest read_manifest(const std::filesystem::path& manifest_path);

/// Re-hashes every file the manifest lists; throws integrity_error on any
/// mismatch or missing file.
void verify_manifest(const Manifest& manifest);

std::string manifest_json(const Manifest& manifest);

}  // namespace zydeco::io
