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

#include <cstdint>
#include <string>
#include <vector>

#include "zydeco/detect.hpp"
#include "zydeco/eval.hpp"
#include "zydeco/fingerprint.hpp"
#include "zydeco/fplt.hpp"
#include "zydeco/recording_io.hpp"
#include "zydeco/synth.hpp"

namespace zydeco::pipeline {

struct PipelineConfig {
    detect::DetectorConfig detector;
    fp::FingerprintConfig fingerprint;
    match::MatchConfig match;
    int detector_count = 16;      ///< negative-selection detectors per table
    int adjacency = 8;            ///< nearest tips considered per channel
    std::int64_t align_tolerance = 12;
    std::uint64_t seed = 1;       ///< detector-training seed base
};

/// Per-channel adjacency: up to `limit` other tips, nearest first
/// (ties by index).
std::vector<std::vector<int>> build_adjacency(const neuro::NeuronScene& scene, int limit);

/// Ground-truth seed fingerprints, one per dominant neuron, labeled by tip
/// index: the fine part from the neuron's quantized clean waveform, the
/// global part from the scene geometry (propagation delays and attenuation
/// ratios relative to the dominant channel), the rate from its base rate.
std::vector<std::pair<std::uint8_t, fp::Fingerprint>> seed_fingerprints(
    const neuro::NeuronScene& scene, const synth::TemplateBank& bank,
    const synth::SynthParams& params, const PipelineConfig& cfg);

/// A freshly seeded table with trained detectors for one run.
match::Fplt make_table(const neuro::NeuronScene& scene, const synth::TemplateBank& bank,
                       const synth::SynthParams& params, const PipelineConfig& cfg,
                       std::uint64_t detector_seed);

struct LevelRun {
    double level_db = 0.0;
    eval::Metrics metrics;
    std::size_t detected_events = 0;
    std::size_t rejected_events = 0;
    std::vector<eval::LabeledDetection> decisions;
    /// every detected event with its fingerprint, classify order
    std::vector<std::pair<detect::SpikeEvent, fp::Fingerprint>> events;
    match::Fplt table{match::MatchConfig{}};
};

/// Runs detection, fingerprinting, and classification over one recording
/// and aligns the labeled decisions against its ground truth per channel.
LevelRun run_level(const synth::Recording& rec, const neuro::NeuronScene& scene,
                   const synth::TemplateBank& bank, const synth::SynthParams& params,
                   const PipelineConfig& cfg);

/// Verifies the manifest hashes, then runs every level in ascending order
/// with an independent freshly-seeded table per level.
eval::SweepResult sweep(const io::Manifest& manifest, const PipelineConfig& cfg,
                        const std::string& config_hash = "");

}  // namespace zydeco::pipeline
