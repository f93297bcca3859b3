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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zydeco/synth.hpp"

namespace zydeco::eval {

/// A detection the matcher labeled (known or newly inserted neurons;
/// rejected events never reach the evaluator).
struct LabeledDetection {
    int channel = 0;
    std::int64_t sample_index = 0;
    int label = 0;

    friend bool operator==(const LabeledDetection&, const LabeledDetection&) = default;
};

struct Counts {
    std::int64_t true_pos = 0;
    std::int64_t false_pos = 0;
    std::int64_t false_neg = 0;
    std::int64_t truth_total = 0;

    Counts& operator+=(const Counts& o) {
        true_pos += o.true_pos;
        false_pos += o.false_pos;
        false_neg += o.false_neg;
        truth_total += o.truth_total;
        return *this;
    }
    friend bool operator==(const Counts&, const Counts&) = default;
};

/// tpr = tp / truth_total; fpr = fp / (tp + fp) — the false fraction of
/// detections, which makes {0, 1} the optimum without needing a negatives
/// count; accuracy = correct-label assignments / truth events. Zero
/// denominators yield 0.
struct Metrics {
    double tpr = 0.0;
    double fpr = 0.0;
    double accuracy = 0.0;
    Counts counts;
};

/// Greedy chronological matching: walking detections in time order, each
/// one pairs with the nearest unmatched truth event within `tolerance`
/// samples. A matching-label pair is a true positive; a wrong-label pair
/// consumes the truth event and charges both a false positive and a false
/// negative; unpaired detections are false positives and unpaired truth
/// events false negatives.
///
/// Both lists must be sorted by sample index (contract_error otherwise).
Counts align(std::span<const synth::TruthEvent> truth,
             std::span<const LabeledDetection> decisions, std::int64_t tolerance = 12);

Metrics metrics(const Counts& counts);

struct SweepLevel {
    double level_db = 0.0;
    Metrics metrics;
};

struct SweepResult {
    std::vector<SweepLevel> levels;  ///< strictly increasing level grid
    std::string config_hash;
    std::uint64_t seed = 0;
};

/// Per-level percent deltas between two runs: positive dtpr_pct means b
/// detects more, positive dfpr_pct means b rejects more noise
/// (a reduction). A zero denominator leaves the delta undefined (unset).
struct LevelDelta {
    double level_db = 0.0;
    std::optional<double> dtpr_pct;
    std::optional<double> dfpr_pct;
};

/// Throws contract_error when the two level grids differ.
std::vector<LevelDelta> compare(const SweepResult& a, const SweepResult& b);

/// CSV forms. The first line carries the config hash as a '#' comment,
/// then "level_db,tpr,fpr,accuracy,tp,fp,fn,truth_total" rows (sweep) or
/// "level_db,dtpr_pct,dfpr_pct" rows with "undefined" cells (compare).
std::string sweep_csv(const SweepResult& result);
std::string compare_csv(std::span<const LevelDelta> deltas, const std::string& config_hash);

}  // namespace zydeco::eval
