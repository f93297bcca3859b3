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

#include "zydeco/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zydeco/errors.hpp"

namespace zydeco::eval {

namespace {

template <typename T, typename Key>
void require_sorted(std::span<const T> items, Key key, const char* what) {
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (key(items[i - 1]) > key(items[i]))
            throw contract_error(std::string("align: ") + what + " not sorted by sample index");
    }
}

}  // namespace

Counts align(std::span<const synth::TruthEvent> truth,
             std::span<const LabeledDetection> decisions, std::int64_t tolerance) {
    if (tolerance < 0) throw contract_error("align: tolerance must be >= 0");
    require_sorted(truth, [](const synth::TruthEvent& t) { return t.sample_index; }, "truth");
    require_sorted(
        decisions, [](const LabeledDetection& d) { return d.sample_index; }, "decisions");

    std::vector<bool> used(truth.size(), false);
    Counts counts;
    counts.truth_total = static_cast<std::int64_t>(truth.size());

    // lowest truth index that can still match anything later
    std::size_t low = 0;
    for (const auto& det : decisions) {
        while (low < truth.size() &&
               (used[low] || truth[low].sample_index < det.sample_index - tolerance))
            ++low;

        std::size_t best = truth.size();
        std::int64_t best_gap = tolerance + 1;
        for (std::size_t i = low; i < truth.size(); ++i) {
            if (truth[i].sample_index > det.sample_index + tolerance) break;
            if (used[i]) continue;
            const std::int64_t gap = std::llabs(truth[i].sample_index - det.sample_index);
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }

        if (best == truth.size()) {
            ++counts.false_pos;
        } else {
            used[best] = true;
            if (truth[best].neuron_id == det.label) {
                ++counts.true_pos;
            } else {
                ++counts.false_pos;
                ++counts.false_neg;
            }
        }
    }
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!used[i]) ++counts.false_neg;
    return counts;
}

Metrics metrics(const Counts& counts) {
    if (counts.true_pos < 0 || counts.false_pos < 0 || counts.false_neg < 0 ||
        counts.truth_total < 0)
        throw contract_error("metrics: negative counts");
    Metrics m;
    m.counts = counts;
    m.tpr = counts.truth_total > 0
                ? static_cast<double>(counts.true_pos) / static_cast<double>(counts.truth_total)
                : 0.0;
    const std::int64_t detections = counts.true_pos + counts.false_pos;
    m.fpr = detections > 0
                ? static_cast<double>(counts.false_pos) / static_cast<double>(detections)
                : 0.0;
    m.accuracy = m.tpr;  // correct-label assignments over truth events
    return m;
}

std::vector<LevelDelta> compare(const SweepResult& a, const SweepResult& b) {
    if (a.levels.size() != b.levels.size())
        throw contract_error("compare: level grids differ in size");
    std::vector<LevelDelta> deltas;
    deltas.reserve(a.levels.size());
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
        if (a.levels[i].level_db != b.levels[i].level_db)
            throw contract_error("compare: level grids differ at row " + std::to_string(i));
        LevelDelta d;
        d.level_db = a.levels[i].level_db;
        const double tpr_a = a.levels[i].metrics.tpr;
        const double tpr_b = b.levels[i].metrics.tpr;
        const double fpr_a = a.levels[i].metrics.fpr;
        const double fpr_b = b.levels[i].metrics.fpr;
        if (tpr_a != 0.0) d.dtpr_pct = 100.0 * (tpr_b - tpr_a) / tpr_a;
        if (fpr_a != 0.0) d.dfpr_pct = 100.0 * (fpr_a - fpr_b) / fpr_a;
        deltas.push_back(d);
    }
    return deltas;
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
    std::string out = "# config_hash=" + result.config_hash + "\n";
    out += "level_db,tpr,fpr,accuracy,tp,fp,fn,truth_total\n";
    for (const auto& row : result.levels) {
        const auto& m = row.metrics;
        out += fmt(row.level_db) + ',' + fmt(m.tpr) + ',' + fmt(m.fpr) + ',' + fmt(m.accuracy) +
               ',' + std::to_string(m.counts.true_pos) + ',' +
               std::to_string(m.counts.false_pos) + ',' + std::to_string(m.counts.false_neg) +
               ',' + std::to_string(m.counts.truth_total) + '\n';
    }
    return out;
}

std::string compare_csv(std::span<const LevelDelta> deltas, const std::string& config_hash) {
    std::string out = "# config_hash=" + config_hash + "\n";
    out += "level_db,dtpr_pct,dfpr_pct\n";
    for (const auto& d : deltas) {
        out += fmt(d.level_db);
        out += ',';
        out += d.dtpr_pct ? fmt(*d.dtpr_pct) : std::string("undefined");
        out += ',';
        out += d.dfpr_pct ? fmt(*d.dfpr_pct) : std::string("undefined");
        out += '\n';
    }
    return out;
}

}  // namespace zydeco::eval
