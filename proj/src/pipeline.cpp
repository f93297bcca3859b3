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

#include "zydeco/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "zydeco/errors.hpp"
#include "zydeco/rng.hpp"

namespace zydeco::pipeline {

std::vector<std::vector<int>> build_adjacency(const neuro::NeuronScene& scene, int limit) {
    const int tips = scene.tip_count();
    std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(tips));
    for (int c = 0; c < tips; ++c) {
        std::vector<std::pair<double, int>> others;
        others.reserve(static_cast<std::size_t>(tips) - 1);
        for (int o = 0; o < tips; ++o) {
            if (o == c) continue;
            others.emplace_back(
                (scene.tips[static_cast<std::size_t>(o)] - scene.tips[static_cast<std::size_t>(c)])
                    .norm(),
                o);
        }
        std::sort(others.begin(), others.end());
        const auto take = std::min<std::size_t>(others.size(), static_cast<std::size_t>(limit));
        auto& slots = adjacency[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < take; ++i) slots.push_back(others[i].second);
    }
    return adjacency;
}

std::vector<std::pair<std::uint8_t, fp::Fingerprint>> seed_fingerprints(
    const neuro::NeuronScene& scene, const synth::TemplateBank& bank,
    const synth::SynthParams& params, const PipelineConfig& cfg) {
    if (scene.tip_count() > 256)
        throw config_error("seed_fingerprints: at most 256 labeled neurons fit the entry layout");
    const auto adjacency = build_adjacency(scene, cfg.adjacency);

    std::vector<std::pair<std::uint8_t, fp::Fingerprint>> seeds;
    seeds.reserve(static_cast<std::size_t>(scene.tip_count()));
    for (int k = 0; k < scene.tip_count(); ++k) {
        const auto& dom = scene.dominant(k);
        const double own_dist =
            (dom.position_um - scene.tips[static_cast<std::size_t>(k)]).norm();
        const double own_gain = synth::attenuation(own_dist, params.d0_um);
        const int own_delay =
            synth::propagation_delay_samples(own_dist, params.delay_um_per_sample);

        // the clean dominant-channel window as the detector would see it
        detect::SpikeEvent ev;
        ev.channel = k;
        ev.pivot = bank.peak_index;
        for (int i = 0; i < 64; ++i) {
            const float v = bank.waveforms(i, dom.template_id) * static_cast<float>(own_gain);
            ev.window[i] = synth::dequantize_sample(synth::quantize_sample(v, params.full_scale),
                                                    params.full_scale);
        }
        const auto fine = fp::fine_fingerprint(ev);

        fp::GlobalFingerprint global;
        global.delays.setConstant(fp::kDelaySentinel);
        global.ratios.setZero();
        const auto& slots = adjacency[static_cast<std::size_t>(k)];
        for (std::size_t s = 0; s < slots.size() && s < fp::kNeighborSlots; ++s) {
            const auto tip = scene.tips[static_cast<std::size_t>(slots[s])];
            const double dist = (dom.position_um - tip).norm();
            const double gain = synth::attenuation(dist, params.d0_um);
            const int delay =
                synth::propagation_delay_samples(dist, params.delay_um_per_sample) - own_delay;
            if (gain < params.gain_cutoff || std::abs(delay) > cfg.fingerprint.max_lag)
                continue;  // the renderer or the lag search cannot reach it
            global.delays[static_cast<Eigen::Index>(s)] = static_cast<float>(delay);
            global.ratios[static_cast<Eigen::Index>(s)] =
                static_cast<float>(std::clamp(gain / own_gain, 0.0, 1.0));
        }
        global.rate_hz = static_cast<float>(dom.base_rate_hz);

        seeds.emplace_back(static_cast<std::uint8_t>(k),
                           fp::quantize_fingerprint(fine, global, cfg.fingerprint));
    }
    return seeds;
}

match::Fplt make_table(const neuro::NeuronScene& scene, const synth::TemplateBank& bank,
                       const synth::SynthParams& params, const PipelineConfig& cfg,
                       std::uint64_t detector_seed) {
    const auto seeds = seed_fingerprints(scene, bank, params, cfg);
    auto table = match::Fplt::seed_population(seeds, cfg.match);
    table.train_detectors(cfg.detector_count, detector_seed);
    return table;
}

LevelRun run_level(const synth::Recording& rec, const neuro::NeuronScene& scene,
                   const synth::TemplateBank& bank, const synth::SynthParams& params,
                   const PipelineConfig& cfg) {
    if (rec.channel_count() != scene.tip_count())
        throw config_error("run_level: recording channel count does not match the scene");

    const Eigen::MatrixXf samples = synth::dequantize(rec);
    const auto adjacency = build_adjacency(scene, cfg.adjacency);

    // per-channel detection; pivots double as the rate-feature history
    std::vector<std::vector<detect::SpikeEvent>> per_channel(
        static_cast<std::size_t>(rec.channel_count()));
    std::vector<std::vector<std::int64_t>> pivots(static_cast<std::size_t>(rec.channel_count()));
    for (int c = 0; c < rec.channel_count(); ++c) {
        per_channel[static_cast<std::size_t>(c)] = detect::detect(samples.col(c), cfg.detector, c);
        for (const auto& ev : per_channel[static_cast<std::size_t>(c)])
            pivots[static_cast<std::size_t>(c)].push_back(ev.pivot);
    }

    // chronological classification against one shared table
    std::vector<const detect::SpikeEvent*> order;
    for (const auto& evs : per_channel)
        for (const auto& ev : evs) order.push_back(&ev);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return std::tie(a->pivot, a->channel) < std::tie(b->pivot, b->channel);
    });

    LevelRun run;
    run.level_db = rec.noise_level_db;
    run.table = make_table(scene, bank, params, cfg,
                           substream(cfg.seed, 0xde7ec7,
                                     static_cast<std::uint64_t>(
                                         std::llround(rec.noise_level_db * 100.0) + (1LL << 32))));
    run.detected_events = order.size();

    for (const auto* ev : order) {
        const auto& history = pivots[static_cast<std::size_t>(ev->channel)];
        const auto upto = static_cast<std::size_t>(
            std::upper_bound(history.begin(), history.end(), ev->pivot) - history.begin());
        const auto fine = fp::fine_fingerprint(*ev);
        const auto global = fp::global_fingerprint(
            *ev, samples, adjacency[static_cast<std::size_t>(ev->channel)],
            std::span<const std::int64_t>(history.data(), upto), cfg.fingerprint);
        const auto fingerprint = fp::quantize_fingerprint(fine, global, cfg.fingerprint);
        const auto decision = run.table.classify(fingerprint);
        run.events.emplace_back(*ev, fingerprint);
        if (decision.kind == match::MatchDecision::Kind::Rejected) {
            ++run.rejected_events;
            continue;
        }
        run.decisions.push_back({ev->channel, ev->pivot, decision.label});
    }

    // alignment happens within each channel; counts add up across channels
    eval::Counts counts;
    for (int c = 0; c < rec.channel_count(); ++c) {
        std::vector<synth::TruthEvent> truth_c;
        for (const auto& t : rec.ground_truth)
            if (t.channel == c) truth_c.push_back(t);
        std::vector<eval::LabeledDetection> dec_c;
        for (const auto& d : run.decisions)
            if (d.channel == c) dec_c.push_back(d);
        counts += eval::align(truth_c, dec_c, cfg.align_tolerance);
    }
    run.metrics = eval::metrics(counts);
    return run;
}

eval::SweepResult sweep(const io::Manifest& manifest, const PipelineConfig& cfg,
                        const std::string& config_hash) {
    io::verify_manifest(manifest);

    auto entries = manifest.entries;
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.level_db < b.level_db; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i - 1].level_db == entries[i].level_db)
            throw config_error("sweep: duplicate noise level in the manifest");
    }

    const auto scene = synth::make_scene(manifest.spec);
    const auto bank = synth::make_default_bank(manifest.spec.params.fs_hz);

    eval::SweepResult result;
    result.config_hash = config_hash;
    result.seed = manifest.spec.seed;
    for (const auto& entry : entries) {
        auto rec = io::read_recording(manifest.dir / entry.recording,
                                      manifest.spec.params.full_scale);
        rec.ground_truth = io::read_truth_csv(manifest.dir / entry.truth);
        const auto run = run_level(rec, scene, bank, manifest.spec.params, cfg);
        result.levels.push_back({entry.level_db, run.metrics});
    }
    return result;
}

}  // namespace zydeco::pipeline
