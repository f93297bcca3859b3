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

#include "zydeco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zydeco/errors.hpp"

namespace zydeco::synth {

namespace {

constexpr std::uint64_t kTagScene = 0x5ce7e;
constexpr std::uint64_t kTagFloor = 0xf100a;
constexpr std::uint64_t kTagNoise = 0x7015e;
constexpr std::uint64_t kTagDominant = 0xd0317;

std::uint64_t level_tag(double level_db) {
    return static_cast<std::uint64_t>(std::llround(level_db * 100.0) + (1LL << 32));
}

void validate(const DatasetSpec& spec) {
    if (spec.neuron_count < 1) throw config_error("neuron_count must be >= 1");
    if (!(spec.duration_s > 0.0)) throw config_error("duration must be > 0");
    if (spec.noise_levels_db.empty()) throw config_error("noise_levels_db must be non-empty");
    if (spec.params.fs_hz <= 0.0) throw config_error("fs_hz must be > 0");
    if (spec.params.full_scale <= 0.0) throw config_error("full_scale must be > 0");
    if (spec.params.noise.amp_std < 0.0) throw config_error("noise.amp_std must be >= 0");
}

/// Per-neuron rendering plan: which channels receive a copy, with what
/// gain and delay.
struct ChannelCopy {
    int channel;
    float gain;
    int delay;
};

std::vector<std::vector<ChannelCopy>> build_copy_plan(const neuro::NeuronScene& scene,
                                                      const SynthParams& params) {
    std::vector<std::vector<ChannelCopy>> plan(scene.nodes.size());
    for (const auto& n : scene.nodes) {
        auto& copies = plan[static_cast<std::size_t>(n.id)];
        for (int c = 0; c < scene.tip_count(); ++c) {
            const double d = (n.position_um - scene.tips[static_cast<std::size_t>(c)]).norm();
            const double g = attenuation(d, params.d0_um);
            if (g < params.gain_cutoff && c != n.tip) continue;
            copies.push_back({c, static_cast<float>(g),
                              propagation_delay_samples(d, params.delay_um_per_sample)});
        }
    }
    return plan;
}

void add_spike(Eigen::MatrixXf& canvas, const Eigen::VectorXf& tmpl, std::int64_t onset,
               float amplitude, const std::vector<ChannelCopy>& copies) {
    const std::int64_t len = tmpl.size();
    for (const auto& copy : copies) {
        const std::int64_t start = onset + copy.delay;
        if (start < 0 || start + len > canvas.rows()) continue;
        canvas.col(copy.channel).segment(start, len) += (amplitude * copy.gain) * tmpl;
    }
}

}  // namespace

double draw_noise_amplitude(Rng& rng, const NoiseModel& noise) {
    double a = rng.normal(noise.amp_mean, noise.amp_std);
    while (a <= 0.0) a = rng.normal(noise.amp_mean, noise.amp_std);
    return a;
}

neuro::NeuronScene make_scene(const DatasetSpec& spec) {
    validate(spec);
    neuro::FractalSpec fractal = spec.scene;
    fractal.seed = substream(spec.seed, kTagScene, fractal.seed);
    neuro::SceneGeometry geometry = spec.geometry;
    geometry.noise_rate_hz = spec.params.noise.spike_rate_hz;
    geometry.sphere_radius_um = spec.params.noise.sphere_radius_um;
    return neuro::build_scene(fractal, spec.neuron_count, geometry);
}

Eigen::MatrixXf dequantize(const Recording& rec) {
    return rec.samples.cast<float>() * static_cast<float>(rec.full_scale / 32768.0);
}

FieldRender render_field(const neuro::NeuronScene& scene, const TemplateBank& bank,
                         const DatasetSpec& spec, double level_db) {
    validate(spec);
    if (scene.tip_count() != spec.neuron_count)
        throw config_error("scene tip count does not match spec.neuron_count");
    if (std::find(spec.noise_levels_db.begin(), spec.noise_levels_db.end(), level_db) ==
        spec.noise_levels_db.end())
        throw config_error("noise level " + std::to_string(level_db) +
                           " dB is not in the dataset's level grid");

    const SynthParams& p = spec.params;
    const std::int64_t total = std::llround(spec.duration_s * p.fs_hz);
    const int channels = scene.tip_count();
    if (total < bank.length()) throw config_error("duration too short for one spike window");
    if (total > std::numeric_limits<std::int32_t>::max())
        throw config_error("duration * fs overflows the sample index budget");

    FieldRender out;
    out.field = Eigen::MatrixXf::Zero(total, channels);
    const std::uint64_t ltag = level_tag(level_db);

    // 1. white floor
    if (p.floor_enabled) {
        const float sigma =
            static_cast<float>(p.floor_sigma_base * std::pow(10.0, level_db / 20.0));
        for (int c = 0; c < channels; ++c) {
            Rng rng(substream(spec.seed, kTagFloor, ltag, static_cast<std::uint64_t>(c)));
            auto col = out.field.col(c);
            for (std::int64_t i = 0; i < total; ++i)
                col[i] = sigma * static_cast<float>(rng.normal());
        }
    }

    const auto plan = build_copy_plan(scene, p);
    const std::int64_t last_onset = total - bank.length();

    // 2. surrounding-neuron noise spikes, one aggregated process per cloud
    if (p.noise_enabled) {
        for (int tip = 0; tip < channels; ++tip) {
            std::vector<const neuro::NeuronNode*> cloud;
            double cloud_rate = 0.0;
            for (const auto& n : scene.nodes) {
                if (n.tip == tip && n.ring > 0 && n.base_rate_hz > 0.0) {
                    cloud.push_back(&n);
                    cloud_rate += n.base_rate_hz;
                }
            }
            if (cloud.empty() || cloud_rate <= 0.0) continue;
            std::vector<double> cum;
            cum.reserve(cloud.size());
            double acc = 0.0;
            for (const auto* n : cloud) cum.push_back(acc += n->base_rate_hz);

            Rng rng(substream(spec.seed, kTagNoise, ltag, static_cast<std::uint64_t>(tip)));
            double t = rng.exponential(cloud_rate);
            while (t < spec.duration_s) {
                const double u = rng.uniform(0.0, acc);
                const auto it = std::upper_bound(cum.begin(), cum.end(), u);
                const auto* n = cloud[static_cast<std::size_t>(it - cum.begin())];
                const double amp = draw_noise_amplitude(rng, p.noise);
                const std::int64_t onset = std::llround(t * p.fs_hz);
                if (onset <= last_onset) {
                    add_spike(out.field, bank.waveforms.col(n->template_id), onset,
                              static_cast<float>(amp),
                              plan[static_cast<std::size_t>(n->id)]);
                    ++out.noise_events;
                }
                t += rng.exponential(cloud_rate);
            }
        }
    }

    // the AC-coupled front end takes the DC the overlapping background
    // spikes pile up back out; the signal spikes are added on top so a
    // noise-free render keeps its silence exactly zero
    if (p.ac_couple && (p.floor_enabled || p.noise_enabled))
        out.field.rowwise() -= out.field.colwise().mean();

    // 3. dominant spikes + ground truth
    for (int k = 0; k < channels; ++k) {
        const auto& dom = scene.dominant(k);
        if (dom.base_rate_hz <= 0.0) continue;
        Rng rng(substream(spec.seed, kTagDominant, ltag, static_cast<std::uint64_t>(k)));
        const auto& copies = plan[static_cast<std::size_t>(dom.id)];
        int own_delay = 0;
        for (const auto& c : copies)
            if (c.channel == k) own_delay = c.delay;
        double t = rng.exponential(dom.base_rate_hz);
        while (t < spec.duration_s) {
            const std::int64_t onset = std::llround(t * p.fs_hz);
            if (onset <= last_onset - own_delay) {
                add_spike(out.field, bank.waveforms.col(dom.template_id), onset, 1.0f, copies);
                out.truth.push_back({k, k, onset + own_delay + bank.peak_index});
            }
            t += p.dominant_refractory_s + rng.exponential(dom.base_rate_hz);
        }
    }

    std::sort(out.truth.begin(), out.truth.end(), [](const TruthEvent& a, const TruthEvent& b) {
        return std::tie(a.sample_index, a.channel, a.neuron_id) <
               std::tie(b.sample_index, b.channel, b.neuron_id);
    });
    return out;
}

Recording render(const neuro::NeuronScene& scene, const TemplateBank& bank,
                 const DatasetSpec& spec, double level_db) {
    FieldRender fr = render_field(scene, bank, spec, level_db);
    Recording rec;
    rec.fs_hz = spec.params.fs_hz;
    rec.noise_level_db = level_db;
    rec.full_scale = spec.params.full_scale;
    rec.ground_truth = std::move(fr.truth);
    rec.samples.resize(fr.field.rows(), fr.field.cols());
    const double scale = 32768.0 / spec.params.full_scale;
    for (Eigen::Index c = 0; c < fr.field.cols(); ++c) {
        const auto src = fr.field.col(c);
        auto dst = rec.samples.col(c);
        for (Eigen::Index i = 0; i < fr.field.rows(); ++i) {
            const double scaled = std::nearbyint(static_cast<double>(src[i]) * scale);
            dst[i] = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        }
    }
    return rec;
}

}  // namespace zydeco::synth
