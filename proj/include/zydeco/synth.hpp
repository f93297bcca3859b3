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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zydeco/neuromodel.hpp"
#include "zydeco/rng.hpp"
#include "zydeco/templates.hpp"

namespace zydeco::synth {

/// Surrounding-neuron noise statistics. The rate is the aggregate event
/// rate of all surrounding neurons in a scene (the per-second spike count
/// a whole array recording carries), split across the tips' clouds by the
/// scene's normalized base rates. Amplitudes are Normal(1.0, 0.2) with
/// non-positive draws resampled.
struct NoiseModel {
    double spike_rate_hz = 48000.0;
    double amp_mean = 1.0;
    double amp_std = 0.2;
    double sphere_radius_um = 50.0;
};

/// Rendering constants. The dB value of a dataset level is a noise level:
/// the white floor has sigma = floor_sigma_base * 10^(level_db/20) in
/// template-peak units, so larger dB means a harder dataset.
struct SynthParams {
    double fs_hz = 24000.0;
    double d0_um = 25.0;                 ///< attenuation half-gain distance
    double delay_um_per_sample = 12.5;   ///< propagation delay quantum
    double floor_sigma_base = 0.05;
    double dominant_refractory_s = 0.002;
    double gain_cutoff = 0.02;           ///< skip channel copies fainter than this
    double full_scale = 8.0;             ///< int16 full scale, template-peak units
    bool noise_enabled = true;
    bool floor_enabled = true;
    /// Model of the AC-coupled front end: each channel is zero-meaned
    /// before quantization, removing the DC the overlapping noise spikes
    /// would otherwise pile up.
    bool ac_couple = true;
    NoiseModel noise;
};

/// One ground-truth spike: which dominant neuron fired, on which channel
/// its waveform peaks, and the sample index of that peak.
struct TruthEvent {
    int neuron_id = 0;
    int channel = 0;
    std::int64_t sample_index = 0;

    friend bool operator==(const TruthEvent&, const TruthEvent&) = default;
};

/// A rendered multi-channel recording. Samples are stored one channel per
/// column so each channel is contiguous, matching the channel-major file
/// layout. Immutable after render.
struct Recording {
    Eigen::Matrix<std::int16_t, Eigen::Dynamic, Eigen::Dynamic> samples;  // T x C
    double fs_hz = 24000.0;
    double noise_level_db = 0.0;
    double full_scale = 8.0;
    std::vector<TruthEvent> ground_truth;  ///< sorted by sample_index

    std::int64_t sample_count() const { return samples.rows(); }
    int channel_count() const { return static_cast<int>(samples.cols()); }
};

/// Everything needed to regenerate a dataset bit for bit.
struct DatasetSpec {
    neuro::FractalSpec scene;
    neuro::SceneGeometry geometry;
    SynthParams params;
    int neuron_count = 16;  ///< dominant neurons = tips = channels
    double duration_s = 10.0;
    std::vector<double> noise_levels_db{0.0, 5.0, 7.0, 10.0};
    std::uint64_t seed = 0;
};

/// Distance attenuation 1 / (1 + (d/d0)^2); 1 at the tip, 0.5 at d0.
inline double attenuation(double distance_um, double d0_um = 25.0) {
    const double r = distance_um / d0_um;
    return 1.0 / (1.0 + r * r);
}

/// Propagation delay in whole samples, round(distance / quantum).
inline int propagation_delay_samples(double distance_um, double um_per_sample = 12.5) {
    return static_cast<int>(std::llround(distance_um / um_per_sample));
}

// --- int16 sample codec --------------------------------------------------

inline std::int16_t quantize_sample(float v, double full_scale) {
    const double scaled = std::nearbyint(v * (32768.0 / full_scale));
    return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline float dequantize_sample(std::int16_t q, double full_scale) {
    return static_cast<float>(q * (full_scale / 32768.0));
}

Eigen::MatrixXf dequantize(const Recording& rec);

/// Builds the scene a dataset spec describes (scene seed derived from the
/// dataset seed).
neuro::NeuronScene make_scene(const DatasetSpec& spec);

/// Float-field render plus ground truth, before quantization.
struct FieldRender {
    Eigen::MatrixXf field;  // T x C
    std::vector<TruthEvent> truth;
    std::size_t noise_events = 0;  ///< surrounding-neuron spikes placed
};

/// Renders one noise level of the spec: dominant unit-peak spikes at
/// refractory-gapped Poisson times, surrounding-neuron noise spikes with
/// Normal(1, 0.2) amplitudes, and the white floor — every copy attenuated
/// and delay-shifted by the scene geometry. Deterministic per
/// (spec, level_db, seed).
FieldRender render_field(const neuro::NeuronScene& scene, const TemplateBank& bank,
                         const DatasetSpec& spec, double level_db);

/// render_field followed by int16 quantization.
Recording render(const neuro::NeuronScene& scene, const TemplateBank& bank,
                 const DatasetSpec& spec, double level_db);

/// Draws one noise-spike amplitude (resampling non-positive values).
double draw_noise_amplitude(zydeco::Rng& rng, const NoiseModel& noise);

}  // namespace zydeco::synth
