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
#include <cstdint>
#include <vector>

#include "zydeco/errors.hpp"

namespace zydeco::detect {

/// The fixed 64-sample alignment window every spike is reported in.
using Window = Eigen::Matrix<float, 64, 1>;

struct DetectorConfig {
    double k = 4.0;           ///< threshold multiplier on the MAD sigma
    int window_pre = 20;      ///< samples kept before the pivot
    int window_post = 44;     ///< samples kept from the pivot on
    int refractory = 24;      ///< minimum pivot spacing, samples
    int mad_block = 4096;     ///< sigma re-estimation block
    /// Fallback threshold for blocks whose MAD estimate is exactly zero
    /// (synthetic silence); keeps the detector off the quantization floor.
    double threshold_floor = 0.1;

    int window() const { return window_pre + window_post; }
    void validate() const;
};

/// One detected and aligned spike.
struct SpikeEvent {
    int channel = 0;
    std::int64_t pivot = 0;     ///< sample index of the window extremum
    Window window;              ///< de-quantized samples [pivot-pre, pivot+post)
    float threshold_at_detect = 0.0f;
};

/// Robust noise scale, median(|x|) / 0.6745 over the block.
/// Throws contract_error for blocks shorter than 64 samples.
double noise_sigma(Eigen::Ref<const Eigen::VectorXf> block);

/// Adaptive-threshold detection over one channel.
///
/// The threshold k * sigma is re-estimated once per mad_block (each block
/// uses the previous block's estimate; the first block uses its own). A
/// crossing of |x| opens an event, the pivot is the largest |x| within the
/// next window_post samples, events closer than `refractory` to the
/// previous emitted pivot are suppressed, and windows that would cross the
/// stream bounds are dropped.
std::vector<SpikeEvent> detect(Eigen::Ref<const Eigen::VectorXf> samples,
                               const DetectorConfig& cfg, int channel = 0);

}  // namespace zydeco::detect
