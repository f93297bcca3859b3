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
#include <array>
#include <cstdint>
#include <span>

#include "zydeco/detect.hpp"

namespace zydeco::fp {

inline constexpr int kShapeFeatures = 16;
inline constexpr int kNeighborSlots = 8;
inline constexpr int kFeatureCount = kShapeFeatures + 2 * kNeighborSlots + 1;  // 33

/// Value a delay slot takes when no reliable neighbor alignment exists
/// (silent neighbor, correlation under the floor, no such channel).
inline constexpr float kDelaySentinel = 17.0f;

struct FingerprintConfig {
    int max_lag = 16;            ///< cross-correlation lag search bound
    /// Minimum peak normalized cross-correlation for a neighbor to count.
    /// The surrounding-noise field is built from the same waveform shapes
    /// as real spikes, so only a near-exact scaled copy is trustworthy;
    /// anything lower gets the sentinel.
    double corr_floor = 0.9;
    double fs_hz = 24000.0;
    double rate_window_s = 1.0;  ///< trailing window of the rate feature
    double rate_max_hz = 200.0;  ///< quantization range top for the rate
};

/// Dominant-channel waveform features: the peak-normalized 64-sample
/// window mean-pooled by 4, plus the rebound/trough magnitude ratio and
/// the half-peak width.
struct FineFingerprint {
    Eigen::Matrix<float, kShapeFeatures, 1> shape;
    float peak_trough_ratio = 0.0f;
    int width = 1;  ///< samples with |w| >= half peak around the pivot

    friend bool operator==(const FineFingerprint&, const FineFingerprint&) = default;
};

/// How the same spike appears across the adjacent channels, plus the
/// trailing firing rate. Slot s describes the s-th adjacent channel in the
/// caller's adjacency order; unused slots carry (sentinel, 0).
struct GlobalFingerprint {
    Eigen::Matrix<float, kNeighborSlots, 1> delays;  ///< samples, +17 = missing
    Eigen::Matrix<float, kNeighborSlots, 1> ratios;  ///< aligned peak ratio in [0,1]
    float rate_hz = 0.0f;

    friend bool operator==(const GlobalFingerprint&, const GlobalFingerprint&) = default;
};

using Code = std::array<std::uint8_t, kFeatureCount>;
using Features = Eigen::Matrix<float, kFeatureCount, 1>;

/// The fused two-path fingerprint and its fixed-width 33-byte code.
struct Fingerprint {
    FineFingerprint fine;
    GlobalFingerprint global;
    Code code{};

    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Per-feature quantization range [lo, hi); feature i maps affinely onto
/// bytes 0..255 (values clamped to the range). Pooled shape features live
/// in [-0.5, 0.5] — mean-pooling concentrates them there, and the tighter
/// range keeps waveform contrasts visible after quantization. Delays span
/// [-16, 17] (17 = missing), ratios [0, 1], the rate [0, rate_max].
struct QuantRange {
    float lo, hi;
};
QuantRange feature_range(int feature, const FingerprintConfig& cfg = {});

FineFingerprint fine_fingerprint(const detect::SpikeEvent& event);

/// Computes delays and ratios against the adjacent channels and the
/// trailing firing rate.
///
/// `samples` is the full de-quantized recording (T x C); `neighbors` lists
/// the adjacent channel indices in slot order (at most 8);
/// `history_pivots` are the event channel's detected pivots up to and
/// including this event, ascending. A neighbor whose coverage
/// [pivot-pre-max_lag, pivot+post+max_lag) leaves the recording, or whose
/// best normalized cross-correlation is under the floor, gets
/// (sentinel, 0).
GlobalFingerprint global_fingerprint(const detect::SpikeEvent& event,
                                     const Eigen::MatrixXf& samples,
                                     std::span<const int> neighbors,
                                     std::span<const std::int64_t> history_pivots,
                                     const FingerprintConfig& cfg = {});

/// Concatenates [shape; delays; ratios; rate] into the 33-feature vector.
Features to_features(const FineFingerprint& fine, const GlobalFingerprint& global);

/// Affine 8-bit quantization of every feature onto its fixed range
/// (round half to even). Throws contract_error on non-finite features.
Fingerprint quantize_fingerprint(const FineFingerprint& fine, const GlobalFingerprint& global,
                                 const FingerprintConfig& cfg = {});

Code quantize_features(const Features& f, const FingerprintConfig& cfg = {});
Features dequantize_features(const Code& code, const FingerprintConfig& cfg = {});

/// Normalized Euclidean distance between two codes: every feature is
/// scaled to [0,1] by its range, and the root-mean-square difference over
/// all 33 features is returned, so the distance itself lives in [0,1].
float code_distance(const Code& a, const Code& b);

}  // namespace zydeco::fp
