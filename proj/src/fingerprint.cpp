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

#include "zydeco/fingerprint.hpp"

#include <algorithm>
#include <cmath>

namespace zydeco::fp {

QuantRange feature_range(int feature, const FingerprintConfig& cfg) {
    if (feature < kShapeFeatures) return {-0.5f, 0.5f};
    if (feature < kShapeFeatures + kNeighborSlots)
        return {-static_cast<float>(cfg.max_lag), kDelaySentinel};
    if (feature < kShapeFeatures + 2 * kNeighborSlots) return {0.0f, 1.0f};
    return {0.0f, static_cast<float>(cfg.rate_max_hz)};
}

FineFingerprint fine_fingerprint(const detect::SpikeEvent& event) {
    int pre = 0;  // pivot position inside the window = extremum position
    const float peak = event.window.cwiseAbs().maxCoeff(&pre);
    if (peak == 0.0f) throw contract_error("fine_fingerprint: degenerate all-zero window");

    const detect::Window w = event.window / peak;
    FineFingerprint fine;
    for (int i = 0; i < kShapeFeatures; ++i) fine.shape[i] = w.segment<4>(4 * i).mean();

    const float pivot_value = w[pre];
    const float opposite = pivot_value > 0.0f ? -w.minCoeff() : w.maxCoeff();
    fine.peak_trough_ratio = std::max(0.0f, opposite);

    int lo = pre, hi = pre;
    while (lo > 0 && std::abs(w[lo - 1]) >= 0.5f) --lo;
    while (hi < w.size() - 1 && std::abs(w[hi + 1]) >= 0.5f) ++hi;
    fine.width = hi - lo + 1;
    return fine;
}

GlobalFingerprint global_fingerprint(const detect::SpikeEvent& event,
                                     const Eigen::MatrixXf& samples,
                                     std::span<const int> neighbors,
                                     std::span<const std::int64_t> history_pivots,
                                     const FingerprintConfig& cfg) {
    GlobalFingerprint g;
    g.delays.setConstant(kDelaySentinel);
    g.ratios.setZero();

    int pre = 0;
    const float w_peak = event.window.cwiseAbs().maxCoeff(&pre);
    const float w_norm = event.window.norm();
    const std::int64_t begin = event.pivot - pre;

    const std::size_t slots = std::min<std::size_t>(neighbors.size(), kNeighborSlots);
    for (std::size_t s = 0; s < slots; ++s) {
        const int c = neighbors[s];
        if (c < 0 || c >= samples.cols()) continue;
        if (begin - cfg.max_lag < 0 || begin + 64 + cfg.max_lag > samples.rows()) continue;

        float best = -2.0f;
        int best_lag = 0;
        for (int lag = -cfg.max_lag; lag <= cfg.max_lag; ++lag) {
            const auto seg = samples.col(c).segment(begin + lag, 64);
            const float den = w_norm * seg.norm();
            if (den <= 0.0f) continue;
            const float ncc = event.window.dot(seg) / den;
            if (ncc > best) {
                best = ncc;
                best_lag = lag;
            }
        }
        if (best < static_cast<float>(cfg.corr_floor)) continue;

        g.delays[static_cast<Eigen::Index>(s)] = static_cast<float>(best_lag);
        const float aligned = std::abs(samples(begin + best_lag + pre, c));
        g.ratios[static_cast<Eigen::Index>(s)] =
            w_peak > 0.0f ? std::clamp(aligned / w_peak, 0.0f, 1.0f) : 0.0f;
    }

    // trailing-window pivot count (current event included), no smoothing
    const auto window = static_cast<std::int64_t>(cfg.rate_window_s * cfg.fs_hz);
    std::int64_t count = 0;
    for (auto p : history_pivots)
        if (p > event.pivot - window && p <= event.pivot) ++count;
    g.rate_hz = static_cast<float>(static_cast<double>(count) / cfg.rate_window_s);
    return g;
}

Features to_features(const FineFingerprint& fine, const GlobalFingerprint& global) {
    Features f;
    f.segment<kShapeFeatures>(0) = fine.shape;
    f.segment<kNeighborSlots>(kShapeFeatures) = global.delays;
    f.segment<kNeighborSlots>(kShapeFeatures + kNeighborSlots) = global.ratios;
    f[kFeatureCount - 1] = global.rate_hz;
    return f;
}

Code quantize_features(const Features& f, const FingerprintConfig& cfg) {
    Code code{};
    for (int i = 0; i < kFeatureCount; ++i) {
        if (!std::isfinite(f[i]))
            throw contract_error("quantize_fingerprint: non-finite feature " + std::to_string(i));
        const auto [lo, hi] = feature_range(i, cfg);
        const double unit = (static_cast<double>(f[i]) - lo) / (static_cast<double>(hi) - lo);
        const double q = std::nearbyint(std::clamp(unit, 0.0, 1.0) * 255.0);
        code[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(q);
    }
    return code;
}

Features dequantize_features(const Code& code, const FingerprintConfig& cfg) {
    Features f;
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto [lo, hi] = feature_range(i, cfg);
        f[i] = lo + static_cast<float>(code[static_cast<std::size_t>(i)]) * (hi - lo) / 255.0f;
    }
    return f;
}

Fingerprint quantize_fingerprint(const FineFingerprint& fine, const GlobalFingerprint& global,
                                 const FingerprintConfig& cfg) {
    Fingerprint out;
    out.fine = fine;
    out.global = global;
    out.code = quantize_features(to_features(fine, global), cfg);
    return out;
}

float code_distance(const Code& a, const Code& b) {
    // dequantized features scaled to [0,1] per field are exactly q/255
    std::int64_t acc = 0;
    for (int i = 0; i < kFeatureCount; ++i) {
        const int d = static_cast<int>(a[static_cast<std::size_t>(i)]) -
                      static_cast<int>(b[static_cast<std::size_t>(i)]);
        acc += static_cast<std::int64_t>(d) * d;
    }
    return std::sqrt(static_cast<float>(acc) / (255.0f * 255.0f * kFeatureCount));
}

}  // namespace zydeco::fp
