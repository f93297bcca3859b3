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

#include "zydeco/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zydeco::detect {

void DetectorConfig::validate() const {
    if (k <= 0.0) throw config_error("detect.k must be > 0");
    if (window_pre < 1 || window_post < 1 || window_pre + window_post != 64)
        throw config_error("detect.window_pre + window_post must equal 64");
    if (refractory < 1) throw config_error("detect.refractory must be >= 1");
    if (mad_block < 64) throw config_error("detect.mad_block must be >= 64");
    if (threshold_floor < 0.0) throw config_error("detect.threshold_floor must be >= 0");
}

double noise_sigma(Eigen::Ref<const Eigen::VectorXf> block) {
    if (block.size() < 64)
        throw contract_error("noise_sigma: block must have at least 64 samples");
    std::vector<float> mags(static_cast<std::size_t>(block.size()));
    for (Eigen::Index i = 0; i < block.size(); ++i)
        mags[static_cast<std::size_t>(i)] = std::abs(block[i]);
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    return static_cast<double>(*mid) / 0.6745;
}

std::vector<SpikeEvent> detect(Eigen::Ref<const Eigen::VectorXf> samples,
                               const DetectorConfig& cfg, int channel) {
    cfg.validate();
    const std::int64_t n = samples.size();
    if (n < cfg.mad_block)
        throw contract_error("detect: stream shorter than one mad_block");

    // blockwise thresholds; block b uses block b-1's sigma (block 0 its own)
    const std::int64_t nblocks = (n + cfg.mad_block - 1) / cfg.mad_block;
    std::vector<float> thresh(static_cast<std::size_t>(nblocks));
    double prev_sigma = 0.0;
    for (std::int64_t b = 0; b < nblocks; ++b) {
        const std::int64_t begin = b * cfg.mad_block;
        const std::int64_t len = std::min<std::int64_t>(cfg.mad_block, n - begin);
        // a short trailing block keeps the previous estimate
        const double sigma =
            len >= 64 ? noise_sigma(samples.segment(begin, len)) : prev_sigma;
        const double basis = (b == 0) ? sigma : prev_sigma;
        thresh[static_cast<std::size_t>(b)] =
            basis > 0.0 ? static_cast<float>(cfg.k * basis)
                        : static_cast<float>(cfg.threshold_floor);
        prev_sigma = sigma;
    }

    std::vector<SpikeEvent> events;
    std::int64_t last_pivot = std::numeric_limits<std::int64_t>::min() / 2;
    std::int64_t i = 0;
    while (i < n) {
        const float t = thresh[static_cast<std::size_t>(i / cfg.mad_block)];
        if (std::abs(samples[i]) > t) {
            const std::int64_t search_end = std::min<std::int64_t>(i + cfg.window_post, n);
            std::int64_t pivot = i;
            float best = std::abs(samples[i]);
            for (std::int64_t j = i + 1; j < search_end; ++j) {
                const float a = std::abs(samples[j]);
                if (a > best) {
                    best = a;
                    pivot = j;
                }
            }
            if (pivot - last_pivot >= cfg.refractory) {
                const std::int64_t begin = pivot - cfg.window_pre;
                if (begin >= 0 && begin + 64 <= n) {
                    SpikeEvent ev;
                    ev.channel = channel;
                    ev.pivot = pivot;
                    ev.window = samples.segment(begin, 64);
                    ev.threshold_at_detect = t;
                    events.push_back(std::move(ev));
                    last_pivot = pivot;
                }
            }
            i = pivot + 1;
        } else {
            ++i;
        }
    }
    return events;
}

}  // namespace zydeco::detect
