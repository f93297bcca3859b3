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

#include "zydeco/templates.hpp"

#include <cmath>

#include "zydeco/errors.hpp"

namespace zydeco::synth {

namespace {

constexpr int kLength = 64;
constexpr int kPeak = 20;
constexpr int kSupportBegin = 16;
constexpr int kSupportEnd = 44;

struct Shape {
    double polarity;                       // -1 trough-first, +1 peak-first
    double tau_rise_ms, tau_decay_ms;      // main phase
    double rebound, rebound_lag_ms;        // opposite-sign afterwave
    double tau_rise2_ms, tau_decay2_ms;
};

// Biexponential bump normalized to peak 1 at t = 0 (ms).
double bump(double t_ms, double tau_r, double tau_d) {
    const double t_star = std::log(tau_d / tau_r) * tau_r * tau_d / (tau_d - tau_r);
    const double u = t_ms + t_star;
    if (u <= 0.0) return 0.0;
    const double peak = std::exp(-t_star / tau_d) - std::exp(-t_star / tau_r);
    return (std::exp(-u / tau_d) - std::exp(-u / tau_r)) / peak;
}

Eigen::VectorXf render_shape(const Shape& s, double fs_hz) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(kLength);
    const double dt_ms = 1000.0 / fs_hz;
    for (int i = kSupportBegin; i < kSupportEnd; ++i) {
        const double t = (i - kPeak) * dt_ms;
        h[i] = s.polarity * (bump(t, s.tau_rise_ms, s.tau_decay_ms) -
                             s.rebound * bump(t - s.rebound_lag_ms, s.tau_rise2_ms,
                                              s.tau_decay2_ms));
    }
    // half-cosine taper over the last six support samples
    for (int i = kSupportEnd - 6; i < kSupportEnd; ++i) {
        const double w = 0.5 * (1.0 + std::cos(M_PI * (i - (kSupportEnd - 7)) / 7.0));
        h[i] *= w;
    }
    Eigen::VectorXf out = h.cast<float>();
    int peak_at = 0;
    out.cwiseAbs().maxCoeff(&peak_at);
    if (peak_at != kPeak) throw error("template shape: extremum off the pivot sample");
    out /= std::abs(out[kPeak]);  // exact unit peak in float
    return out;
}

}  // namespace

TemplateBank make_default_bank(double fs_hz) {
    if (fs_hz <= 0.0) throw config_error("fs_hz must be > 0");
    const Shape shapes[3] = {
        {-1.0, 0.022, 0.070, -0.32, 0.28, 0.10, 0.22},  // trough with same-sign tail
        {+1.0, 0.045, 0.090, +0.35, 0.35, 0.10, 0.20},  // positive-first, undershoot
        {-1.0, 0.012, 0.042, +0.38, 0.30, 0.10, 0.20},  // narrow trough, positive rebound
    };
    TemplateBank bank;
    bank.peak_index = kPeak;
    bank.support_begin = kSupportBegin;
    bank.support_end = kSupportEnd;
    bank.waveforms.resize(kLength, 3);
    for (int i = 0; i < 3; ++i) bank.waveforms.col(i) = render_shape(shapes[i], fs_hz);
    return bank;
}

}  // namespace zydeco::synth
