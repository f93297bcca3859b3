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

namespace zydeco::synth {

/// Unit-peak spike waveforms shared by every neuron in a scene.
///
/// All waveforms have the same length, their extremum sits exactly at
/// `peak_index`, and their support is confined to
/// [support_begin, support_end) so a spike never leaks outside the
/// detector's alignment window or across a refractory gap.
struct TemplateBank {
    Eigen::MatrixXf waveforms;  ///< length x count, one template per column
    int peak_index = 20;
    int support_begin = 16;
    int support_end = 44;

    int length() const { return static_cast<int>(waveforms.rows()); }
    int count() const { return static_cast<int>(waveforms.cols()); }
    Eigen::VectorXf waveform(int id) const { return waveforms.col(id); }
};

/// Three biphasic parametric templates: a fast negative trough (difference
/// of two exponentials) followed by a smaller positive rebound, tapered to
/// exact zero at the support edge. Peak magnitude is exactly 1.
TemplateBank make_default_bank(double fs_hz = 24000.0);

}  // namespace zydeco::synth
