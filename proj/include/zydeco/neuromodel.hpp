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
#include <string>
#include <vector>

namespace zydeco::neuro {

/// Self-similar neighborhood layout: every tip hosts one dominant neuron
/// surrounded by `branching` ring-1 neurons on the 50 um sphere, each of
/// which sprouts `branching` ring-2 children on a sphere scaled by `scale`,
/// and so on down to `depth` rings.
struct FractalSpec {
    int branching = 6;
    int depth = 3;
    double scale = 0.5;
    std::uint64_t seed = 0;
};

/// Electrode-array geometry knobs. Tips sit on a square grid in the z=0
/// plane; neuron clouds grow into the surrounding volume.
struct SceneGeometry {
    double tip_pitch_um = 150.0;       ///< grid spacing between needle tips
    double sphere_radius_um = 50.0;    ///< ring-1 shell radius around a tip
    double surface_jitter_um = 10.0;   ///< inward jitter off the ring-1 shell
    double dominant_offset_um = 2.0;   ///< dominant soma distance from its tip
    double dominant_rate_hz = 20.0;    ///< dominant firing rate
    double noise_rate_hz = 48000.0;    ///< aggregate surrounding-neuron rate per scene
    int template_count = 3;            ///< waveform ids are assigned modulo this
};

struct NeuronNode {
    int id = 0;
    Eigen::Vector3d position_um = Eigen::Vector3d::Zero();
    int ring = 0;         ///< 0 = dominant neuron at its tip
    int tip = 0;          ///< index of the tip whose cloud this node belongs to
    int parent = -1;      ///< node id of the fractal parent, -1 for ring-0
    int template_id = 0;
    double base_rate_hz = 0.0;
};

/// Ground-truth topology: tips plus the per-tip fractal neuron clouds.
/// Immutable after build; safe to share across threads.
struct NeuronScene {
    FractalSpec spec;
    SceneGeometry geometry;
    std::vector<Eigen::Vector3d> tips;
    std::vector<NeuronNode> nodes;  ///< dominants first (id == tip index)

    int tip_count() const { return static_cast<int>(tips.size()); }
    int node_count() const { return static_cast<int>(nodes.size()); }
    const NeuronNode& dominant(int tip) const { return nodes[static_cast<std::size_t>(tip)]; }
};

/// Builds the scene: one dominant neuron per tip plus sum_{k=1..depth} M^k
/// surrounding neurons, placed self-similarly. Deterministic per
/// (spec, geometry, tip_count). Surrounding base rates are scaled uniformly
/// so they sum to geometry.noise_rate_hz across the whole scene.
NeuronScene build_scene(const FractalSpec& spec, int tip_count,
                        const SceneGeometry& geometry = {});

/// Canonical JSON form of a scene: keys sorted, every float printed "%.6e",
/// so identical (spec, seed) yields byte-identical text.
std::string scene_to_json(const NeuronScene& scene);

/// Per-neuron expected spike counts over `duration` seconds
/// (base_rate * duration), indexed by node id.
std::vector<double> activity_rates(const NeuronScene& scene, double duration_s);

// --- calcium-dependent synaptic weight dynamics -------------------------

/// State of one synapse: weight, calcium concentration (dimensionless,
/// normalized), and the pre/post activity values used by the Hebbian rule.
struct SynapseState {
    double w = 0.0;
    double calcium = 0.0;
    double x_pre = 0.0;
    double x_post = 0.0;
};

/// Parameters of the bidirectional weight rule
///     dW/dt = (Omega(c) - W) / tau(c)
/// with the saturating target Omega(c) = w_max * c / (c + c_half) and the
/// calcium-accelerated time constant tau(c) = tau0 / (1 + c). Both closures
/// are stand-ins for receptor kinetics and are meant to be replaced from
/// config when a better model is available.
struct PlasticityParams {
    double w_max = 1.0;
    double c_half = 0.5;
    double tau0_s = 1.0;

    double omega(double calcium) const { return w_max * calcium / (calcium + c_half); }
    double tau(double calcium) const { return tau0_s / (1.0 + calcium); }
};

/// Advances the weight by dt seconds at the state's (constant) calcium
/// level and clamps to [0, w_max]. The update is the exact solution of the
/// linear rule over the step, W' = Omega + (W - Omega) * exp(-dt/tau), so
/// repeated steps follow the closed form to rounding error. Calcium is
/// left unchanged.
///
/// Throws step_error unless 0 < dt <= tau(c)/10.
SynapseState step_weight(const SynapseState& s, double dt_s,
                         const PlasticityParams& params = {});

/// Hebbian weight increment, exactly x_pre * x_post.
inline double hebbian_delta(double x_pre, double x_post) { return x_pre * x_post; }

}  // namespace zydeco::neuro
