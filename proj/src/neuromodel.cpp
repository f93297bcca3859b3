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

#include "zydeco/neuromodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zydeco/errors.hpp"
#include "zydeco/rng.hpp"

namespace zydeco::neuro {

namespace {

void validate(const FractalSpec& spec, int tip_count, const SceneGeometry& g) {
    if (spec.depth < 1) throw config_error("fractal.depth must be >= 1");
    if (spec.branching < 1) throw config_error("fractal.branching must be >= 1");
    if (!(spec.scale > 0.0 && spec.scale < 1.0))
        throw config_error("fractal.scale must be in (0, 1)");
    if (tip_count < 1) throw config_error("tip_count must be >= 1");
    if (g.sphere_radius_um <= 0.0) throw config_error("geometry.sphere_radius_um must be > 0");
    if (g.dominant_offset_um < 0.0 || g.dominant_offset_um > g.sphere_radius_um)
        throw config_error("geometry.dominant_offset_um must be in [0, sphere_radius_um]");
    if (g.surface_jitter_um < 0.0 || g.surface_jitter_um >= g.sphere_radius_um)
        throw config_error("geometry.surface_jitter_um must be in [0, sphere_radius_um)");
    if (g.noise_rate_hz < 0.0) throw config_error("geometry.noise_rate_hz must be >= 0");
    if (g.template_count < 1) throw config_error("geometry.template_count must be >= 1");
}

}  // namespace

NeuronScene build_scene(const FractalSpec& spec, int tip_count, const SceneGeometry& geometry) {
    validate(spec, tip_count, geometry);

    NeuronScene scene;
    scene.spec = spec;
    scene.geometry = geometry;

    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tip_count))));
    scene.tips.reserve(static_cast<std::size_t>(tip_count));
    for (int t = 0; t < tip_count; ++t) {
        scene.tips.emplace_back(geometry.tip_pitch_um * (t % side),
                                geometry.tip_pitch_um * (t / side), 0.0);
    }

    // Dominant neurons first so that node id == tip index for ring 0.
    for (int t = 0; t < tip_count; ++t) {
        Rng rng(substream(spec.seed, 0xd0, static_cast<std::uint64_t>(t)));
        double ux, uy, uz;
        rng.unit_vector(ux, uy, uz);
        NeuronNode dom;
        dom.id = t;
        dom.position_um = scene.tips[static_cast<std::size_t>(t)] +
                          geometry.dominant_offset_um * Eigen::Vector3d(ux, uy, uz);
        dom.ring = 0;
        dom.tip = t;
        dom.parent = -1;
        dom.template_id = t % geometry.template_count;
        dom.base_rate_hz = geometry.dominant_rate_hz;
        scene.nodes.push_back(dom);
    }

    // Surrounding rings, breadth first per tip. Children grow on the
    // hemisphere facing away from the tip so deeper rings sit farther out.
    int next_id = tip_count;
    for (int t = 0; t < tip_count; ++t) {
        Rng rng(substream(spec.seed, 0x5c, static_cast<std::uint64_t>(t)));
        const Eigen::Vector3d tip = scene.tips[static_cast<std::size_t>(t)];
        std::vector<int> frontier{t};
        double ring_radius = geometry.sphere_radius_um;
        for (int ring = 1; ring <= spec.depth; ++ring) {
            std::vector<int> next_frontier;
            next_frontier.reserve(frontier.size() * static_cast<std::size_t>(spec.branching));
            for (int parent_id : frontier) {
                const Eigen::Vector3d parent_pos =
                    scene.nodes[static_cast<std::size_t>(parent_id)].position_um;
                for (int b = 0; b < spec.branching; ++b) {
                    double ux, uy, uz;
                    rng.unit_vector(ux, uy, uz);
                    Eigen::Vector3d dir(ux, uy, uz);
                    Eigen::Vector3d pos;
                    if (ring == 1) {
                        // ring-1 shell around the tip itself, jittered inward
                        const double r = ring_radius - rng.uniform(0.0, geometry.surface_jitter_um);
                        pos = tip + r * dir;
                    } else {
                        // radially outward from the tip with angular wobble,
                        // so deeper rings sit strictly farther from the needle
                        const Eigen::Vector3d out = (parent_pos - tip).normalized();
                        dir = (out + 0.6 * dir).normalized();
                        if (dir.dot(out) < 0.0) dir = -dir;
                        pos = parent_pos + ring_radius * dir;
                    }
                    NeuronNode n;
                    n.id = next_id++;
                    n.position_um = pos;
                    n.ring = ring;
                    n.tip = t;
                    n.parent = parent_id;
                    n.template_id = static_cast<int>(rng.below(
                        static_cast<std::uint64_t>(geometry.template_count)));
                    // background activity concentrates in the numerous far
                    // neurons; inner rings carry a 4x smaller share per step
                    n.base_rate_hz = std::pow(4.0, ring - spec.depth);
                    scene.nodes.push_back(n);
                    next_frontier.push_back(n.id);
                }
            }
            frontier = std::move(next_frontier);
            ring_radius *= spec.scale;
        }
    }

    // Scale surrounding rates uniformly so the scene-wide aggregate matches
    // the configured noise rate.
    double total = 0.0;
    for (const auto& n : scene.nodes)
        if (n.ring > 0) total += n.base_rate_hz;
    if (total > 0.0) {
        const double k = geometry.noise_rate_hz / total;
        for (auto& n : scene.nodes)
            if (n.ring > 0) n.base_rate_hz *= k;
    }
    return scene;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6e", v);
    return buf;
}

void append_vec3(std::string& out, const Eigen::Vector3d& v) {
    out += '[';
    out += fmt_double(v.x());
    out += ',';
    out += fmt_double(v.y());
    out += ',';
    out += fmt_double(v.z());
    out += ']';
}

}  // namespace

std::string scene_to_json(const NeuronScene& scene) {
    // Hand-rolled writer: keys emitted in sorted order, floats always
    // "%.6e", no whitespace. This is the byte-comparable canonical form.
    std::string out = "{";
    out += "\"fractal\":{";
    out += "\"branching\":" + std::to_string(scene.spec.branching);
    out += ",\"depth\":" + std::to_string(scene.spec.depth);
    out += ",\"scale\":" + fmt_double(scene.spec.scale);
    out += ",\"seed\":" + std::to_string(scene.spec.seed);
    out += "},\"geometry\":{";
    out += "\"dominant_offset_um\":" + fmt_double(scene.geometry.dominant_offset_um);
    out += ",\"dominant_rate_hz\":" + fmt_double(scene.geometry.dominant_rate_hz);
    out += ",\"noise_rate_hz\":" + fmt_double(scene.geometry.noise_rate_hz);
    out += ",\"sphere_radius_um\":" + fmt_double(scene.geometry.sphere_radius_um);
    out += ",\"surface_jitter_um\":" + fmt_double(scene.geometry.surface_jitter_um);
    out += ",\"template_count\":" + std::to_string(scene.geometry.template_count);
    out += ",\"tip_pitch_um\":" + fmt_double(scene.geometry.tip_pitch_um);
    out += "},\"neurons\":[";
    for (std::size_t i = 0; i < scene.nodes.size(); ++i) {
        const auto& n = scene.nodes[i];
        if (i) out += ',';
        out += "{\"base_rate_hz\":" + fmt_double(n.base_rate_hz);
        out += ",\"id\":" + std::to_string(n.id);
        out += ",\"parent\":" + std::to_string(n.parent);
        out += ",\"position_um\":";
        append_vec3(out, n.position_um);
        out += ",\"ring\":" + std::to_string(n.ring);
        out += ",\"template_id\":" + std::to_string(n.template_id);
        out += ",\"tip\":" + std::to_string(n.tip);
        out += '}';
    }
    out += "],\"tips\":[";
    for (std::size_t i = 0; i < scene.tips.size(); ++i) {
        if (i) out += ',';
        append_vec3(out, scene.tips[i]);
    }
    out += "]}";
    return out;
}

std::vector<double> activity_rates(const NeuronScene& scene, double duration_s) {
    if (duration_s <= 0.0) throw config_error("duration must be > 0");
    std::vector<double> counts;
    counts.reserve(scene.nodes.size());
    for (const auto& n : scene.nodes) counts.push_back(n.base_rate_hz * duration_s);
    return counts;
}

SynapseState step_weight(const SynapseState& s, double dt_s, const PlasticityParams& params) {
    const double tau = params.tau(s.calcium);
    if (!(dt_s > 0.0) || dt_s > tau / 10.0) {
        throw step_error("step_weight: dt must satisfy 0 < dt <= tau(c)/10 = " +
                         std::to_string(tau / 10.0) + " s");
    }
    const double omega = params.omega(s.calcium);
    SynapseState next = s;
    next.w = omega + (s.w - omega) * std::exp(-dt_s / tau);
    next.w = std::clamp(next.w, 0.0, params.w_max);
    return next;
}

}  // namespace zydeco::neuro
