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

#include "zydeco/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "zydeco/errors.hpp"
#include "zydeco/sha256.hpp"

namespace zydeco::config {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    if (first == std::string::npos) return {};
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw config_error("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw config_error("config: bad list for " + key + ": '" + v + "'");
    std::vector<double> out;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number(item, key));
    }
    return out;
}

std::string unquote(const std::string& v, const std::string& key) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    throw config_error("config: string value for " + key + " must be quoted");
}

std::string fmt_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Field registry: one row per key, with a setter and a printer. Keeps
/// parse, dump, and hash in lockstep.
struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::map<std::string, Field> make_fields() {
    std::map<std::string, Field> f;
    auto num = [&](const std::string& key, auto getter) {
        f[key] = {[key, getter](RunConfig& c, const std::string& v) {
                      *getter(c) = static_cast<std::remove_reference_t<decltype(*getter(
                          std::declval<RunConfig&>()))>>(parse_number(v, key));
                  },
                  [getter](const RunConfig& c) {
                      return fmt_number(static_cast<double>(
                          *getter(const_cast<RunConfig&>(c))));
                  }};
    };
    auto boolean = [&](const std::string& key, auto getter) {
        f[key] = {[key, getter](RunConfig& c, const std::string& v) {
                      *getter(c) = parse_bool(v, key);
                  },
                  [getter](const RunConfig& c) {
                      return *getter(const_cast<RunConfig&>(c)) ? std::string("true")
                                                                : std::string("false");
                  }};
    };
    auto str = [&](const std::string& key, auto getter) {
        f[key] = {[key, getter](RunConfig& c, const std::string& v) {
                      *getter(c) = unquote(v, key);
                  },
                  [getter](const RunConfig& c) {
                      return '"' + *getter(const_cast<RunConfig&>(c)) + '"';
                  }};
    };
    auto u64 = [&](const std::string& key, auto getter) {
        f[key] = {[key, getter](RunConfig& c, const std::string& v) {
                      std::uint64_t value = 0;
                      const auto [p, err] =
                          std::from_chars(v.data(), v.data() + v.size(), value);
                      if (err != std::errc{} || p != v.data() + v.size())
                          throw config_error("config: bad seed for " + key + ": '" + v + "'");
                      *getter(c) = value;
                  },
                  [getter](const RunConfig& c) {
                      return std::to_string(*getter(const_cast<RunConfig&>(c)));
                  }};
    };

    num("dataset.neurons", [](RunConfig& c) { return &c.dataset.neuron_count; });
    num("dataset.duration_s", [](RunConfig& c) { return &c.dataset.duration_s; });
    u64("dataset.seed", [](RunConfig& c) { return &c.dataset.seed; });
    f["dataset.levels_db"] = {
        [](RunConfig& c, const std::string& v) {
            c.dataset.noise_levels_db = parse_list(v, "dataset.levels_db");
        },
        [](const RunConfig& c) {
            std::string out = "[";
            for (std::size_t i = 0; i < c.dataset.noise_levels_db.size(); ++i) {
                if (i) out += ", ";
                out += fmt_number(c.dataset.noise_levels_db[i]);
            }
            return out + "]";
        }};

    num("fractal.branching", [](RunConfig& c) { return &c.dataset.scene.branching; });
    num("fractal.depth", [](RunConfig& c) { return &c.dataset.scene.depth; });
    num("fractal.scale", [](RunConfig& c) { return &c.dataset.scene.scale; });

    num("geometry.tip_pitch_um", [](RunConfig& c) { return &c.dataset.geometry.tip_pitch_um; });
    num("geometry.dominant_offset_um",
        [](RunConfig& c) { return &c.dataset.geometry.dominant_offset_um; });
    num("geometry.surface_jitter_um",
        [](RunConfig& c) { return &c.dataset.geometry.surface_jitter_um; });
    num("geometry.dominant_rate_hz",
        [](RunConfig& c) { return &c.dataset.geometry.dominant_rate_hz; });

    num("synth.fs_hz", [](RunConfig& c) { return &c.dataset.params.fs_hz; });
    num("synth.d0_um", [](RunConfig& c) { return &c.dataset.params.d0_um; });
    num("synth.delay_um_per_sample",
        [](RunConfig& c) { return &c.dataset.params.delay_um_per_sample; });
    num("synth.floor_sigma_base", [](RunConfig& c) { return &c.dataset.params.floor_sigma_base; });
    num("synth.dominant_refractory_s",
        [](RunConfig& c) { return &c.dataset.params.dominant_refractory_s; });
    num("synth.gain_cutoff", [](RunConfig& c) { return &c.dataset.params.gain_cutoff; });
    num("synth.full_scale", [](RunConfig& c) { return &c.dataset.params.full_scale; });
    boolean("synth.noise_enabled", [](RunConfig& c) { return &c.dataset.params.noise_enabled; });
    boolean("synth.floor_enabled", [](RunConfig& c) { return &c.dataset.params.floor_enabled; });
    boolean("synth.ac_couple", [](RunConfig& c) { return &c.dataset.params.ac_couple; });

    num("noise.spike_rate_hz", [](RunConfig& c) { return &c.dataset.params.noise.spike_rate_hz; });
    num("noise.amp_mean", [](RunConfig& c) { return &c.dataset.params.noise.amp_mean; });
    num("noise.amp_std", [](RunConfig& c) { return &c.dataset.params.noise.amp_std; });
    num("noise.sphere_radius_um",
        [](RunConfig& c) { return &c.dataset.params.noise.sphere_radius_um; });

    num("detect.k", [](RunConfig& c) { return &c.pipeline.detector.k; });
    num("detect.window_pre", [](RunConfig& c) { return &c.pipeline.detector.window_pre; });
    num("detect.window_post", [](RunConfig& c) { return &c.pipeline.detector.window_post; });
    num("detect.refractory", [](RunConfig& c) { return &c.pipeline.detector.refractory; });
    num("detect.mad_block", [](RunConfig& c) { return &c.pipeline.detector.mad_block; });
    num("detect.threshold_floor",
        [](RunConfig& c) { return &c.pipeline.detector.threshold_floor; });

    num("fingerprint.max_lag", [](RunConfig& c) { return &c.pipeline.fingerprint.max_lag; });
    num("fingerprint.corr_floor", [](RunConfig& c) { return &c.pipeline.fingerprint.corr_floor; });
    num("fingerprint.rate_window_s",
        [](RunConfig& c) { return &c.pipeline.fingerprint.rate_window_s; });
    num("fingerprint.rate_max_hz",
        [](RunConfig& c) { return &c.pipeline.fingerprint.rate_max_hz; });

    num("match.theta_match", [](RunConfig& c) { return &c.pipeline.match.theta_match; });
    num("match.theta_new", [](RunConfig& c) { return &c.pipeline.match.theta_new; });
    num("match.r_det", [](RunConfig& c) { return &c.pipeline.match.r_det; });
    num("match.budget_bits", [](RunConfig& c) { return &c.pipeline.match.budget_bits; });
    num("match.detector_reserve",
        [](RunConfig& c) { return &c.pipeline.match.detector_reserve; });
    num("match.detector_count", [](RunConfig& c) { return &c.pipeline.detector_count; });
    num("match.adjacency", [](RunConfig& c) { return &c.pipeline.adjacency; });

    num("eval.tolerance", [](RunConfig& c) { return &c.pipeline.align_tolerance; });
    u64("run.seed", [](RunConfig& c) { return &c.pipeline.seed; });

    str("paths.dataset_dir", [](RunConfig& c) { return &c.dataset_dir; });
    str("paths.out_dir", [](RunConfig& c) { return &c.out_dir; });
    str("paths.snapshot_file", [](RunConfig& c) { return &c.snapshot_file; });
    return f;
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = make_fields();
    return f;
}

}  // namespace

void RunConfig::validate() const {
    pipeline.detector.validate();
    pipeline.match.validate();
    if (dataset.neuron_count < 1) throw config_error("dataset.neurons must be >= 1");
    if (!(dataset.duration_s > 0.0)) throw config_error("dataset.duration_s must be > 0");
    if (dataset.noise_levels_db.empty())
        throw config_error("dataset.levels_db must be non-empty");
    if (pipeline.fingerprint.max_lag < 1 || pipeline.fingerprint.max_lag > 16)
        throw config_error("fingerprint.max_lag must be in [1, 16]");
    if (pipeline.align_tolerance < 0) throw config_error("eval.tolerance must be >= 0");
    if (pipeline.adjacency < 0 || pipeline.adjacency > fp::kNeighborSlots)
        throw config_error("match.adjacency must be in [0, 8]");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end())
            throw config_error("config: unknown key '" + key + "' on line " +
                               std::to_string(lineno));
        it->second.set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, field] : fields()) {
        out += key;
        out += " = ";
        out += field.get(cfg);
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(dump_config(cfg)); }

}  // namespace zydeco::config
