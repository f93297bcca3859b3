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

#include "zydeco/recording_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "zydeco/errors.hpp"
#include "zydeco/sha256.hpp"

namespace zydeco::io {

namespace {

using nlohmann::json;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_uint(const std::string& b, std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b[at + static_cast<std::size_t>(i)]))
             << (8 * i);
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("short write: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

}  // namespace

void write_recording(const std::filesystem::path& path, const synth::Recording& rec) {
    std::string bytes;
    bytes.reserve(32 + static_cast<std::size_t>(rec.samples.size()) * 2);
    bytes += "ZYDR";
    put_u16(bytes, 1);  // format version
    put_u16(bytes, static_cast<std::uint16_t>(rec.channel_count()));
    put_u32(bytes, static_cast<std::uint32_t>(std::llround(rec.fs_hz)));
    put_u64(bytes, static_cast<std::uint64_t>(rec.sample_count()));
    put_u16(bytes, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(std::llround(rec.noise_level_db * 100.0))));
    bytes.append(10, '\0');  // reserved padding to 32 bytes
    for (int c = 0; c < rec.channel_count(); ++c) {
        const auto col = rec.samples.col(c);
        for (Eigen::Index i = 0; i < col.size(); ++i)
            put_u16(bytes, static_cast<std::uint16_t>(col[i]));
    }
    write_file(path, bytes);
}

synth::Recording read_recording(const std::filesystem::path& path, double full_scale) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 32 || bytes.compare(0, 4, "ZYDR") != 0)
        throw integrity_error("recording: bad magic in " + path.string());
    if (get_uint(bytes, 4, 2) != 1)
        throw integrity_error("recording: unsupported version in " + path.string());
    const auto channels = static_cast<int>(get_uint(bytes, 6, 2));
    const auto fs = static_cast<double>(get_uint(bytes, 8, 4));
    const auto samples = static_cast<std::int64_t>(get_uint(bytes, 12, 8));
    const auto level_centi = static_cast<std::int16_t>(get_uint(bytes, 20, 2));
    const std::size_t expected = 32 + static_cast<std::size_t>(samples) *
                                          static_cast<std::size_t>(channels) * 2;
    if (bytes.size() != expected)
        throw integrity_error("recording: size mismatch in " + path.string());

    synth::Recording rec;
    rec.fs_hz = fs;
    rec.noise_level_db = level_centi / 100.0;
    rec.full_scale = full_scale;
    rec.samples.resize(samples, channels);
    std::size_t at = 32;
    for (int c = 0; c < channels; ++c) {
        auto col = rec.samples.col(c);
        for (std::int64_t i = 0; i < samples; ++i) {
            col[i] = static_cast<std::int16_t>(get_uint(bytes, at, 2));
            at += 2;
        }
    }
    return rec;
}

void write_truth_csv(const std::filesystem::path& path,
                     const std::vector<synth::TruthEvent>& truth) {
    std::string out = "neuron_id,channel,sample_index\n";
    for (const auto& t : truth) {
        out += std::to_string(t.neuron_id) + ',' + std::to_string(t.channel) + ',' +
               std::to_string(t.sample_index) + '\n';
    }
    write_file(path, out);
}

std::vector<synth::TruthEvent> read_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "neuron_id,channel,sample_index")
        throw integrity_error("truth csv: bad header in " + path.string());
    std::vector<synth::TruthEvent> truth;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        synth::TruthEvent t;
        long long idx = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lld", &t.neuron_id, &t.channel, &idx) != 3)
            throw integrity_error("truth csv: bad row in " + path.string());
        t.sample_index = idx;
        if (!truth.empty() && truth.back().sample_index > t.sample_index)
            throw integrity_error("truth csv: rows not sorted in " + path.string());
        truth.push_back(t);
    }
    return truth;
}

std::string events_csv(const std::vector<detect::SpikeEvent>& events) {
    std::string out = "channel,pivot,threshold\n";
    char buf[64];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.6f\n", e.channel,
                      static_cast<long long>(e.pivot), static_cast<double>(e.threshold_at_detect));
        out += buf;
    }
    return out;
}

std::string fingerprints_csv(
    const std::vector<std::pair<detect::SpikeEvent, fp::Fingerprint>>& rows) {
    std::string out = "channel,pivot";
    for (int i = 0; i < fp::kFeatureCount; ++i) out += ",b" + std::to_string(i);
    out += '\n';
    for (const auto& [ev, fingerprint] : rows) {
        out += std::to_string(ev.channel) + ',' + std::to_string(ev.pivot);
        for (const auto byte : fingerprint.code) out += ',' + std::to_string(byte);
        out += '\n';
    }
    return out;
}

// --- dataset manifest ----------------------------------------------------

namespace {

json spec_to_json(const synth::DatasetSpec& spec) {
    json j;
    j["fractal"] = {{"branching", spec.scene.branching},
                    {"depth", spec.scene.depth},
                    {"scale", spec.scene.scale},
                    {"seed", spec.scene.seed}};
    j["geometry"] = {{"tip_pitch_um", spec.geometry.tip_pitch_um},
                     {"sphere_radius_um", spec.geometry.sphere_radius_um},
                     {"surface_jitter_um", spec.geometry.surface_jitter_um},
                     {"dominant_offset_um", spec.geometry.dominant_offset_um},
                     {"dominant_rate_hz", spec.geometry.dominant_rate_hz},
                     {"noise_rate_hz", spec.geometry.noise_rate_hz},
                     {"template_count", spec.geometry.template_count}};
    j["params"] = {{"fs_hz", spec.params.fs_hz},
                   {"d0_um", spec.params.d0_um},
                   {"delay_um_per_sample", spec.params.delay_um_per_sample},
                   {"floor_sigma_base", spec.params.floor_sigma_base},
                   {"dominant_refractory_s", spec.params.dominant_refractory_s},
                   {"gain_cutoff", spec.params.gain_cutoff},
                   {"full_scale", spec.params.full_scale},
                   {"noise_enabled", spec.params.noise_enabled},
                   {"floor_enabled", spec.params.floor_enabled},
                   {"ac_couple", spec.params.ac_couple}};
    j["noise"] = {{"spike_rate_hz", spec.params.noise.spike_rate_hz},
                  {"amp_mean", spec.params.noise.amp_mean},
                  {"amp_std", spec.params.noise.amp_std},
                  {"sphere_radius_um", spec.params.noise.sphere_radius_um}};
    j["neuron_count"] = spec.neuron_count;
    j["duration_s"] = spec.duration_s;
    j["noise_levels_db"] = spec.noise_levels_db;
    j["seed"] = spec.seed;
    return j;
}

synth::DatasetSpec spec_from_json(const json& j) {
    synth::DatasetSpec spec;
    const auto& f = j.at("fractal");
    spec.scene.branching = f.at("branching").get<int>();
    spec.scene.depth = f.at("depth").get<int>();
    spec.scene.scale = f.at("scale").get<double>();
    spec.scene.seed = f.at("seed").get<std::uint64_t>();
    const auto& g = j.at("geometry");
    spec.geometry.tip_pitch_um = g.at("tip_pitch_um").get<double>();
    spec.geometry.sphere_radius_um = g.at("sphere_radius_um").get<double>();
    spec.geometry.surface_jitter_um = g.at("surface_jitter_um").get<double>();
    spec.geometry.dominant_offset_um = g.at("dominant_offset_um").get<double>();
    spec.geometry.dominant_rate_hz = g.at("dominant_rate_hz").get<double>();
    spec.geometry.noise_rate_hz = g.at("noise_rate_hz").get<double>();
    spec.geometry.template_count = g.at("template_count").get<int>();
    const auto& p = j.at("params");
    spec.params.fs_hz = p.at("fs_hz").get<double>();
    spec.params.d0_um = p.at("d0_um").get<double>();
    spec.params.delay_um_per_sample = p.at("delay_um_per_sample").get<double>();
    spec.params.floor_sigma_base = p.at("floor_sigma_base").get<double>();
    spec.params.dominant_refractory_s = p.at("dominant_refractory_s").get<double>();
    spec.params.gain_cutoff = p.at("gain_cutoff").get<double>();
    spec.params.full_scale = p.at("full_scale").get<double>();
    spec.params.noise_enabled = p.at("noise_enabled").get<bool>();
    spec.params.floor_enabled = p.at("floor_enabled").get<bool>();
    spec.params.ac_couple = p.at("ac_couple").get<bool>();
    const auto& n = j.at("noise");
    spec.params.noise.spike_rate_hz = n.at("spike_rate_hz").get<double>();
    spec.params.noise.amp_mean = n.at("amp_mean").get<double>();
    spec.params.noise.amp_std = n.at("amp_std").get<double>();
    spec.params.noise.sphere_radius_um = n.at("sphere_radius_um").get<double>();
    spec.neuron_count = j.at("neuron_count").get<int>();
    spec.duration_s = j.at("duration_s").get<double>();
    spec.noise_levels_db = j.at("noise_levels_db").get<std::vector<double>>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

std::string level_stem(double level_db) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "rec_%.2fdb", level_db);
    return buf;
}

}  // namespace

std::string manifest_json(const Manifest& manifest) {
    json j;
    j["format"] = "zydeco-dataset";
    j["version"] = 1;
    j["config_hash"] = manifest.config_hash;
    j["spec"] = spec_to_json(manifest.spec);
    j["scene"] = {{"file", manifest.scene_file}, {"sha256", manifest.scene_sha256}};
    json files = json::array();
    for (const auto& e : manifest.entries) {
        files.push_back({{"level_db", e.level_db},
                         {"recording", e.recording},
                         {"truth", e.truth},
                         {"recording_sha256", e.recording_sha256},
                         {"truth_sha256", e.truth_sha256}});
    }
    j["files"] = files;
    return j.dump(2) + "\n";
}

Manifest write_dataset(const synth::DatasetSpec& spec, const std::filesystem::path& dir,
                       const std::string& config_hash) {
    // validate before touching the filesystem
    const auto scene = synth::make_scene(spec);
    const auto bank = synth::make_default_bank(spec.params.fs_hz);

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create dataset directory " + dir.string());

    Manifest manifest;
    manifest.spec = spec;
    manifest.config_hash = config_hash;
    manifest.dir = dir;

    std::vector<std::filesystem::path> written;
    auto cleanup = [&]() {
        for (const auto& p : written) std::filesystem::remove(p, ec);
    };
    try {
        manifest.scene_file = "scene.json";
        const std::string scene_text = neuro::scene_to_json(scene);
        write_file(dir / manifest.scene_file, scene_text);
        written.push_back(dir / manifest.scene_file);
        manifest.scene_sha256 = sha256_hex(scene_text);

        for (const double level : spec.noise_levels_db) {
            const auto rec = synth::render(scene, bank, spec, level);
            ManifestEntry entry;
            entry.level_db = level;
            entry.recording = level_stem(level) + ".zyd";
            entry.truth = level_stem(level) + ".truth.csv";
            write_recording(dir / entry.recording, rec);
            written.push_back(dir / entry.recording);
            write_truth_csv(dir / entry.truth, rec.ground_truth);
            written.push_back(dir / entry.truth);
            entry.recording_sha256 = sha256_file_hex(dir / entry.recording);
            entry.truth_sha256 = sha256_file_hex(dir / entry.truth);
            manifest.entries.push_back(entry);
        }
        write_file(dir / "manifest.json", manifest_json(manifest));
    } catch (...) {
        cleanup();
        throw;
    }
    return manifest;
}

Manifest read_manifest(const std::filesystem::path& manifest_path) {
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw integrity_error("manifest: parse failure in " + manifest_path.string() + ": " +
                              e.what());
    }
    try {
        Manifest m;
        if (j.at("format").get<std::string>() != "zydeco-dataset")
            throw integrity_error("manifest: unknown format in " + manifest_path.string());
        m.config_hash = j.at("config_hash").get<std::string>();
        m.spec = spec_from_json(j.at("spec"));
        m.scene_file = j.at("scene").at("file").get<std::string>();
        m.scene_sha256 = j.at("scene").at("sha256").get<std::string>();
        for (const auto& f : j.at("files")) {
            ManifestEntry e;
            e.level_db = f.at("level_db").get<double>();
            e.recording = f.at("recording").get<std::string>();
            e.truth = f.at("truth").get<std::string>();
            e.recording_sha256 = f.at("recording_sha256").get<std::string>();
            e.truth_sha256 = f.at("truth_sha256").get<std::string>();
            m.entries.push_back(e);
        }
        m.dir = manifest_path.parent_path();
        return m;
    } catch (const json::exception& e) {
        throw integrity_error("manifest: missing field in " + manifest_path.string() + ": " +
                              e.what());
    }
}

void verify_manifest(const Manifest& manifest) {
    auto check = [&](const std::string& file, const std::string& expected) {
        const auto path = manifest.dir / file;
        if (!std::filesystem::exists(path))
            throw integrity_error("dataset integrity: missing file " + path.string());
        const auto actual = sha256_file_hex(path);
        if (actual != expected)
            throw integrity_error("dataset integrity: hash mismatch for " + path.string());
    };
    check(manifest.scene_file, manifest.scene_sha256);
    for (const auto& e : manifest.entries) {
        check(e.recording, e.recording_sha256);
        check(e.truth, e.truth_sha256);
    }
}

}  // namespace zydeco::io
