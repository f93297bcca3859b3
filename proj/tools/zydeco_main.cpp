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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "zydeco/config.hpp"
#include "zydeco/errors.hpp"
#include "zydeco/eval.hpp"
#include "zydeco/fplt.hpp"
#include "zydeco/pipeline.hpp"
#include "zydeco/recording_io.hpp"
#include "zydeco/sha256.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using zydeco::config::RunConfig;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw zydeco::io_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw zydeco::io_error("short write: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw zydeco::io_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

RunConfig load_effective_config(const std::string& config_path) {
    if (!config_path.empty()) return zydeco::config::load_config(config_path);
    if (const char* env = std::getenv("ZYDECO_CONFIG"); env && *env)
        return zydeco::config::load_config(env);
    return RunConfig{};
}

json sweep_to_json(const zydeco::eval::SweepResult& result) {
    json j;
    j["config_hash"] = result.config_hash;
    j["seed"] = result.seed;
    json levels = json::array();
    for (const auto& row : result.levels) {
        const auto& m = row.metrics;
        levels.push_back({{"level_db", row.level_db},
                          {"tpr", m.tpr},
                          {"fpr", m.fpr},
                          {"accuracy", m.accuracy},
                          {"tp", m.counts.true_pos},
                          {"fp", m.counts.false_pos},
                          {"fn", m.counts.false_neg},
                          {"truth_total", m.counts.truth_total}});
    }
    j["levels"] = levels;
    return j;
}

zydeco::eval::SweepResult sweep_from_json(const json& j) {
    zydeco::eval::SweepResult result;
    result.config_hash = j.at("config_hash").get<std::string>();
    result.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("levels")) {
        zydeco::eval::SweepLevel level;
        level.level_db = row.at("level_db").get<double>();
        level.metrics.tpr = row.at("tpr").get<double>();
        level.metrics.fpr = row.at("fpr").get<double>();
        level.metrics.accuracy = row.at("accuracy").get<double>();
        level.metrics.counts.true_pos = row.at("tp").get<std::int64_t>();
        level.metrics.counts.false_pos = row.at("fp").get<std::int64_t>();
        level.metrics.counts.false_neg = row.at("fn").get<std::int64_t>();
        level.metrics.counts.truth_total = row.at("truth_total").get<std::int64_t>();
        result.levels.push_back(level);
    }
    return result;
}

void write_snapshot(const fs::path& path, const zydeco::match::Fplt& table,
                    const std::string& hash) {
    const auto bytes = table.serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw zydeco::io_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw zydeco::io_error("short write: " + path.string());

    json side;
    side["config_hash"] = hash;
    side["budget_bits"] = table.config().budget_bits;
    side["theta_match"] = table.config().theta_match;
    side["theta_new"] = table.config().theta_new;
    side["r_det"] = table.config().r_det;
    side["detector_reserve"] = table.config().detector_reserve;
    side["entries"] = table.entries().size();
    side["detectors"] = table.detectors().size();
    json labels = json::array();
    for (const auto& e : table.entries()) labels.push_back(e.label);
    side["labels"] = labels;
    write_text(path.string() + ".json", side.dump(2) + "\n");
}

zydeco::match::Fplt read_snapshot(const fs::path& path) {
    zydeco::match::MatchConfig cfg;
    const fs::path side_path = path.string() + ".json";
    if (fs::exists(side_path)) {
        const json side = json::parse(read_text(side_path));
        cfg.budget_bits = side.at("budget_bits").get<std::uint32_t>();
        cfg.theta_match = side.at("theta_match").get<float>();
        cfg.theta_new = side.at("theta_new").get<float>();
        cfg.r_det = side.at("r_det").get<float>();
        cfg.detector_reserve = side.at("detector_reserve").get<double>();
    }
    const std::string bytes = read_text(path);
    return zydeco::match::Fplt::deserialize(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                      bytes.size()),
        cfg);
}

std::vector<double> parse_levels(const std::string& csv) {
    std::vector<double> levels;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        levels.push_back(std::stod(item));
    }
    if (levels.empty()) throw zydeco::config_error("--levels: no levels given");
    return levels;
}

int cmd_gen(const RunConfig& cfg, const std::string& out_dir) {
    const auto manifest = zydeco::io::write_dataset(cfg.dataset, out_dir,
                                                    zydeco::config::config_hash(cfg));
    std::cout << "dataset written to " << out_dir << " (" << manifest.entries.size()
              << " noise levels, seed " << cfg.dataset.seed << ")\n";
    for (const auto& e : manifest.entries)
        std::cout << "  " << e.recording << "  sha256 " << e.recording_sha256.substr(0, 12)
                  << "...\n";
    return 0;
}

int cmd_run(const RunConfig& cfg, const std::string& dataset_dir, double level,
            const std::string& out_dir, const std::string& snapshot, bool debug_csv) {
    const auto manifest = zydeco::io::read_manifest(fs::path(dataset_dir) / "manifest.json");
    zydeco::io::verify_manifest(manifest);

    const auto entry = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                                    [&](const auto& e) { return e.level_db == level; });
    if (entry == manifest.entries.end())
        throw zydeco::config_error("run: level " + std::to_string(level) +
                                   " dB is not in the dataset");

    const auto scene = zydeco::synth::make_scene(manifest.spec);
    const auto bank = zydeco::synth::make_default_bank(manifest.spec.params.fs_hz);
    auto rec = zydeco::io::read_recording(manifest.dir / entry->recording,
                                          manifest.spec.params.full_scale);
    rec.ground_truth = zydeco::io::read_truth_csv(manifest.dir / entry->truth);

    const auto run =
        zydeco::pipeline::run_level(rec, scene, bank, manifest.spec.params, cfg.pipeline);
    const std::string hash = zydeco::config::config_hash(cfg);

    zydeco::eval::SweepResult result;
    result.config_hash = hash;
    result.seed = manifest.spec.seed;
    result.levels.push_back({level, run.metrics});

    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "metrics.csv", zydeco::eval::sweep_csv(result));
    write_text(fs::path(out_dir) / "metrics.json", sweep_to_json(result).dump(2) + "\n");
    if (!snapshot.empty()) write_snapshot(snapshot, run.table, hash);
    if (debug_csv) {
        std::vector<zydeco::detect::SpikeEvent> events;
        for (const auto& [ev, fingerprint] : run.events) events.push_back(ev);
        write_text(fs::path(out_dir) / "events.csv", zydeco::io::events_csv(events));
        write_text(fs::path(out_dir) / "fingerprints.csv",
                   zydeco::io::fingerprints_csv(run.events));
    }

    const auto& m = run.metrics;
    std::cout << "level " << level << " dB: tpr " << m.tpr << " fpr " << m.fpr << " accuracy "
              << m.accuracy << " (" << run.detected_events << " events, "
              << run.rejected_events << " rejected)\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& dataset_dir, const std::string& out_dir) {
    const auto manifest = zydeco::io::read_manifest(fs::path(dataset_dir) / "manifest.json");
    const std::string hash = zydeco::config::config_hash(cfg);
    const auto result = zydeco::pipeline::sweep(manifest, cfg.pipeline, hash);

    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "sweep.csv", zydeco::eval::sweep_csv(result));
    write_text(fs::path(out_dir) / "sweep.json", sweep_to_json(result).dump(2) + "\n");
    std::cout << zydeco::eval::sweep_csv(result);
    return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out,
                bool force) {
    const auto a = sweep_from_json(json::parse(read_text(a_path)));
    const auto b = sweep_from_json(json::parse(read_text(b_path)));
    if (!force && a.config_hash != b.config_hash)
        throw zydeco::contract_error(
            "compare: the runs used different pipeline configs (pass --force to override)");
    const auto deltas = zydeco::eval::compare(a, b);
    const std::string csv = zydeco::eval::compare_csv(deltas, a.config_hash);
    if (!out.empty()) write_text(out, csv);
    std::cout << csv;
    return 0;
}

int cmd_fplt_dump(const std::string& path) {
    const auto table = read_snapshot(path);
    std::cout << "fplt snapshot " << path << "\n"
              << "  entries " << table.entries().size() << " / " << table.entry_capacity()
              << ", detectors " << table.detectors().size() << " / "
              << table.detector_capacity() << ", " << table.serialized_bits() << " of "
              << table.config().budget_bits << " bits\n";
    for (const auto& e : table.entries()) {
        std::cout << "  entry label " << static_cast<int>(e.label) << " hits " << e.hit_count
                  << " last_used " << e.last_used << " code";
        for (int i = 0; i < 6; ++i) std::cout << ' ' << static_cast<int>(e.code[static_cast<std::size_t>(i)]);
        std::cout << " ...\n";
    }
    return 0;
}

int cmd_fplt_load(const std::string& path) {
    const auto table = read_snapshot(path);
    std::cout << "ok: " << table.entries().size() << " entries, "
              << table.detectors().size() << " detectors, " << table.serialized_bits()
              << " bits within budget " << table.config().budget_bits << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zydeco-sort: two-path spike-sorting pipeline over synthetic recordings"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "config file (default: $ZYDECO_CONFIG)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a ground-truthed dataset");
    std::string gen_out = "dataset";
    std::optional<std::string> gen_levels;
    std::optional<double> gen_duration;
    std::optional<int> gen_neurons;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--levels", gen_levels, "comma-separated noise levels in dB");
    gen->add_option("--duration", gen_duration, "seconds per recording");
    gen->add_option("--neurons", gen_neurons, "dominant neurons (= tips = channels)");
    gen->add_option("--seed", gen_seed, "dataset seed");

    // run
    auto* run = app.add_subcommand("run", "run the pipeline on one noise level");
    std::string run_dataset, run_out = "out", run_snapshot;
    double run_level = 0.0;
    bool run_debug_csv = false;
    run->add_option("--dataset", run_dataset, "dataset directory")->required();
    run->add_option("--level", run_level, "noise level in dB")->required();
    run->add_option("--out", run_out, "report directory");
    run->add_option("--snapshot", run_snapshot, "write the final FPLT snapshot here");
    run->add_flag("--debug-csv", run_debug_csv,
                  "also write events.csv and fingerprints.csv for inspection");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run every level and emit the results table");
    std::string sweep_dataset, sweep_out = "out";
    sweep->add_option("--dataset", sweep_dataset, "dataset directory")->required();
    sweep->add_option("--out", sweep_out, "report directory");

    // compare
    auto* compare = app.add_subcommand("compare", "percent deltas between two sweep reports");
    std::string cmp_a, cmp_b, cmp_out;
    bool cmp_force = false;
    compare->add_option("a", cmp_a, "baseline sweep.json")->required();
    compare->add_option("b", cmp_b, "candidate sweep.json")->required();
    compare->add_option("--out", cmp_out, "write the delta CSV here");
    compare->add_flag("--force", cmp_force, "compare despite different config hashes");

    // fplt
    auto* fplt = app.add_subcommand("fplt", "fingerprint table snapshots");
    fplt->require_subcommand(1);
    auto* dump = fplt->add_subcommand("dump", "print a snapshot's contents");
    auto* load = fplt->add_subcommand("load", "validate a snapshot");
    std::string dump_path, load_path;
    dump->add_option("snapshot", dump_path, "snapshot file")->required();
    load->add_option("snapshot", load_path, "snapshot file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_effective_config(config_path);
        if (gen->parsed()) {
            if (gen_levels) cfg.dataset.noise_levels_db = parse_levels(*gen_levels);
            if (gen_duration) cfg.dataset.duration_s = *gen_duration;
            if (gen_neurons) cfg.dataset.neuron_count = *gen_neurons;
            if (gen_seed) cfg.dataset.seed = *gen_seed;
            cfg.validate();
            return cmd_gen(cfg, gen_out);
        }
        if (run->parsed())
            return cmd_run(cfg, run_dataset, run_level, run_out, run_snapshot, run_debug_csv);
        if (sweep->parsed()) return cmd_sweep(cfg, sweep_dataset, sweep_out);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out, cmp_force);
        if (fplt->parsed()) {
            if (dump->parsed()) return cmd_fplt_dump(dump_path);
            if (load->parsed()) return cmd_fplt_load(load_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
