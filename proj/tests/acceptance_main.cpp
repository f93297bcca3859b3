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

// End-to-end acceptance suite. Each numbered criterion prints exactly one
// PASS/FAIL line; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "zydeco/detect.hpp"
#include "zydeco/eval.hpp"
#include "zydeco/fingerprint.hpp"
#include "zydeco/fplt.hpp"
#include "zydeco/pipeline.hpp"
#include "zydeco/recording_io.hpp"
#include "zydeco/rng.hpp"
#include "zydeco/synth.hpp"

namespace fs = std::filesystem;
using namespace zydeco;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

synth::DatasetSpec reference_spec() {
    synth::DatasetSpec spec;
    spec.neuron_count = 3;
    spec.duration_s = 10.0;
    spec.noise_levels_db = {0.0, 5.0, 7.0, 10.0};
    spec.seed = 42;
    return spec;
}

fp::Fingerprint fingerprint_of(const fp::Code& code) {
    fp::Fingerprint f;
    f.code = code;
    return f;
}

fp::Code random_code(Rng& rng) {
    fp::Code code{};
    for (auto& b : code) b = static_cast<std::uint8_t>(rng.below(256));
    return code;
}

std::vector<std::pair<std::uint8_t, fp::Fingerprint>> random_population(Rng& rng, int n) {
    std::vector<std::pair<std::uint8_t, fp::Fingerprint>> pop;
    for (int i = 0; i < n; ++i)
        pop.emplace_back(static_cast<std::uint8_t>(i), fingerprint_of(random_code(rng)));
    return pop;
}

// ---- criteria ------------------------------------------------------------

void criterion_1_clean_optimum() {
    const auto t0 = Clock::now();
    auto spec = reference_spec();
    spec.params.noise_enabled = false;
    spec.params.floor_enabled = false;
    const auto scene = synth::make_scene(spec);
    const auto bank = synth::make_default_bank();
    const auto rec = synth::render(scene, bank, spec, 0.0);
    const auto run =
        pipeline::run_level(rec, scene, bank, spec.params, pipeline::PipelineConfig{});
    const double dt = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "clean-condition optimum: tpr=%.4f fpr=%.4f (%zu truth events, %.2fs)",
                  run.metrics.tpr, run.metrics.fpr, rec.ground_truth.size(), dt);
    report(1, run.metrics.tpr == 1.0 && run.metrics.fpr == 0.0 && dt < 10.0, buf);
}

struct SweepOutcome {
    std::vector<pipeline::LevelRun> runs;
    double seconds = 0.0;
};

SweepOutcome run_reference_sweep() {
    const auto t0 = Clock::now();
    const auto spec = reference_spec();
    const auto scene = synth::make_scene(spec);
    const auto bank = synth::make_default_bank();
    SweepOutcome out;
    for (const double level : spec.noise_levels_db) {
        const auto rec = synth::render(scene, bank, spec, level);
        out.runs.push_back(
            pipeline::run_level(rec, scene, bank, spec.params, pipeline::PipelineConfig{}));
    }
    out.seconds = seconds_since(t0);
    return out;
}

void criterion_2_degradation(const SweepOutcome& sweep) {
    bool monotone = true;
    for (std::size_t i = 1; i < sweep.runs.size(); ++i) {
        if (sweep.runs[i].metrics.tpr > sweep.runs[i - 1].metrics.tpr + 0.02)
            monotone = false;
    }
    const double tpr0 = sweep.runs.front().metrics.tpr;
    std::string detail = "degradation ordering: tpr by level =";
    for (const auto& run : sweep.runs) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), " %.4f", run.metrics.tpr);
        detail += buf;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), " (tpr@0dB=%.4f, %.1fs total)", tpr0, sweep.seconds);
    detail += buf;
    report(2, monotone && tpr0 >= 0.95 && sweep.seconds < 60.0, detail);
}

void criterion_3_worst_level(const SweepOutcome& sweep) {
    const auto& worst = sweep.runs.back();
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "worst-level floor: accuracy@10dB=%.4f (reference design reports 0.935 "
                  "worst-case; not directly comparable)",
                  worst.metrics.accuracy);
    report(3, worst.metrics.accuracy >= 0.60, buf);
}

void criterion_4_budget(const SweepOutcome& sweep) {
    bool ok = true;
    std::size_t max_bits = 0;
    for (const auto& run : sweep.runs) {
        const auto bits = run.table.serialized_bits();
        max_bits = std::max(max_bits, bits);
        if (bits > 32768 || run.table.serialize().size() * 8 > 32768) ok = false;
    }
    // force insertions and evictions well past capacity; classify itself
    // re-checks the budget on every call
    Rng rng(4242);
    auto table = match::Fplt::seed_population(random_population(rng, 60), match::MatchConfig{});
    table.train_detectors(16, 99);
    std::size_t inserted = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto before = table.entries().size();
        table.classify(fingerprint_of(random_code(rng)));
        if (table.entries().size() != before ||
            table.entries().size() == table.entry_capacity())
            ++inserted;
        const auto bits = table.serialized_bits();
        max_bits = std::max(max_bits, bits);
        if (bits > 32768) ok = false;
    }
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "budget invariant: max serialized %zu of 32768 bits across sweep tables "
                  "and %zu stress inserts/evictions",
                  max_bits, inserted);
    report(4, ok && inserted > 100, buf);
}

void criterion_5_self_tolerance() {
    int violations = 0;
    long detectors_total = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        Rng rng(90000 + static_cast<std::uint64_t>(trial));
        const int n = 1 + static_cast<int>(rng.below(60));
        auto table = match::Fplt::seed_population(random_population(rng, n),
                                                  match::MatchConfig{});
        table.train_detectors(8, 50000 + static_cast<std::uint64_t>(trial));
        detectors_total += static_cast<long>(table.detectors().size());
        for (const auto& d : table.detectors()) {
            for (const auto& e : table.entries()) {
                if (fp::code_distance(d.code, e.code) <=
                    match::detector_radius_value(d.radius))
                    ++violations;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "negative-selection self-tolerance: %d violations over 10000 trials "
                  "(%ld detectors checked)",
                  violations, detectors_total);
    report(5, violations == 0 && detectors_total > 0, buf);
}

void criterion_6_integrator() {
    const neuro::PlasticityParams p;
    double worst = 0.0;
    for (double c : {0.0, 0.25, 1.0, 4.0}) {
        const double tau = p.tau(c);
        const double omega = p.omega(c);
        const double dt = tau / 1000.0;
        neuro::SynapseState s;
        s.calcium = c;
        s.w = 1.0;
        for (int i = 1; i <= 5000; ++i) {
            s = neuro::step_weight(s, dt, p);
            const double exact = omega + (1.0 - omega) * std::exp(-i * dt / tau);
            worst = std::max(worst, std::abs(s.w - exact));
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "weight integrator vs closed form: max abs error %.3g (bound 1e-6)", worst);
    report(6, worst <= 1e-6, buf);
}

void criterion_7_noise_statistics() {
    Rng rng(777);
    const synth::NoiseModel noise;
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = synth::draw_noise_amplitude(rng, noise);
        sum += a;
        sq += a * a;
    }
    const double mean = sum / n;
    const double stddev = std::sqrt(sq / n - mean * mean);

    auto spec = reference_spec();
    spec.duration_s = 1.0;
    const auto scene = synth::make_scene(spec);
    const auto bank = synth::make_default_bank();
    const auto fr = synth::render_field(scene, bank, spec, 0.0);
    const double gap = std::abs(static_cast<double>(fr.noise_events) - 48000.0);
    const double bound = 3.0 * std::sqrt(48000.0);

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "noise statistics: amplitude mean %.4f std %.4f; %zu surrounding spikes "
                  "in 1s (|gap| %.0f <= %.0f)",
                  mean, stddev, fr.noise_events, gap, bound);
    report(7,
           mean >= 0.995 && mean <= 1.005 && stddev >= 0.195 && stddev <= 0.205 &&
               gap <= bound,
           buf);
}

void criterion_8_oracles() {
    bool ok_nn = true, ok_mad = true, ok_delay = true, ok_roundtrip = true;

    {  // (a) classify nearest-entry equals the linear scan
        Rng rng(811);
        const auto pop = random_population(rng, 50);
        const auto table = match::Fplt::seed_population(pop, match::MatchConfig{});
        for (int q = 0; q < 1000 && ok_nn; ++q) {
            const auto code = random_code(rng);
            float best = std::numeric_limits<float>::max();
            std::uint8_t label = 0;
            for (const auto& e : table.entries()) {
                const float d = fp::code_distance(code, e.code);
                if (d < best || (d == best && e.label < label)) {
                    best = d;
                    label = e.label;
                }
            }
            match::Fplt copy = table;
            const auto dec = copy.classify(fingerprint_of(code));
            const auto& cfg = table.config();
            if (best <= cfg.theta_match) {
                ok_nn = dec.kind == match::MatchDecision::Kind::Known && dec.label == label;
            } else if (best > cfg.theta_new) {
                ok_nn = dec.kind == match::MatchDecision::Kind::New;
            } else {
                ok_nn = dec.kind == match::MatchDecision::Kind::Rejected;
            }
        }
    }

    double mad_err = 0.0;
    {  // (b) MAD sigma within 2% on a million Gaussian samples
        Rng rng(812);
        Eigen::VectorXf x(1000000);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = static_cast<float>(rng.normal());
        mad_err = std::abs(detect::noise_sigma(x) - 1.0);
        ok_mad = mad_err <= 0.02;
    }

    {  // (c) delay recovery exact on constructed shifts
        const auto bank = synth::make_default_bank();
        const detect::Window w = bank.waveform(0);
        for (int shift = -16; shift <= 16 && ok_delay; ++shift) {
            Eigen::MatrixXf samples = Eigen::MatrixXf::Zero(600, 2);
            samples.col(0).segment(200, 64) = w;
            samples.col(1).segment(200 + shift, 64) = 0.5f * w;
            detect::SpikeEvent ev;
            ev.channel = 0;
            ev.pivot = 220;
            ev.window = w;
            const int neighbors[] = {1};
            const std::int64_t history[] = {220};
            const auto g =
                fp::global_fingerprint(ev, samples, neighbors, history, fp::FingerprintConfig{});
            ok_delay = g.delays[0] == static_cast<float>(shift);
        }
    }

    {  // (d) serialize/deserialize round trip on random tables
        Rng rng(813);
        for (int trial = 0; trial < 100 && ok_roundtrip; ++trial) {
            auto table = match::Fplt::seed_population(
                random_population(rng, 1 + static_cast<int>(rng.below(60))),
                match::MatchConfig{});
            table.train_detectors(static_cast<int>(rng.below(24)), 7000 + trial);
            for (int i = 0; i < 10; ++i) table.classify(fingerprint_of(random_code(rng)));
            const auto bytes = table.serialize();
            ok_roundtrip = match::Fplt::deserialize(bytes, table.config()) == table;
        }
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "oracle equivalences: nearest-entry %s, mad err %.4f, shifts %s, "
                  "round-trip %s",
                  ok_nn ? "ok" : "mismatch", mad_err, ok_delay ? "exact" : "wrong",
                  ok_roundtrip ? "ok" : "broken");
    report(8, ok_nn && ok_mad && ok_delay && ok_roundtrip, buf);
}

void criterion_9_determinism(const std::string& cli, const fs::path& work) {
    if (cli.empty()) {
        report(9, false, "determinism: no --cli path given");
        return;
    }
    auto shell = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const auto a = work / "ds_a";
    const auto b = work / "ds_b";
    const std::string gen_args = "gen --levels 0,5,7,10 --duration 10 --neurons 3 --seed 42";
    bool ok = shell(gen_args + " --out " + a.string()) &&
              shell(gen_args + " --out " + b.string());

    std::size_t files_compared = 0;
    if (ok) {
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto name = entry.path().filename();
            ++files_compared;
            if (read_bytes(entry.path()) != read_bytes(b / name)) ok = false;
        }
        ok = ok && files_compared == 10;  // 4 recordings, 4 sidecars, scene, manifest
    }

    bool sweep_ok = false;
    if (ok) {
        const auto s1 = work / "sweep_1";
        const auto s2 = work / "sweep_2";
        sweep_ok = shell("sweep --dataset " + a.string() + " --out " + s1.string()) &&
                   shell("sweep --dataset " + b.string() + " --out " + s2.string()) &&
                   read_bytes(s1 / "sweep.csv") == read_bytes(s2 / "sweep.csv") &&
                   !read_bytes(s1 / "sweep.csv").empty();
    }

    // snapshot side requirement from the run surface: at most 4 KiB
    bool snapshot_ok = false;
    if (ok) {
        const auto snap = work / "table.fplt";
        snapshot_ok = shell("run --dataset " + a.string() + " --level 0 --out " +
                            (work / "run_out").string() + " --snapshot " + snap.string()) &&
                      fs::exists(snap) && fs::file_size(snap) <= 4096;
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "determinism: %zu dataset files byte-identical across runs, sweep CSVs %s, "
                  "snapshot within 4 KiB %s",
                  files_compared, sweep_ok ? "identical" : "differ",
                  snapshot_ok ? "yes" : "no");
    report(9, ok && sweep_ok && snapshot_ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    }
    const auto work =
        fs::temp_directory_path() / ("zydeco_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);

    try {
        criterion_1_clean_optimum();
        const auto sweep = run_reference_sweep();
        criterion_2_degradation(sweep);
        criterion_3_worst_level(sweep);
        criterion_4_budget(sweep);
        criterion_5_self_tolerance();
        criterion_6_integrator();
        criterion_7_noise_statistics();
        criterion_8_oracles();
        criterion_9_determinism(cli, work);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        ++failures;
    }

    fs::remove_all(work);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
