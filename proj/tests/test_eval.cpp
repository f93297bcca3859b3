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

#include <doctest.h>

#include <algorithm>

#include "zydeco/errors.hpp"
#include "zydeco/eval.hpp"
#include "zydeco/rng.hpp"

using namespace zydeco;
using namespace zydeco::eval;
using zydeco::synth::TruthEvent;

TEST_SUITE_BEGIN("eval");

namespace {

std::vector<TruthEvent> truth_at(std::initializer_list<std::pair<std::int64_t, int>> items) {
    std::vector<TruthEvent> truth;
    for (const auto& [index, label] : items) truth.push_back({label, 0, index});
    return truth;
}

std::vector<LabeledDetection> detections_at(
    std::initializer_list<std::pair<std::int64_t, int>> items) {
    std::vector<LabeledDetection> dets;
    for (const auto& [index, label] : items) dets.push_back({0, index, label});
    return dets;
}

}  // namespace

TEST_CASE("align") {
    SUBCASE("identity run is all true positives") {
        const auto truth = truth_at({{100, 0}, {200, 1}, {300, 0}});
        const auto dets = detections_at({{100, 0}, {200, 1}, {300, 0}});
        const auto c = align(truth, dets, 12);
        CHECK(c.true_pos == 3);
        CHECK(c.false_pos == 0);
        CHECK(c.false_neg == 0);
        CHECK(c.truth_total == 3);
    }
    SUBCASE("no detections at all") {
        const auto truth = truth_at({{10, 0}, {20, 0}, {30, 1}});
        const auto c = align(truth, {}, 12);
        CHECK(c.true_pos == 0);
        CHECK(c.false_pos == 0);
        CHECK(c.false_neg == 3);
    }
    SUBCASE("a detection within tolerance and with the right label is a tp") {
        const auto c = align(truth_at({{100, 4}}), detections_at({{110, 4}}), 12);
        CHECK(c.true_pos == 1);
        CHECK(c.false_pos == 0);
        CHECK(c.false_neg == 0);
    }
    SUBCASE("beyond tolerance both sides are charged") {
        const auto c = align(truth_at({{100, 4}}), detections_at({{113, 4}}), 12);
        CHECK(c.true_pos == 0);
        CHECK(c.false_pos == 1);
        CHECK(c.false_neg == 1);
    }
    SUBCASE("wrong label consumes the truth event and charges both sides") {
        const auto c = align(truth_at({{100, 4}}), detections_at({{100, 5}}), 12);
        CHECK(c.true_pos == 0);
        CHECK(c.false_pos == 1);
        CHECK(c.false_neg == 1);
    }
    SUBCASE("each detection takes the nearest unmatched truth event") {
        const auto truth = truth_at({{100, 0}, {110, 1}});
        const auto dets = detections_at({{108, 1}, {100, 0}});
        // chronological: detection 100 first takes truth 100, then 108 takes 110
        auto sorted = dets;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
        const auto c = align(truth, sorted, 12);
        CHECK(c.true_pos == 2);
    }
    SUBCASE("unsorted inputs violate the contract") {
        CHECK_THROWS_AS(align(truth_at({{200, 0}, {100, 0}}), {}, 12), contract_error);
        CHECK_THROWS_AS(align(truth_at({{100, 0}}),
                              detections_at({{200, 0}, {100, 0}}), 12),
                        contract_error);
        CHECK_THROWS_AS(align({}, {}, -1), contract_error);
    }
}

TEST_CASE("alignment properties on random instances") {
    Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<TruthEvent> truth;
        std::int64_t at = 0;
        const int n = 1 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i) {
            at += 1 + static_cast<std::int64_t>(rng.below(200));
            truth.push_back({static_cast<int>(rng.below(3)), 0, at});
        }
        std::vector<LabeledDetection> dets;
        for (const auto& t : truth) {
            if (rng.uniform() < 0.7) {
                dets.push_back({0, t.sample_index + static_cast<int>(rng.below(25)) - 12,
                                rng.uniform() < 0.8 ? t.neuron_id : 99});
            }
        }
        std::sort(dets.begin(), dets.end(),
                  [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });

        const auto c = align(truth, dets, 12);
        CHECK(c.true_pos + c.false_neg == c.truth_total);

        // tolerance monotonicity
        const auto wider = align(truth, dets, 24);
        CHECK(wider.true_pos >= c.true_pos);

        // symmetric perfect case
        std::vector<LabeledDetection> mirror;
        for (const auto& t : truth) mirror.push_back({0, t.sample_index, t.neuron_id});
        for (std::int64_t tol : {0, 5, 50}) {
            const auto perfect = align(truth, mirror, tol);
            CHECK(perfect.true_pos == c.truth_total);
            CHECK(perfect.false_pos == 0);
            CHECK(perfect.false_neg == 0);
        }
    }
}

TEST_CASE("greedy matching equals the unique perfect matching on separated instances") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const std::int64_t tol = 12;
        std::vector<TruthEvent> truth;
        std::vector<LabeledDetection> dets;
        std::int64_t at = 100;
        const int n = 1 + static_cast<int>(rng.below(30));
        for (int i = 0; i < n; ++i) {
            truth.push_back({static_cast<int>(rng.below(3)), 0, at});
            dets.push_back({0, at + static_cast<int>(rng.below(2 * tol + 1)) - tol,
                            truth.back().neuron_id});
            at += 2 * tol + 1 + static_cast<std::int64_t>(rng.below(100));
        }
        std::sort(dets.begin(), dets.end(),
                  [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
        const auto c = align(truth, dets, tol);
        CHECK(c.true_pos == static_cast<std::int64_t>(truth.size()));
        CHECK(c.false_pos == 0);
        CHECK(c.false_neg == 0);
    }
}

TEST_CASE("metrics") {
    SUBCASE("perfect run hits the {0, 1} optimum") {
        const auto m = metrics({100, 0, 0, 100});
        CHECK(m.fpr == 0.0);
        CHECK(m.tpr == 1.0);
        CHECK(m.accuracy == 1.0);
    }
    SUBCASE("mixed counts") {
        const auto m = metrics({90, 10, 10, 100});
        CHECK(m.tpr == doctest::Approx(0.9));
        CHECK(m.fpr == doctest::Approx(0.1));
    }
    SUBCASE("zero denominators give zero") {
        const auto m = metrics({0, 0, 100, 100});
        CHECK(m.tpr == 0.0);
        CHECK(m.fpr == 0.0);
        const auto empty = metrics({0, 0, 0, 0});
        CHECK(empty.tpr == 0.0);
        CHECK(empty.fpr == 0.0);
    }
    SUBCASE("negative counts are rejected") {
        CHECK_THROWS_AS(metrics({-1, 0, 0, 0}), contract_error);
    }
}

namespace {

SweepResult sweep_of(std::initializer_list<std::pair<double, std::pair<double, double>>> rows) {
    SweepResult r;
    r.config_hash = "h";
    for (const auto& [level, m] : rows) {
        SweepLevel row;
        row.level_db = level;
        row.metrics.tpr = m.first;
        row.metrics.fpr = m.second;
        r.levels.push_back(row);
    }
    return r;
}

}  // namespace

TEST_CASE("compare") {
    SUBCASE("identical runs have zero deltas") {
        const auto a = sweep_of({{0, {0.9, 0.1}}, {5, {0.8, 0.2}}});
        const auto deltas = compare(a, a);
        REQUIRE(deltas.size() == 2);
        for (const auto& d : deltas) {
            CHECK(*d.dtpr_pct == 0.0);
            CHECK(*d.dfpr_pct == 0.0);
        }
    }
    SUBCASE("percent semantics match the reporting convention") {
        const auto a = sweep_of({{0, {0.5, 0.27}}});
        const auto b = sweep_of({{0, {0.615, 0.01}}});
        const auto deltas = compare(a, b);
        CHECK(*deltas[0].dtpr_pct == doctest::Approx(23.0));
        CHECK(*deltas[0].dfpr_pct == doctest::Approx(96.2963).epsilon(1e-4));
    }
    SUBCASE("zero baselines are undefined, not infinite") {
        const auto a = sweep_of({{0, {0.0, 0.0}}});
        const auto b = sweep_of({{0, {0.5, 0.1}}});
        const auto deltas = compare(a, b);
        CHECK(!deltas[0].dtpr_pct.has_value());
        CHECK(!deltas[0].dfpr_pct.has_value());
    }
    SUBCASE("grid mismatch is an error") {
        const auto a = sweep_of({{0, {0.5, 0.1}}});
        const auto b = sweep_of({{5, {0.5, 0.1}}});
        CHECK_THROWS_AS(compare(a, b), contract_error);
        const auto c = sweep_of({{0, {0.5, 0.1}}, {5, {0.4, 0.1}}});
        CHECK_THROWS_AS(compare(a, c), contract_error);
    }
}

TEST_CASE("csv forms") {
    auto a = sweep_of({{0, {0.5, 0.25}}});
    a.levels[0].metrics.accuracy = 0.5;
    a.levels[0].metrics.counts = {50, 25, 50, 100};
    const auto csv = sweep_csv(a);
    CHECK(csv.find("# config_hash=h\n") == 0);
    CHECK(csv.find("level_db,tpr,fpr,accuracy,tp,fp,fn,truth_total\n") != std::string::npos);
    CHECK(csv.find("0.000000,0.500000,0.250000,0.500000,50,25,50,100\n") != std::string::npos);

    const auto b = sweep_of({{0, {0.0, 0.0}}});
    const auto deltas = compare(b, b);
    const auto dcsv = compare_csv(deltas, "h");
    CHECK(dcsv.find("level_db,dtpr_pct,dfpr_pct\n") != std::string::npos);
    CHECK(dcsv.find("undefined,undefined") != std::string::npos);
}

TEST_SUITE_END();
