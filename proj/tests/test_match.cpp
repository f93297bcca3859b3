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
#include <cmath>
#include <vector>

#include "zydeco/errors.hpp"
#include "zydeco/fplt.hpp"
#include "zydeco/rng.hpp"

using namespace zydeco;
using namespace zydeco::match;

TEST_SUITE_BEGIN("match");

namespace {

fp::Fingerprint fingerprint_with_code(const fp::Code& code) {
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
        pop.emplace_back(static_cast<std::uint8_t>(i), fingerprint_with_code(random_code(rng)));
    return pop;
}

/// Brute-force reference: nearest entry by the normalized distance with
/// ties broken by the lowest label, then the threshold bands.
struct OracleDecision {
    MatchDecision::Kind kind;
    std::uint8_t label;
};

OracleDecision oracle_classify(const Fplt& table, const fp::Code& code) {
    const auto& cfg = table.config();
    for (const auto& d : table.detectors()) {
        if (fp::code_distance(code, d.code) <= detector_radius_value(d.radius))
            return {MatchDecision::Kind::Rejected, 0};
    }
    if (table.entries().empty()) return {MatchDecision::Kind::New, 0};
    float best = std::numeric_limits<float>::max();
    std::uint8_t label = 0;
    for (const auto& e : table.entries()) {
        const float d = fp::code_distance(code, e.code);
        if (d < best || (d == best && e.label < label)) {
            best = d;
            label = e.label;
        }
    }
    if (best <= cfg.theta_match) return {MatchDecision::Kind::Known, label};
    if (best > cfg.theta_new) return {MatchDecision::Kind::New, 0};
    return {MatchDecision::Kind::Rejected, 0};
}

}  // namespace

TEST_CASE("serialized layout arithmetic") {
    Rng rng(1);
    SUBCASE("empty table is the 128-bit header") {
        Fplt table{MatchConfig{}};
        CHECK(table.serialized_bits() == 128);
        CHECK(table.serialize().size() * 8 == 128);
    }
    SUBCASE("three seeded entries use 960 entry bits") {
        const auto pop = random_population(rng, 3);
        const auto table = Fplt::seed_population(pop, MatchConfig{});
        CHECK(table.entry_bits() == 3 * 40 * 8);
        CHECK(table.serialized_bits() == 128 + 960);
    }
    SUBCASE("ten entries and five detectors") {
        const auto pop = random_population(rng, 10);
        auto table = Fplt::seed_population(pop, MatchConfig{});
        REQUIRE(table.train_detectors(5, 99) == 5);
        CHECK(table.serialized_bits() == 128 + 10 * 320 + 5 * 272);
        CHECK(table.serialize().size() * 8 == 4688);
    }
    SUBCASE("empty population is valid") {
        const auto table =
            Fplt::seed_population(std::span<const std::pair<std::uint8_t, fp::Fingerprint>>{},
                                  MatchConfig{});
        CHECK(table.entries().empty());
    }
}

TEST_CASE("capacity is enforced at seeding time") {
    Rng rng(2);
    std::vector<std::pair<std::uint8_t, fp::Fingerprint>> pop;
    for (int i = 0; i < 200; ++i)
        pop.emplace_back(static_cast<std::uint8_t>(i), fingerprint_with_code(random_code(rng)));
    CHECK_THROWS_WITH_AS(Fplt::seed_population(pop, MatchConfig{}),
                         doctest::Contains("bits"), capacity_error);
    // 76 entries of 320 bits fit the 75% entry share of 32768 bits
    Fplt table{MatchConfig{}};
    CHECK(table.entry_capacity() == 76);
    CHECK(table.detector_capacity() == 30);
}

TEST_CASE("negative selection training") {
    Rng rng(3);
    SUBCASE("an empty self set censors nothing") {
        Fplt table{MatchConfig{}};
        CHECK(table.train_detectors(12, 4) == 12);
        CHECK(table.detectors().size() == 12);
    }
    SUBCASE("detector budget caps the count") {
        Fplt table{MatchConfig{}};
        CHECK(table.train_detectors(1000, 5) == 30);
    }
    SUBCASE("no surviving detector matches any self entry") {
        for (int trial = 0; trial < 100; ++trial) {
            Rng trng(100 + static_cast<std::uint64_t>(trial));
            const auto pop = random_population(trng, 1 + static_cast<int>(trng.below(50)));
            auto table = Fplt::seed_population(pop, MatchConfig{});
            table.train_detectors(16, 1000 + static_cast<std::uint64_t>(trial));
            for (const auto& d : table.detectors()) {
                for (const auto& e : table.entries()) {
                    CHECK(fp::code_distance(d.code, e.code) >
                          detector_radius_value(d.radius));
                }
            }
        }
    }
    SUBCASE("a candidate equal to a self entry is censored") {
        // radius zero distance: make the whole space self by a huge radius
        MatchConfig cfg;
        cfg.r_det = 1.0f;
        Rng prng(6);
        const auto pop = random_population(prng, 1);
        auto table = Fplt::seed_population(pop, cfg);
        CHECK(table.train_detectors(8, 7) == 0);  // everything within radius 1
        CHECK(table.detectors().empty());
    }
}

TEST_CASE("classify follows the decision bands") {
    MatchConfig cfg;
    fp::Code base{};
    base.fill(100);
    auto table = Fplt::seed_population(
        std::vector<std::pair<std::uint8_t, fp::Fingerprint>>{{7, fingerprint_with_code(base)}},
        cfg);

    SUBCASE("exact match is known at distance zero") {
        const auto d = table.classify(fingerprint_with_code(base));
        CHECK(d.kind == MatchDecision::Kind::Known);
        CHECK(d.label == 7);
        REQUIRE(d.distance.has_value());
        CHECK(*d.distance == 0.0f);
        CHECK(table.entries()[0].hit_count == 1);
    }
    SUBCASE("ambiguous band rejects") {
        // perturb every byte by 26: distance 26/255 = 0.102... wait that is
        // inside theta_match; use 60: 60/255 = 0.235 in (0.15, 0.30]
        fp::Code q = base;
        for (auto& b : q) b = static_cast<std::uint8_t>(b + 60);
        const auto d = table.classify(fingerprint_with_code(q));
        CHECK(d.kind == MatchDecision::Kind::Rejected);
        REQUIRE(d.distance.has_value());
        CHECK(*d.distance == doctest::Approx(60.0 / 255.0));
    }
    SUBCASE("distance beyond theta_new inserts a fresh label") {
        fp::Code q = base;
        for (auto& b : q) b = static_cast<std::uint8_t>(b + 100);  // 0.392
        const auto d = table.classify(fingerprint_with_code(q));
        CHECK(d.kind == MatchDecision::Kind::New);
        CHECK(d.label == 8);  // next label after 7
        CHECK(table.entries().size() == 2);
    }
    SUBCASE("empty table inserts label zero") {
        Fplt empty{cfg};
        const auto d = empty.classify(fingerprint_with_code(base));
        CHECK(d.kind == MatchDecision::Kind::New);
        CHECK(d.label == 0);
        CHECK(!d.distance.has_value());
        CHECK(empty.entries().size() == 1);
    }
    SUBCASE("detector rejection carries no distance") {
        MatchConfig wide = cfg;
        wide.r_det = 0.9f;
        Fplt empty{wide};
        REQUIRE(empty.train_detectors(30, 8) == 30);
        Rng rng(9);
        bool saw_detector_rejection = false;
        for (int i = 0; i < 50 && !saw_detector_rejection; ++i) {
            Fplt copy = empty;
            const auto d = copy.classify(fingerprint_with_code(random_code(rng)));
            if (d.kind == MatchDecision::Kind::Rejected) {
                CHECK(!d.distance.has_value());
                saw_detector_rejection = true;
            }
        }
        CHECK(saw_detector_rejection);
    }
}

TEST_CASE("classify equals the linear-scan oracle") {
    Rng rng(11);
    const auto pop = random_population(rng, 50);
    const auto table = Fplt::seed_population(pop, MatchConfig{});
    for (int q = 0; q < 1000; ++q) {
        const auto code = random_code(rng);
        const auto expected = oracle_classify(table, code);
        Fplt copy = table;
        const auto got = copy.classify(fingerprint_with_code(code));
        CHECK(got.kind == expected.kind);
        if (expected.kind == MatchDecision::Kind::Known) CHECK(got.label == expected.label);
    }
}

TEST_CASE("raising theta_match never turns known into rejected") {
    Rng rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const auto pop = random_population(rng, 10);
        const auto code = random_code(rng);
        MatchConfig narrow;
        narrow.theta_match = 0.10f;
        narrow.theta_new = 0.60f;
        MatchConfig wide = narrow;
        wide.theta_match = 0.35f;
        auto t1 = Fplt::seed_population(pop, narrow);
        auto t2 = Fplt::seed_population(pop, wide);
        const auto d1 = t1.classify(fingerprint_with_code(code));
        const auto d2 = t2.classify(fingerprint_with_code(code));
        if (d1.kind == MatchDecision::Kind::Known)
            CHECK(d2.kind == MatchDecision::Kind::Known);
    }
}

TEST_CASE("eviction removes exactly the least recently used entry") {
    Rng rng(13);
    MatchConfig cfg;
    auto table = Fplt::seed_population(random_population(rng, 76), cfg);
    REQUIRE(table.entries().size() == table.entry_capacity());

    // touch label 0 so it is fresh, leaving label 1 as the LRU
    const auto touched = table.classify(fingerprint_with_code(table.entries()[0].code));
    REQUIRE(touched.kind == MatchDecision::Kind::Known);

    fp::Code far{};
    far.fill(255);
    bool unique = true;
    for (const auto& e : table.entries())
        if (fp::code_distance(far, e.code) <= cfg.theta_new) unique = false;
    REQUIRE(unique);  // guarantees an insertion
    const auto before = table.entries().size();
    const auto d = table.classify(fingerprint_with_code(far));
    CHECK(d.kind == MatchDecision::Kind::New);
    CHECK(table.entries().size() == before);  // one in, one out
    bool label1_present = false;
    for (const auto& e : table.entries())
        if (e.label == 1) label1_present = true;
    CHECK(!label1_present);  // the untouched oldest entry was evicted
}

TEST_CASE("budget invariant holds through a classify stress run") {
    Rng rng(14);
    auto table = Fplt::seed_population(random_population(rng, 40), MatchConfig{});
    table.train_detectors(16, 15);
    for (int i = 0; i < 2000; ++i) {
        table.classify(fingerprint_with_code(random_code(rng)));
        CHECK(table.serialized_bits() <= table.config().budget_bits);
    }
    CHECK(table.serialize().size() <= 4096);
}

TEST_CASE("serialize round-trips the exact table") {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        auto table =
            Fplt::seed_population(random_population(rng, 1 + static_cast<int>(rng.below(60))),
                                  MatchConfig{});
        table.train_detectors(static_cast<int>(rng.below(20)), 500 + trial);
        for (int i = 0; i < 20; ++i)
            table.classify(fingerprint_with_code(random_code(rng)));
        const auto bytes = table.serialize();
        const auto back = Fplt::deserialize(bytes, table.config());
        CHECK(back == table);
        CHECK(back.serialize() == bytes);
    }
}

TEST_CASE("deserialization validates structure and invariants") {
    SUBCASE("bad magic") {
        std::vector<std::uint8_t> junk(16, 0);
        CHECK_THROWS_AS(Fplt::deserialize(junk, MatchConfig{}), integrity_error);
    }
    SUBCASE("size mismatch") {
        Fplt table{MatchConfig{}};
        auto bytes = table.serialize();
        bytes.push_back(0);
        CHECK_THROWS_AS(Fplt::deserialize(bytes, MatchConfig{}), integrity_error);
    }
    SUBCASE("a detector overlapping an entry is rejected") {
        // craft: entry code X and detector at the same code
        Rng rng(17);
        auto table = Fplt::seed_population(random_population(rng, 1), MatchConfig{});
        auto bytes = table.serialize();
        // append a detector equal to the entry code with radius byte 26
        bytes[8] = 1;  // detector_count low byte
        for (int i = 0; i < 33; ++i) bytes.push_back(bytes[16 + i]);
        bytes.push_back(26);
        CHECK_THROWS_AS(Fplt::deserialize(bytes, MatchConfig{}), integrity_error);
    }
}

TEST_CASE("config validation") {
    MatchConfig cfg;
    cfg.theta_new = 0.1f;  // below theta_match
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = MatchConfig{};
    cfg.r_det = 1.5f;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = MatchConfig{};
    cfg.detector_reserve = 1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_SUITE_END();
