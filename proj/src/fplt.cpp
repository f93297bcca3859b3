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

#include "zydeco/fplt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zydeco/errors.hpp"
#include "zydeco/rng.hpp"

namespace zydeco::match {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint8_t quantize_radius(float r) {
    const double q = std::nearbyint(std::clamp(static_cast<double>(r), 0.0, 1.0) * 255.0);
    return static_cast<std::uint8_t>(q);
}

}  // namespace

void MatchConfig::validate() const {
    if (!(theta_match >= 0.0f)) throw config_error("match.theta_match must be >= 0");
    if (theta_new < theta_match)
        throw config_error("match.theta_new must be >= match.theta_match");
    if (!(r_det >= 0.0f && r_det <= 1.0f)) throw config_error("match.r_det must be in [0,1]");
    if (budget_bits < kHeaderBits) throw config_error("match.budget_bits below the header size");
    if (detector_reserve < 0.0 || detector_reserve >= 1.0)
        throw config_error("match.detector_reserve must be in [0,1)");
}

Fplt::Fplt(MatchConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::size_t Fplt::entry_capacity() const {
    const double entry_budget = cfg_.budget_bits * (1.0 - cfg_.detector_reserve) - kHeaderBits;
    return entry_budget <= 0.0 ? 0 : static_cast<std::size_t>(entry_budget / kEntryBits);
}

std::size_t Fplt::detector_capacity() const {
    return static_cast<std::size_t>(cfg_.budget_bits * cfg_.detector_reserve / kDetectorBits);
}

void Fplt::check_budget() const {
    if (serialized_bits() > cfg_.budget_bits)
        throw integrity_error("fplt: serialized size " + std::to_string(serialized_bits()) +
                              " bits exceeds the budget of " + std::to_string(cfg_.budget_bits));
}

Fplt Fplt::seed_population(std::span<const std::pair<std::uint8_t, fp::Fingerprint>> labeled,
                           MatchConfig cfg) {
    Fplt table(cfg);
    const std::size_t required = labeled.size() * kEntryBits;
    const std::size_t available = table.entry_capacity() * kEntryBits;
    if (labeled.size() > table.entry_capacity()) {
        throw capacity_error("seed_population: " + std::to_string(required) +
                             " bits required for " + std::to_string(labeled.size()) +
                             " entries, " + std::to_string(available) + " bits available");
    }
    for (const auto& [label, fingerprint] : labeled) {
        FpltEntry e;
        e.code = fingerprint.code;
        e.label = label;
        e.hit_count = 0;
        e.last_used = table.clock_++;
        table.entries_.push_back(e);
        table.next_label_ = std::max<std::uint32_t>(table.next_label_, label + 1u);
    }
    table.check_budget();
    return table;
}

int Fplt::train_detectors(int count, std::uint64_t seed) {
    if (count < 0) throw config_error("train_detectors: count must be >= 0");
    Rng rng(seed);
    const std::uint8_t radius = quantize_radius(cfg_.r_det);
    const float radius_value = detector_radius_value(radius);
    const std::size_t cap = detector_capacity();

    int added = 0;
    // bounded candidate budget so a dense self set terminates the loop
    long attempts = static_cast<long>(count) * 64 + 1024;
    while (added < count && detectors_.size() < cap && attempts-- > 0) {
        Detector d;
        d.radius = radius;
        for (auto& byte : d.code) byte = static_cast<std::uint8_t>(rng.below(256));
        bool censored = false;
        for (const auto& e : entries_) {
            if (fp::code_distance(d.code, e.code) <= radius_value) {
                censored = true;
                break;
            }
        }
        if (censored) continue;
        detectors_.push_back(d);
        ++added;
    }
    check_budget();
    return added;
}

MatchDecision Fplt::classify(const fp::Fingerprint& f) {
    // 1. non-self detectors fire first
    for (const auto& d : detectors_) {
        if (fp::code_distance(f.code, d.code) <= detector_radius_value(d.radius)) {
            return {MatchDecision::Kind::Rejected, 0, std::nullopt};
        }
    }

    // 2. nearest stored entry; exact integer squared distances, ties to the
    //    lowest label
    std::size_t best = entries_.size();
    std::int64_t best_sq = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        std::int64_t sq = 0;
        for (int k = 0; k < fp::kFeatureCount; ++k) {
            const int d = static_cast<int>(f.code[static_cast<std::size_t>(k)]) -
                          static_cast<int>(entries_[i].code[static_cast<std::size_t>(k)]);
            sq += static_cast<std::int64_t>(d) * d;
        }
        if (best == entries_.size() || sq < best_sq ||
            (sq == best_sq && entries_[i].label < entries_[best].label)) {
            best = i;
            best_sq = sq;
        }
    }

    if (best == entries_.size()) {
        // empty table: first contact becomes the first fresh entry
        const auto label = static_cast<std::uint8_t>(next_label_++);
        entries_.push_back({f.code, label, 0, clock_++});
        check_budget();
        return {MatchDecision::Kind::New, label, std::nullopt};
    }

    const float dist =
        std::sqrt(static_cast<float>(best_sq) / (255.0f * 255.0f * fp::kFeatureCount));

    if (dist <= cfg_.theta_match) {
        auto& e = entries_[best];
        if (e.hit_count < 0xffff) ++e.hit_count;
        e.last_used = clock_++;
        return {MatchDecision::Kind::Known, e.label, dist};
    }

    if (dist > cfg_.theta_new) {
        if (entries_.size() >= entry_capacity()) {
            // evict exactly one entry: minimum last_used, ties to lowest label
            auto victim = std::min_element(entries_.begin(), entries_.end(),
                                           [](const FpltEntry& a, const FpltEntry& b) {
                                               return std::tie(a.last_used, a.label) <
                                                      std::tie(b.last_used, b.label);
                                           });
            entries_.erase(victim);
        }
        const auto label = static_cast<std::uint8_t>(next_label_++);
        entries_.push_back({f.code, label, 0, clock_++});
        check_budget();
        return {MatchDecision::Kind::New, label, dist};
    }

    return {MatchDecision::Kind::Rejected, 0, dist};  // ambiguous band
}

std::vector<std::uint8_t> Fplt::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(serialized_bits() / 8);
    out.insert(out.end(), {'F', 'P', 'L', 'T'});
    put_u16(out, 1);  // version
    put_u16(out, static_cast<std::uint16_t>(entries_.size()));
    put_u16(out, static_cast<std::uint16_t>(detectors_.size()));
    put_u16(out, 0);  // flags
    put_u32(out, 0);  // reserved
    for (const auto& e : entries_) {
        out.insert(out.end(), e.code.begin(), e.code.end());
        out.push_back(e.label);
        put_u16(out, e.hit_count);
        put_u32(out, e.last_used);
    }
    for (const auto& d : detectors_) {
        out.insert(out.end(), d.code.begin(), d.code.end());
        out.push_back(d.radius);
    }
    if (out.size() * 8 > cfg_.budget_bits)
        throw integrity_error("fplt: serialized form exceeds the bit budget");
    return out;
}

Fplt Fplt::deserialize(std::span<const std::uint8_t> bytes, MatchConfig cfg) {
    if (bytes.size() < 16 || bytes[0] != 'F' || bytes[1] != 'P' || bytes[2] != 'L' ||
        bytes[3] != 'T')
        throw integrity_error("fplt: bad magic");
    if (get_u16(bytes, 4) != 1) throw integrity_error("fplt: unsupported version");
    const std::size_t n_entries = get_u16(bytes, 6);
    const std::size_t n_detectors = get_u16(bytes, 8);
    const std::size_t expected = 16 + n_entries * 40 + n_detectors * 34;
    if (bytes.size() != expected)
        throw integrity_error("fplt: size mismatch, expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(bytes.size()));

    Fplt table(cfg);
    std::size_t at = 16;
    for (std::size_t i = 0; i < n_entries; ++i) {
        FpltEntry e;
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at), 33, e.code.begin());
        e.label = bytes[at + 33];
        e.hit_count = get_u16(bytes, at + 34);
        e.last_used = get_u32(bytes, at + 36);
        at += 40;
        table.clock_ = std::max(table.clock_, e.last_used + 1);
        table.next_label_ = std::max<std::uint32_t>(table.next_label_, e.label + 1u);
        table.entries_.push_back(e);
    }
    for (std::size_t i = 0; i < n_detectors; ++i) {
        Detector d;
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at), 33, d.code.begin());
        d.radius = bytes[at + 33];
        at += 34;
        table.detectors_.push_back(d);
    }
    table.check_budget();
    for (const auto& d : table.detectors_) {
        for (const auto& e : table.entries_) {
            if (fp::code_distance(d.code, e.code) <= detector_radius_value(d.radius))
                throw integrity_error("fplt: detector matches a stored entry");
        }
    }
    return table;
}

}  // namespace zydeco::match
