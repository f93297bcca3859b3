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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zydeco/fingerprint.hpp"

namespace zydeco::match {

/// Serialized sizes are fixed by layout: 16-byte header, 40-byte entries
/// (33 code + 1 label + 2 hit count + 4 last used), 34-byte detectors
/// (33 code + 1 radius).
inline constexpr int kHeaderBits = 128;
inline constexpr int kEntryBits = 320;
inline constexpr int kDetectorBits = 272;

struct MatchConfig {
    float theta_match = 0.15f;     ///< known at or under this distance
    float theta_new = 0.30f;       ///< insert as new strictly above this
    float r_det = 0.10f;           ///< detector radius / censoring distance
    std::uint32_t budget_bits = 32768;
    double detector_reserve = 0.25;  ///< budget share reserved for detectors

    void validate() const;
};

struct FpltEntry {
    fp::Code code{};
    std::uint8_t label = 0;
    std::uint16_t hit_count = 0;
    std::uint32_t last_used = 0;

    friend bool operator==(const FpltEntry&, const FpltEntry&) = default;
};

struct Detector {
    fp::Code code{};
    std::uint8_t radius = 0;  ///< quantized on [0,1]

    friend bool operator==(const Detector&, const Detector&) = default;
};

struct MatchDecision {
    enum class Kind { Known, New, Rejected };
    Kind kind = Kind::Rejected;
    std::uint8_t label = 0;            ///< valid for Known and New
    std::optional<float> distance;     ///< to the nearest entry; absent when
                                       ///< rejected by a detector or the table
                                       ///< was empty
};

/// The capacity-bounded fingerprint lookup table with its
/// negative-selection detector set. Serialized size never exceeds
/// budget_bits; detectors never match a stored entry. Single writer:
/// classify mutates (hits, inserts, evictions) and must not be interleaved.
class Fplt {
public:
    explicit Fplt(MatchConfig cfg = {});

    /// Pre-loads one entry per labeled fingerprint. Throws capacity_error
    /// (naming required vs available bits) when they do not fit.
    static Fplt seed_population(std::span<const std::pair<std::uint8_t, fp::Fingerprint>> labeled,
                                MatchConfig cfg = {});

    /// Negative selection: appends up to `count` random detector codes,
    /// discarding candidates within r_det of any stored entry, until the
    /// count or the detector budget is reached. Deterministic per seed.
    /// Returns the number of detectors actually added.
    int train_detectors(int count, std::uint64_t seed);

    /// Detector match -> Rejected; else nearest entry by normalized
    /// Euclidean distance (ties to the lowest label): d <= theta_match ->
    /// Known (hit counters updated); d > theta_new -> inserted as a fresh
    /// label (evicting the least recently used entry at capacity) -> New;
    /// otherwise the ambiguous band -> Rejected.
    MatchDecision classify(const fp::Fingerprint& f);

    /// Canonical fixed-layout byte string (little-endian scalars).
    std::vector<std::uint8_t> serialize() const;

    /// Parses and validates a serialized table (budget, self-tolerance).
    static Fplt deserialize(std::span<const std::uint8_t> bytes, MatchConfig cfg = {});

    const std::vector<FpltEntry>& entries() const { return entries_; }
    const std::vector<Detector>& detectors() const { return detectors_; }
    const MatchConfig& config() const { return cfg_; }

    std::size_t entry_bits() const { return entries_.size() * kEntryBits; }
    std::size_t detector_bits() const { return detectors_.size() * kDetectorBits; }
    std::size_t serialized_bits() const { return kHeaderBits + entry_bits() + detector_bits(); }

    std::size_t entry_capacity() const;
    std::size_t detector_capacity() const;

    friend bool operator==(const Fplt& a, const Fplt& b) {
        return a.entries_ == b.entries_ && a.detectors_ == b.detectors_;
    }

private:
    void check_budget() const;

    MatchConfig cfg_;
    std::vector<FpltEntry> entries_;
    std::vector<Detector> detectors_;
    std::uint32_t clock_ = 0;
    std::uint32_t next_label_ = 0;
};

/// Detector radius byte as the matcher sees it, back on [0,1].
inline float detector_radius_value(std::uint8_t radius) {
    return static_cast<float>(radius) / 255.0f;
}

}  // namespace zydeco::match
