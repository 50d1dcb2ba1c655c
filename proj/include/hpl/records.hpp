#pragma once

#include <array>
#include <cstdint>

namespace hpl {

/// Detector roles in a pulse's click pattern (bit positions).
enum ClickBit : unsigned { kIdlerBit = 1u << 0, kSignal1Bit = 1u << 1, kSignal2Bit = 1u << 2 };

/// Number of pulses for each of the 8 mutually exclusive click patterns,
/// indexed by the ClickBit mask.
using PatternCounts = std::array<std::uint64_t, 8>;

/// Event tallies of one acquisition. Singles and coincidences count pulses,
/// not photons: a channel contributes at most once per gate.
struct CountRecord {
    std::uint64_t pulses = 0;
    std::uint64_t s_i = 0;
    std::uint64_t s_s1 = 0;
    std::uint64_t s_s2 = 0;
    std::uint64_t c_is = 0;  ///< idler AND (s1 OR s2)
    std::uint64_t c_is1 = 0;
    std::uint64_t c_is2 = 0;
    std::uint64_t c_s1s2 = 0;
    std::uint64_t c_is1s2 = 0;

    /// Signal singles with the two split channels OR-ed together.
    std::uint64_t s_s() const noexcept { return s_s1 + s_s2 - c_s1s2; }

    /// Field-wise sum; throws OverflowError instead of wrapping.
    CountRecord &operator+=(const CountRecord &other);

    friend bool operator==(const CountRecord &, const CountRecord &) = default;

    static CountRecord from_patterns(const PatternCounts &patterns);
    /// Inverse of from_patterns; throws DomainError for inconsistent tallies.
    PatternCounts patterns() const;
    /// Checks the subset inequalities between singles and coincidences.
    bool consistent() const noexcept;
};

/// One TDC event.
struct TimeTag {
    std::uint32_t channel = 0;
    std::uint64_t timestamp_ps = 0;

    friend bool operator==(const TimeTag &, const TimeTag &) = default;
};

} // namespace hpl
