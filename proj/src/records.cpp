#include "hpl/records.hpp"

#include <algorithm>

#include "hpl/errors.hpp"

namespace hpl {
namespace {

void checked_add(std::uint64_t &acc, std::uint64_t v) {
    if (__builtin_add_overflow(acc, v, &acc))
        throw OverflowError("CountRecord: tally overflow");
}

} // namespace

CountRecord &CountRecord::operator+=(const CountRecord &o) {
    checked_add(pulses, o.pulses);
    checked_add(s_i, o.s_i);
    checked_add(s_s1, o.s_s1);
    checked_add(s_s2, o.s_s2);
    checked_add(c_is, o.c_is);
    checked_add(c_is1, o.c_is1);
    checked_add(c_is2, o.c_is2);
    checked_add(c_s1s2, o.c_s1s2);
    checked_add(c_is1s2, o.c_is1s2);
    return *this;
}

CountRecord CountRecord::from_patterns(const PatternCounts &p) {
    CountRecord r;
    for (unsigned mask = 0; mask < 8; ++mask) {
        const std::uint64_t n = p[mask];
        const bool i = mask & kIdlerBit, s1 = mask & kSignal1Bit, s2 = mask & kSignal2Bit;
        checked_add(r.pulses, n);
        if (i) checked_add(r.s_i, n);
        if (s1) checked_add(r.s_s1, n);
        if (s2) checked_add(r.s_s2, n);
        if (i && (s1 || s2)) checked_add(r.c_is, n);
        if (i && s1) checked_add(r.c_is1, n);
        if (i && s2) checked_add(r.c_is2, n);
        if (s1 && s2) checked_add(r.c_s1s2, n);
        if (i && s1 && s2) checked_add(r.c_is1s2, n);
    }
    return r;
}

PatternCounts CountRecord::patterns() const {
    // Inclusion-exclusion from the "all of these clicked" tallies.
    const auto all = [this](unsigned mask) -> std::int64_t {
        switch (mask) {
        case 0: return static_cast<std::int64_t>(pulses);
        case kIdlerBit: return static_cast<std::int64_t>(s_i);
        case kSignal1Bit: return static_cast<std::int64_t>(s_s1);
        case kSignal2Bit: return static_cast<std::int64_t>(s_s2);
        case kIdlerBit | kSignal1Bit: return static_cast<std::int64_t>(c_is1);
        case kIdlerBit | kSignal2Bit: return static_cast<std::int64_t>(c_is2);
        case kSignal1Bit | kSignal2Bit: return static_cast<std::int64_t>(c_s1s2);
        default: return static_cast<std::int64_t>(c_is1s2);
        }
    };
    PatternCounts out{};
    for (unsigned mask = 0; mask < 8; ++mask) {
        std::int64_t acc = 0;
        for (unsigned super = mask; super < 8; ++super) {
            if ((super & mask) != mask)
                continue;
            const int extra = __builtin_popcount(super ^ mask);
            acc += (extra % 2 == 0 ? 1 : -1) * all(super);
        }
        if (acc < 0)
            throw DomainError("CountRecord: tallies are not consistent with any click patterns");
        out[mask] = static_cast<std::uint64_t>(acc);
    }
    if (c_is != c_is1 + c_is2 - c_is1s2)
        throw DomainError("CountRecord: c_is disagrees with c_is1 + c_is2 - c_is1s2");
    return out;
}

bool CountRecord::consistent() const noexcept {
    const bool pairwise = c_is1 <= std::min(s_i, s_s1) && c_is2 <= std::min(s_i, s_s2) &&
                          c_s1s2 <= std::min(s_s1, s_s2) && c_is <= s_i && c_is <= s_s() &&
                          s_i <= pulses && s_s1 <= pulses && s_s2 <= pulses;
    const bool triple = c_is1s2 <= std::min({c_is1, c_is2, c_s1s2});
    if (!pairwise || !triple)
        return false;
    try {
        (void)patterns();
    } catch (const DomainError &) {
        return false;
    }
    return true;
}

} // namespace hpl
