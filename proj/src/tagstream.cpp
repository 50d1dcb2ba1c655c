#include "hpl/tagstream.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "hpl/errors.hpp"

namespace hpl {
namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <class T>
bool parse_uint(std::string_view field, T &out) {
    field = trim(field);
    if (field.empty())
        return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

unsigned role_bit(Role r) {
    switch (r) {
    case Role::idler: return kIdlerBit;
    case Role::s1: return kSignal1Bit;
    case Role::s2: return kSignal2Bit;
    default: return 0;
    }
}

/// Accumulates per-slot click masks from tags that arrive in slot order.
class SlotTally {
  public:
    void add(std::uint64_t slot, unsigned bit) {
        if (open_ && slot != slot_)
            flush();
        slot_ = slot;
        open_ = true;
        mask_ |= bit;
    }

    CountRecord finish(std::uint64_t pulses) {
        if (open_)
            flush();
        patterns_[0] = pulses - occupied_;
        return CountRecord::from_patterns(patterns_);
    }

  private:
    void flush() {
        if (mask_ != 0) {
            ++patterns_[mask_];
            ++occupied_;
        }
        mask_ = 0;
        open_ = false;
    }

    PatternCounts patterns_{};
    std::uint64_t occupied_ = 0;
    std::uint64_t slot_ = 0;
    unsigned mask_ = 0;
    bool open_ = false;
};

/// Lower edge inclusive, upper edge exclusive: -w/2 <= dt < w/2.
bool in_gate(std::int64_t dt, std::uint64_t window) {
    const __int128 twice = static_cast<__int128>(dt) * 2;
    return twice >= -static_cast<__int128>(window) && twice < static_cast<__int128>(window);
}

std::optional<unsigned> signal_bit(const TimeTag &tag, const GateConfig &gate) {
    const auto role = gate.channels.role_of(tag.channel);
    if (!role) {
        if (gate.unknown_channels == UnknownChannelPolicy::error)
            throw DomainError("gate_and_count: unknown channel " + std::to_string(tag.channel));
        return std::nullopt;
    }
    if (*role == Role::trigger)
        return std::nullopt;
    return role_bit(*role);
}

CountRecord gate_explicit(std::span<const TimeTag> tags, const GateConfig &gate) {
    std::vector<std::uint64_t> triggers;
    for (const auto &tag : tags)
        if (gate.channels.role_of(tag.channel) == Role::trigger)
            triggers.push_back(tag.timestamp_ps);
    if (triggers.empty())
        throw DomainError("gate_and_count: zero triggers in explicit-trigger mode");

    SlotTally tally;
    std::size_t j = 0;  // last trigger at or before the tag, if any
    for (const auto &tag : tags) {
        const auto bit = signal_bit(tag, gate);
        if (!bit)
            continue;
        const std::uint64_t t = tag.timestamp_ps;
        while (j + 1 < triggers.size() && triggers[j + 1] <= t)
            ++j;
        std::size_t slot = j;
        if (triggers[j] <= t && j + 1 < triggers.size()) {
            // Equidistant tags go to the later slot, where they sit on the
            // inclusive lower edge.
            if (triggers[j + 1] - t <= t - triggers[j])
                slot = j + 1;
        }
        const auto dt = static_cast<std::int64_t>(t - triggers[slot]);
        if (in_gate(dt, gate.gate_window_ps))
            tally.add(slot, *bit);
    }
    return tally.finish(triggers.size());
}

CountRecord gate_fixed_clock(std::span<const TimeTag> tags, const GateConfig &gate) {
    if (tags.empty())
        return {};
    const std::uint64_t phase = tags.front().timestamp_ps;
    const auto period = static_cast<unsigned __int128>(gate.rep_period_ps);
    const auto slot_of = [&](std::uint64_t t) {
        const unsigned __int128 d = t - phase;
        return static_cast<std::uint64_t>((2 * d + period) / (2 * period));
    };

    SlotTally tally;
    for (const auto &tag : tags) {
        const auto bit = signal_bit(tag, gate);
        if (!bit)
            continue;
        const std::uint64_t slot = slot_of(tag.timestamp_ps);
        const auto centre = static_cast<__int128>(phase) + static_cast<__int128>(slot) * gate.rep_period_ps;
        const auto dt = static_cast<std::int64_t>(static_cast<__int128>(tag.timestamp_ps) - centre);
        if (in_gate(dt, gate.gate_window_ps))
            tally.add(slot, *bit);
    }
    return tally.finish(slot_of(tags.back().timestamp_ps) + 1);
}

} // namespace

std::optional<Role> ChannelMap::role_of(std::uint32_t channel) const noexcept {
    if (channel == trigger) return Role::trigger;
    if (channel == idler) return Role::idler;
    if (channel == s1) return Role::s1;
    if (channel == s2) return Role::s2;
    return std::nullopt;
}

GateConfig GateConfig::from_rates(double rep_rate_hz, double gate_window_s) {
    if (!(rep_rate_hz > 0.0) || !(gate_window_s > 0.0))
        throw DomainError("GateConfig: rates must be positive");
    GateConfig g;
    g.rep_period_ps = static_cast<std::uint64_t>(std::llround(1e12 / rep_rate_hz));
    g.gate_window_ps = static_cast<std::uint64_t>(std::llround(gate_window_s * 1e12));
    g.validate();
    return g;
}

void GateConfig::validate() const {
    if (rep_period_ps == 0)
        throw DomainError("GateConfig: rep_period_ps must be positive");
    if (gate_window_ps > rep_period_ps)
        throw DomainError("GateConfig: gate_window_ps must not exceed rep_period_ps");
    const std::array ids{channels.trigger, channels.idler, channels.s1, channels.s2};
    for (std::size_t a = 0; a < ids.size(); ++a)
        for (std::size_t b = a + 1; b < ids.size(); ++b)
            if (ids[a] == ids[b])
                throw DomainError("GateConfig: channel map assigns one channel to two roles");
}

ParsedTags parse_tags(std::istream &in, const ParseOptions &options) {
    ParsedTags out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(line_no, "expected 2 comma-separated fields");
        TimeTag tag;
        if (!parse_uint(text.substr(0, comma), tag.channel))
            throw ParseError(line_no, "invalid channel '" + std::string(text.substr(0, comma)) + "'");
        if (!parse_uint(text.substr(comma + 1), tag.timestamp_ps))
            throw ParseError(line_no,
                             "invalid timestamp '" + std::string(text.substr(comma + 1)) + "'");
        if (options.channels && !options.channels->role_of(tag.channel)) {
            if (options.unknown_channels == UnknownChannelPolicy::error)
                throw ParseError(line_no, "unknown channel " + std::to_string(tag.channel));
            ++out.skipped_unknown;
            continue;
        }
        out.tags.push_back(tag);
    }
    if (in.bad())
        throw std::runtime_error("parse_tags: read failure");
    return out;
}

CountRecord gate_and_count(std::span<const TimeTag> tags, const GateConfig &gate) {
    gate.validate();
    for (std::size_t k = 1; k < tags.size(); ++k) {
        if (tags[k].timestamp_ps < tags[k - 1].timestamp_ps)
            throw DomainError("gate_and_count: tags not sorted by timestamp (at index " +
                              std::to_string(k) + ")");
    }
    return gate.trigger_mode == TriggerMode::explicit_trigger ? gate_explicit(tags, gate)
                                                              : gate_fixed_clock(tags, gate);
}

void write_count_record(std::ostream &out, const CountRecord &r) {
    out << "key,value\n"
        << "pulses," << r.pulses << "\n"
        << "s_i," << r.s_i << "\n"
        << "s_s1," << r.s_s1 << "\n"
        << "s_s2," << r.s_s2 << "\n"
        << "c_is," << r.c_is << "\n"
        << "c_is1," << r.c_is1 << "\n"
        << "c_is2," << r.c_is2 << "\n"
        << "c_s1s2," << r.c_s1s2 << "\n"
        << "c_is1s2," << r.c_is1s2 << "\n";
}

CountRecord read_count_record(std::istream &in) {
    CountRecord r;
    const std::array<std::pair<std::string_view, std::uint64_t CountRecord::*>, 9> fields{{
        {"pulses", &CountRecord::pulses},
        {"s_i", &CountRecord::s_i},
        {"s_s1", &CountRecord::s_s1},
        {"s_s2", &CountRecord::s_s2},
        {"c_is", &CountRecord::c_is},
        {"c_is1", &CountRecord::c_is1},
        {"c_is2", &CountRecord::c_is2},
        {"c_s1s2", &CountRecord::c_s1s2},
        {"c_is1s2", &CountRecord::c_is1s2},
    }};
    std::array<bool, 9> seen{};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#' || text == "key,value")
            continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos)
            throw ParseError(line_no, "expected key,value");
        const auto key = trim(text.substr(0, comma));
        std::size_t idx = 0;
        while (idx < fields.size() && fields[idx].first != key)
            ++idx;
        if (idx == fields.size())
            throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
        if (!parse_uint(text.substr(comma + 1), r.*fields[idx].second))
            throw ParseError(line_no, "invalid count for '" + std::string(key) + "'");
        seen[idx] = true;
    }
    for (std::size_t k = 0; k < fields.size(); ++k)
        if (!seen[k])
            throw ParseError(line_no, "missing key '" + std::string(fields[k].first) + "'");
    return r;
}

} // namespace hpl
