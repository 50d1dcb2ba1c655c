#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hpl/records.hpp"

namespace hpl {

enum class Role { trigger, idler, s1, s2 };

struct ChannelMap {
    std::uint32_t trigger = 0;
    std::uint32_t idler = 1;
    std::uint32_t s1 = 2;
    std::uint32_t s2 = 3;

    std::optional<Role> role_of(std::uint32_t channel) const noexcept;
};

enum class TriggerMode {
    explicit_trigger, ///< slots are centred on trigger tags
    fixed_clock,      ///< slots every rep_period_ps, phase from the first tag
};

enum class UnknownChannelPolicy { skip, error };

struct GateConfig {
    std::uint64_t rep_period_ps = 24390;
    std::uint64_t gate_window_ps = 500;
    ChannelMap channels;
    TriggerMode trigger_mode = TriggerMode::explicit_trigger;
    UnknownChannelPolicy unknown_channels = UnknownChannelPolicy::error;

    static GateConfig from_rates(double rep_rate_hz, double gate_window_s);
    void validate() const;
};

struct ParseOptions {
    /// When set, channels outside the map are skipped or rejected.
    std::optional<ChannelMap> channels;
    UnknownChannelPolicy unknown_channels = UnknownChannelPolicy::error;
};

struct ParsedTags {
    std::vector<TimeTag> tags;
    std::uint64_t skipped_unknown = 0;
};

/// Reads `channel,timestamp_ps` lines; `#` lines and blank lines are skipped.
/// Throws ParseError naming the 1-based line on malformed input.
ParsedTags parse_tags(std::istream &in, const ParseOptions &options = {});

/// Assigns tags to pulse slots, keeps those within [-w/2, +w/2) of the slot
/// centre and tallies the per-slot click pattern. Several tags of one
/// channel in one slot count once.
CountRecord gate_and_count(std::span<const TimeTag> tags, const GateConfig &gate);

/// `key,value` lines with keys
/// pulses,s_i,s_s1,s_s2,c_is,c_is1,c_is2,c_s1s2,c_is1s2 (with a header row).
void write_count_record(std::ostream &out, const CountRecord &record);
CountRecord read_count_record(std::istream &in);

} // namespace hpl
