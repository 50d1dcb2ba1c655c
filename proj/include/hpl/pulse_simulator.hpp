#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "hpl/analytic_oracle.hpp"
#include "hpl/records.hpp"

namespace hpl {

/// Pulses per random stream. Fixed so results do not depend on the number
/// of workers.
inline constexpr std::uint64_t kChunkPulses = 65536;

struct SimConfig {
    ExperimentModel model;
    std::uint64_t pulses = 10'000'000;
    double rep_rate = 41e6;      ///< Hz
    double gate_window = 0.5e-9; ///< s
    std::uint64_t seed = 0;
    bool emit_tags = false;
    unsigned workers = 0;        ///< 0: HPL_THREADS, else hardware concurrency

    void validate() const;

    std::uint64_t rep_period_ps() const;
    std::uint64_t gate_window_ps() const;
    /// Trigger time of pulse `index` in the emitted tag stream.
    std::uint64_t pulse_time_ps(std::uint64_t index) const;
};

/// Worker count from HPL_THREADS, falling back to hardware concurrency.
unsigned default_worker_count();

/// Monte Carlo of the full experiment, pulse by pulse.
CountRecord run_simulation(const SimConfig &config);

/// Tag channels written by emit_tag_stream.
struct TagChannels {
    static constexpr std::uint32_t trigger = 0;
    static constexpr std::uint32_t idler = 1;
    static constexpr std::uint32_t s1 = 2;
    static constexpr std::uint32_t s2 = 3;
};

using TagSink = std::function<void(const TimeTag &)>;

/// Replays the same pulses as run_simulation and reports one trigger tag per
/// pulse plus one tag per click, in timestamp order. Returns the number of
/// tags written. Requires config.emit_tags.
std::uint64_t emit_tag_stream(const SimConfig &config, const TagSink &sink);
/// Writes the text tag format (`channel,timestamp_ps` lines).
std::uint64_t emit_tag_stream(const SimConfig &config, std::ostream &out);

} // namespace hpl
