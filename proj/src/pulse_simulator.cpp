#include "hpl/pulse_simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hpl/errors.hpp"
#include "hpl/random.hpp"

namespace hpl {
namespace {

constexpr std::uint64_t kPhysicsDomain = 0;
constexpr std::uint64_t kTimingDomain = 1;

/// Draws one pulse: pair generation, per-photon thinning and routing, dark
/// counts. Returns the ClickBit mask of channels that fired.
class PulseKernel {
  public:
    explicit PulseKernel(const ExperimentModel &m)
        : sampler_(m.source.mode_mean()), modes_(m.source.mode_count()), eta_i_(m.eta_idler),
          to_s1_(m.eta_signal * m.signal_split), eta_s_(m.eta_signal), dark_herald_(m.dark_prob),
          dark_signal_(m.dark_prob / 2.0) {}

    unsigned operator()(CounterStream &rng) const noexcept {
        std::uint64_t n = 0;
        for (int j = 0; j < modes_; ++j)
            n += sampler_(rng);

        unsigned mask = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            if (rng.uniform() < eta_i_) {
                mask |= kIdlerBit;
                break;
            }
        }
        for (std::uint64_t k = 0; k < n; ++k) {
            const double u = rng.uniform();
            if (u < to_s1_)
                mask |= kSignal1Bit;
            else if (u < eta_s_)
                mask |= kSignal2Bit;
            if ((mask & (kSignal1Bit | kSignal2Bit)) == (kSignal1Bit | kSignal2Bit))
                break;
        }
        if (dark_herald_ > 0.0) {
            if (rng.uniform() < dark_herald_)
                mask |= kIdlerBit;
            if (rng.uniform() < dark_signal_)
                mask |= kSignal1Bit;
            if (rng.uniform() < dark_signal_)
                mask |= kSignal2Bit;
        }
        return mask;
    }

  private:
    ThermalSampler sampler_;
    int modes_;
    double eta_i_;
    double to_s1_;
    double eta_s_;
    double dark_herald_;
    double dark_signal_;
};

std::uint64_t chunk_count(std::uint64_t pulses) { return (pulses + kChunkPulses - 1) / kChunkPulses; }

std::uint64_t chunk_size(std::uint64_t pulses, std::uint64_t chunk) {
    return std::min(kChunkPulses, pulses - chunk * kChunkPulses);
}

template <class Visit>
void run_chunk(const PulseKernel &kernel, std::uint64_t seed, std::uint64_t pulses,
               std::uint64_t chunk, Visit &&visit) {
    CounterStream rng(seed, chunk, kPhysicsDomain);
    const std::uint64_t first = chunk * kChunkPulses;
    const std::uint64_t count = chunk_size(pulses, chunk);
    for (std::uint64_t k = 0; k < count; ++k)
        visit(first + k, kernel(rng));
}

} // namespace

void SimConfig::validate() const {
    model.validate();
    if (pulses < 1)
        throw DomainError("SimConfig: pulses must be >= 1");
    if (!(rep_rate > 0.0) || !std::isfinite(rep_rate))
        throw DomainError("SimConfig: rep_rate must be positive");
    if (!(gate_window > 0.0))
        throw DomainError("SimConfig: gate_window must be positive");
    if (!(gate_window * rep_rate < 1.0))
        throw DomainError("SimConfig: gate_window * rep_rate must be < 1 (gates overlap)");
    if (emit_tags) {
        if (gate_window_ps() == 0 || gate_window_ps() >= rep_period_ps())
            throw DomainError("SimConfig: gate window must be between 1 ps and the pulse period");
        const auto limit = std::numeric_limits<std::uint64_t>::max() / rep_period_ps();
        if (pulses >= limit - 1)
            throw DomainError("SimConfig: too many pulses for 64-bit picosecond timestamps");
    }
}

std::uint64_t SimConfig::rep_period_ps() const {
    return static_cast<std::uint64_t>(std::llround(1e12 / rep_rate));
}

std::uint64_t SimConfig::gate_window_ps() const {
    return static_cast<std::uint64_t>(std::llround(gate_window * 1e12));
}

std::uint64_t SimConfig::pulse_time_ps(std::uint64_t index) const {
    return (index + 1) * rep_period_ps();
}

unsigned default_worker_count() {
    if (const char *env = std::getenv("HPL_THREADS")) {
        unsigned value = 0;
        const auto *end = env + std::char_traits<char>::length(env);
        const auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc() && ptr == end && value > 0)
            return value;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

CountRecord run_simulation(const SimConfig &config) {
    config.validate();
    const PulseKernel kernel(config.model);
    const std::uint64_t chunks = chunk_count(config.pulses);
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(
        chunks, config.workers > 0 ? config.workers : default_worker_count()));

    std::vector<PatternCounts> partial(workers, PatternCounts{});
    std::atomic<std::uint64_t> next{0};
    const auto work = [&](unsigned w) {
        PatternCounts &acc = partial[w];
        for (std::uint64_t c = next++; c < chunks; c = next++)
            run_chunk(kernel, config.seed, config.pulses, c,
                      [&acc](std::uint64_t, unsigned mask) { ++acc[mask]; });
    };

    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
    }

    // Integer sums commute, so the merge order does not matter.
    CountRecord total;
    for (const auto &p : partial)
        total += CountRecord::from_patterns(p);
    return total;
}

std::uint64_t emit_tag_stream(const SimConfig &config, const TagSink &sink) {
    if (!config.emit_tags)
        throw DomainError("emit_tag_stream: SimConfig.emit_tags is false");
    config.validate();
    const PulseKernel kernel(config.model);
    const std::uint64_t window = config.gate_window_ps();
    const std::uint64_t below = window / 2;  // offsets span [-floor(w/2), w - floor(w/2))

    std::uint64_t written = 0;
    std::vector<TimeTag> pulse_tags;
    for (std::uint64_t c = 0; c < chunk_count(config.pulses); ++c) {
        CounterStream timing(config.seed, c, kTimingDomain);
        run_chunk(kernel, config.seed, config.pulses, c, [&](std::uint64_t index, unsigned mask) {
            const std::uint64_t t = config.pulse_time_ps(index);
            pulse_tags.clear();
            pulse_tags.push_back({TagChannels::trigger, t});
            const auto jittered = [&] {
                const auto offset = static_cast<std::uint64_t>(timing.uniform() * window);
                return t - below + std::min(offset, window - 1);
            };
            if (mask & kIdlerBit)
                pulse_tags.push_back({TagChannels::idler, jittered()});
            if (mask & kSignal1Bit)
                pulse_tags.push_back({TagChannels::s1, jittered()});
            if (mask & kSignal2Bit)
                pulse_tags.push_back({TagChannels::s2, jittered()});
            std::sort(pulse_tags.begin(), pulse_tags.end(), [](const TimeTag &a, const TimeTag &b) {
                return a.timestamp_ps != b.timestamp_ps ? a.timestamp_ps < b.timestamp_ps
                                                        : a.channel < b.channel;
            });
            for (const auto &tag : pulse_tags)
                sink(tag);
            written += pulse_tags.size();
        });
    }
    return written;
}

std::uint64_t emit_tag_stream(const SimConfig &config, std::ostream &out) {
    out << "# hpl tag stream: channel,timestamp_ps\n"
        << "# rep_period_ps=" << config.rep_period_ps() << "\n"
        << "# gate_window_ps=" << config.gate_window_ps() << "\n";
    char line[48];
    const auto n = emit_tag_stream(config, [&](const TimeTag &tag) {
        char *p = std::to_chars(line, line + sizeof line, tag.channel).ptr;
        *p++ = ',';
        p = std::to_chars(p, line + sizeof line, tag.timestamp_ps).ptr;
        *p++ = '\n';
        out.write(line, p - line);
    });
    if (!out)
        throw std::runtime_error("emit_tag_stream: write failed");
    return n;
}

} // namespace hpl
