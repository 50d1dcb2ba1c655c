#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hpl {

/// Philox4x64-10 counter-based block cipher (Salmon et al., SC'11).
/// Output matches the Random123 reference and numpy.random.Philox.
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// A reproducible random stream addressed by (seed, stream, domain).
///
/// The key is (seed, domain) and the counter is (block, stream, 0, 0), so
/// every stream is an independent, non-overlapping slice of the Philox
/// sequence. Satisfies UniformRandomBitGenerator.
class CounterStream {
  public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0) noexcept
        : key_{seed, domain}, ctr_{0, stream, 0, 0} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            buf_ = Philox4x64::block(ctr_, key_);
            ++ctr_[0];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    Philox4x64::Key key_;
    Philox4x64::Counter ctr_;
    Philox4x64::Counter buf_{};
    int pos_ = 4;
};

} // namespace hpl
