#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hpl/random.hpp"

namespace hpl {

/// Default bound on the probability mass omitted by automatic truncation.
inline constexpr double kTruncationTolerance = 1e-12;
/// Largest Fock cutoff chosen automatically.
inline constexpr int kMaxAutoCutoff = 512;

/// Twin-beam PDC source: `mode_count` independent Schmidt modes sharing the
/// mean photon number per pulse. Signal and idler carry identical photon
/// numbers in every mode.
class TwinBeamState {
  public:
    TwinBeamState(double mean_total, int mode_count);

    double mean_total() const noexcept { return mean_total_; }
    int mode_count() const noexcept { return mode_count_; }
    double mode_mean() const noexcept { return mean_total_ / mode_count_; }

  private:
    double mean_total_;
    int mode_count_;
};

/// Photon-number probabilities P(0..n_max) plus the mass beyond n_max.
class PhotonNumberDistribution {
  public:
    PhotonNumberDistribution(std::vector<double> probs, double tail_bound);

    std::span<const double> probs() const noexcept { return probs_; }
    double operator[](std::size_t n) const { return probs_[n]; }
    int n_max() const noexcept { return static_cast<int>(probs_.size()) - 1; }
    double tail_bound() const noexcept { return tail_bound_; }

    double total() const noexcept;
    double mean() const noexcept;
    /// <n(n-1)...(n-order+1)>
    double factorial_moment(int order) const noexcept;
    /// <(-1)^n>
    double parity() const noexcept;

  private:
    std::vector<double> probs_;
    double tail_bound_;
};

/// Single-mode thermal law P(n) = m^n / (1+m)^(n+1), truncated at n_max.
PhotonNumberDistribution thermal_pmf(double mean, int n_max);

/// Total photon number of a K-mode twin beam: negative binomial with K
/// trials and per-mode mean mean_total / K.
PhotonNumberDistribution multimode_total_pmf(const TwinBeamState &state, int n_max);
/// Same, with the cutoff chosen so that the tail is below `tolerance`.
PhotonNumberDistribution multimode_total_pmf(const TwinBeamState &state);

/// Exact mass beyond n_max of the K-mode negative binomial.
double multimode_tail(const TwinBeamState &state, int n_max);

/// Smallest cutoff with tail <= tolerance; throws TruncationError if that
/// needs more than `cap` levels.
int certified_cutoff(const TwinBeamState &state, double tolerance = kTruncationTolerance,
                     int cap = kMaxAutoCutoff);

/// Inverse-CDF sampler of the geometric (thermal) law.
class ThermalSampler {
  public:
    explicit ThermalSampler(double mean);

    std::uint32_t operator()(CounterStream &rng) const noexcept;

  private:
    double lambda_;
    double inv_log_lambda_;
};

/// One draw of per-mode photon numbers. The same vector describes signal
/// and idler.
std::vector<std::uint32_t> sample_mode_occupations(const TwinBeamState &state, CounterStream &rng);

/// g2 = 1 + 1/K of one marginal beam.
double unconditional_g2_theory(const TwinBeamState &state);
/// Real-valued K, for analysis of measured (fractional) Schmidt numbers.
double unconditional_g2_theory(double schmidt_number);

} // namespace hpl
