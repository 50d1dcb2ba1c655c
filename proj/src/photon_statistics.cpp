#include "hpl/photon_statistics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "hpl/errors.hpp"

namespace hpl {

TwinBeamState::TwinBeamState(double mean_total, int mode_count)
    : mean_total_(mean_total), mode_count_(mode_count) {
    if (!(mean_total >= 0.0) || !std::isfinite(mean_total))
        throw DomainError("TwinBeamState: mean_total must be finite and >= 0");
    if (mode_count < 1)
        throw DomainError("TwinBeamState: mode_count must be >= 1");
}

PhotonNumberDistribution::PhotonNumberDistribution(std::vector<double> probs, double tail_bound)
    : probs_(std::move(probs)), tail_bound_(tail_bound) {
    if (probs_.empty())
        throw DomainError("PhotonNumberDistribution: empty probability vector");
    if (!(tail_bound_ >= 0.0))
        throw DomainError("PhotonNumberDistribution: negative tail bound");
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("PhotonNumberDistribution: probability outside [0, 1]");
    }
}

double PhotonNumberDistribution::total() const noexcept {
    return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

double PhotonNumberDistribution::mean() const noexcept { return factorial_moment(1); }

double PhotonNumberDistribution::factorial_moment(int order) const noexcept {
    double acc = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) {
        double ff = 1.0;
        for (int j = 0; j < order; ++j)
            ff *= static_cast<double>(n) - j;
        acc += ff * probs_[n];
    }
    return acc;
}

double PhotonNumberDistribution::parity() const noexcept {
    double acc = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n)
        acc += (n % 2 == 0 ? 1.0 : -1.0) * probs_[n];
    return acc;
}

PhotonNumberDistribution thermal_pmf(double mean, int n_max) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw DomainError("thermal_pmf: mean must be finite and >= 0");
    if (n_max < 0)
        throw DomainError("thermal_pmf: n_max must be >= 0");
    const double lambda = mean / (1.0 + mean);
    std::vector<double> probs(static_cast<std::size_t>(n_max) + 1);
    double p = 1.0 / (1.0 + mean);
    for (int n = 0; n <= n_max; ++n) {
        probs[n] = p;
        p *= lambda;
    }
    return {std::move(probs), std::pow(lambda, n_max + 1)};
}

double multimode_tail(const TwinBeamState &state, int n_max) {
    const double m = state.mode_mean();
    if (m == 0.0)
        return 0.0;
    const double lambda = m / (1.0 + m);
    if (state.mode_count() == 1)
        return std::pow(lambda, n_max + 1);
    // P(N > n) for the negative binomial is the regularized incomplete beta.
    return boost::math::ibeta(static_cast<double>(n_max) + 1.0,
                              static_cast<double>(state.mode_count()), lambda);
}

PhotonNumberDistribution multimode_total_pmf(const TwinBeamState &state, int n_max) {
    if (n_max < 0)
        throw DomainError("multimode_total_pmf: n_max must be >= 0");
    if (state.mode_count() == 1)
        return thermal_pmf(state.mean_total(), n_max);

    const double m = state.mode_mean();
    const double k = state.mode_count();
    const double lambda = m / (1.0 + m);
    std::vector<double> probs(static_cast<std::size_t>(n_max) + 1);
    // P(0) = (1+m)^-K, P(n+1)/P(n) = lambda (n+K)/(n+1)
    double p = std::exp(-k * std::log1p(m));
    for (int n = 0; n <= n_max; ++n) {
        probs[n] = p;
        p *= lambda * (n + k) / (n + 1.0);
    }
    return {std::move(probs), multimode_tail(state, n_max)};
}

int certified_cutoff(const TwinBeamState &state, double tolerance, int cap) {
    // The tail is monotone in n_max, so bisect on [0, cap].
    if (multimode_tail(state, cap) > tolerance) {
        throw TruncationError("cannot certify truncation: tail beyond n_max=" +
                              std::to_string(cap) + " exceeds " + std::to_string(tolerance) +
                              " (mean_total=" + std::to_string(state.mean_total()) +
                              "); pass an explicit n_max");
    }
    int lo = -1, hi = cap;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (multimode_tail(state, mid) <= tolerance)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

PhotonNumberDistribution multimode_total_pmf(const TwinBeamState &state) {
    return multimode_total_pmf(state, certified_cutoff(state));
}

ThermalSampler::ThermalSampler(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw DomainError("ThermalSampler: mean must be finite and >= 0");
    lambda_ = mean / (1.0 + mean);
    inv_log_lambda_ = lambda_ > 0.0 ? 1.0 / std::log(lambda_) : 0.0;
}

std::uint32_t ThermalSampler::operator()(CounterStream &rng) const noexcept {
    // P(n >= j) = lambda^j with u uniform on (0, 1]; n = 0 unless u <= lambda.
    const double u = rng.uniform_open0();
    if (u > lambda_)
        return 0;
    return static_cast<std::uint32_t>(std::floor(std::log(u) * inv_log_lambda_));
}

std::vector<std::uint32_t> sample_mode_occupations(const TwinBeamState &state, CounterStream &rng) {
    const ThermalSampler sampler(state.mode_mean());
    std::vector<std::uint32_t> modes(static_cast<std::size_t>(state.mode_count()));
    for (auto &n : modes)
        n = sampler(rng);
    return modes;
}

double unconditional_g2_theory(const TwinBeamState &state) {
    return 1.0 + 1.0 / state.mode_count();
}

double unconditional_g2_theory(double schmidt_number) {
    if (!(schmidt_number > 0.0))
        throw DomainError("unconditional_g2_theory: Schmidt number must be > 0");
    return 1.0 + 1.0 / schmidt_number;
}

} // namespace hpl
