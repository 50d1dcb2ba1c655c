#include "hpl/detector_model.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "hpl/errors.hpp"

namespace hpl {

void ClickDetectorConfig::validate() const {
    if (bins < 1)
        throw DomainError("ClickDetectorConfig: bins must be >= 1");
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw DomainError("ClickDetectorConfig: efficiency must lie in [0, 1]");
    if (!(dark_prob >= 0.0) || !std::isfinite(dark_prob))
        throw DomainError("ClickDetectorConfig: dark_prob must be finite and >= 0");
}

double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    if (n <= 64) {
        // C(n, j) stays below 2^64 for n <= 64, and each partial product
        // C(n-k+j, j) is an integer.
        unsigned __int128 c = 1;
        for (int j = 1; j <= k; ++j)
            c = c * static_cast<unsigned>(n - k + j) / static_cast<unsigned>(j);
        return static_cast<double>(static_cast<std::uint64_t>(c));
    }
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

POVMDiagonal povm_click_diagonal(const ClickDetectorConfig &config, int k, int n_max) {
    config.validate();
    if (k < 0 || k > config.bins)
        throw DomainError("povm_click_diagonal: clicks k=" + std::to_string(k) +
                          " outside [0, " + std::to_string(config.bins) + "]");
    if (n_max < 0)
        throw DomainError("povm_click_diagonal: n_max must be >= 0");

    const int N = config.bins;
    const double nu = config.dark_prob;
    const double eta = config.efficiency;

    POVMDiagonal out{k, std::vector<double>(static_cast<std::size_t>(n_max) + 1, 0.0)};
    const double prefactor = binomial(N, k);
    for (int m = 0; m <= k; ++m) {
        // N + m - k bins are required to stay silent in this term.
        const double silent = N + m - k;
        const double amplitude =
            prefactor * binomial(k, m) * (m % 2 == 0 ? 1.0 : -1.0) * std::exp(-nu / N * silent);
        const double base = 1.0 - eta / N * silent;
        double power = 1.0;
        for (int n = 0; n <= n_max; ++n) {
            out.weights[n] += amplitude * power;
            power *= base;
        }
    }
    return out;
}

POVMDiagonal reduced_O1_diagonal(double efficiency, int n_max) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw DomainError("reduced_O1_diagonal: efficiency must lie in [0, 1]");
    if (n_max < 0)
        throw DomainError("reduced_O1_diagonal: n_max must be >= 0");
    POVMDiagonal out{1, std::vector<double>(static_cast<std::size_t>(n_max) + 1)};
    double half = 1.0, full = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        out.weights[n] = 2.0 * (half - full);
        half *= 1.0 - efficiency / 2.0;
        full *= 1.0 - efficiency;
    }
    return out;
}

std::vector<double> taylor_O1_coefficients(double efficiency, int order) {
    switch (order) {
    case 1:
        return {efficiency};
    case 2:
        return {efficiency, -0.75 * efficiency * efficiency};
    default:
        throw DomainError("taylor_O1_coefficients: order must be 1 or 2, got " +
                          std::to_string(order));
    }
}

double falling_factorial_series(std::span<const double> coeffs, int n) {
    double acc = 0.0;
    double ff = 1.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        ff *= static_cast<double>(n) - static_cast<double>(j);
        acc += coeffs[j] * ff;
    }
    return acc;
}

PhotonNumberDistribution binomial_loss_transform(const PhotonNumberDistribution &dist,
                                                 double transmission) {
    if (!(transmission >= 0.0 && transmission <= 1.0))
        throw DomainError("binomial_loss_transform: transmission must lie in [0, 1]");
    const int n_max = dist.n_max();
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (transmission == 1.0)
        return dist;
    if (transmission == 0.0) {
        out[0] = dist.total();
        return {std::move(out), dist.tail_bound()};
    }
    const double log_t = std::log(transmission);
    const double log_r = std::log1p(-transmission);
    for (int n = 0; n <= n_max; ++n) {
        const double pn = dist[n];
        if (pn == 0.0)
            continue;
        for (int m = 0; m <= n; ++m) {
            double term;
            if (n <= 64)
                term = binomial(n, m) * std::pow(transmission, m) * std::pow(1.0 - transmission, n - m);
            else
                term = std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0) -
                                std::lgamma(n - m + 1.0) + m * log_t + (n - m) * log_r);
            out[m] += pn * term;
        }
    }
    for (double &p : out)
        p = std::min(p, 1.0);
    // Mass beyond the cutoff can only thin into m <= n_max; the omitted mass
    // of the output is still bounded by the input tail.
    return {std::move(out), dist.tail_bound()};
}

double click_probability(const PhotonNumberDistribution &dist, const POVMDiagonal &povm) {
    if (povm.n_max() != dist.n_max())
        throw DomainError("click_probability: POVM truncated at n_max=" +
                          std::to_string(povm.n_max()) + " but state at n_max=" +
                          std::to_string(dist.n_max()));
    double acc = 0.0;
    for (int n = 0; n <= dist.n_max(); ++n)
        acc += dist[n] * povm.weights[n];
    return acc;
}

double click_probability(const PhotonNumberDistribution &dist, const ClickDetectorConfig &config,
                         int k) {
    return click_probability(dist, povm_click_diagonal(config, k, dist.n_max()));
}

} // namespace hpl
