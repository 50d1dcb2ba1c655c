#pragma once

#include <span>
#include <vector>

#include "hpl/photon_statistics.hpp"

namespace hpl {

/// N spatially multiplexed click detectors behind a balanced splitter.
struct ClickDetectorConfig {
    int bins = 1;
    double efficiency = 1.0;  ///< lumped detection efficiency
    double dark_prob = 0.0;   ///< dark-count probability per gate, all bins together

    void validate() const;
};

/// Diagonal of the POVM element for exactly `clicks` clicks, n = 0..n_max.
struct POVMDiagonal {
    int clicks = 0;
    std::vector<double> weights;

    int n_max() const noexcept { return static_cast<int>(weights.size()) - 1; }
};

/// Binomial coefficient as a double. Exact integer arithmetic for n <= 64,
/// log-gamma above.
double binomial(int n, int k);

/// Probability of exactly k clicks given n photons:
///   sum_m C(N,k) C(k,m) (-1)^m exp(-nu/N (N+m-k)) (1 - eta/N (N+m-k))^n
POVMDiagonal povm_click_diagonal(const ClickDetectorConfig &config, int k, int n_max);

/// Single-click element of a two-bin detector without dark counts:
///   2 [(1 - eta/2)^n - (1 - eta)^n]
POVMDiagonal reduced_O1_diagonal(double efficiency, int n_max);

/// Coefficients of the single-click element expanded in falling factorials
/// n, n(n-1): {eta} for order 1, {eta, -3/4 eta^2} for order 2.
std::vector<double> taylor_O1_coefficients(double efficiency, int order);

/// sum_j coeffs[j] * n(n-1)...(n-j), i.e. coefficient j multiplies the
/// falling factorial of order j+1.
double falling_factorial_series(std::span<const double> coeffs, int n);

/// Binomial thinning: each photon survives independently with `transmission`.
PhotonNumberDistribution binomial_loss_transform(const PhotonNumberDistribution &dist,
                                                 double transmission);

/// Tr{rho O_k} for a diagonal state.
double click_probability(const PhotonNumberDistribution &dist, const POVMDiagonal &povm);
double click_probability(const PhotonNumberDistribution &dist, const ClickDetectorConfig &config,
                         int k);

} // namespace hpl
