#pragma once

#include "hpl/photon_statistics.hpp"

namespace hpl {

/// Heralding experiment: the idler is detected by one click detector (the
/// herald); the signal is split onto two click detectors s1 and s2.
/// Efficiencies lump all optical and detector loss of an arm.
struct ExperimentModel {
    TwinBeamState source{0.0, 1};
    double eta_idler = 0.321;
    double eta_signal = 0.378;
    double signal_split = 0.5;  ///< fraction of signal routed to s1
    double dark_prob = 0.0;     ///< per gate and per detector group (herald: 1 bin, signal: 2 bins)
    int n_max = 0;              ///< Fock cutoff; 0 selects a certified cutoff automatically

    void validate() const;

    ExperimentModel with_mean(double mean_total) const;
    /// Same source with the idler routed into the split pair instead: the
    /// arm efficiencies swap roles.
    ExperimentModel with_idler_split() const;
};

/// Per-pulse click probabilities. p_coinc is the herald together with at
/// least one signal click; p_s is at least one signal click.
struct PulseProbabilities {
    double p_i = 0;
    double p_s1 = 0;
    double p_s2 = 0;
    double p_s = 0;
    double p_is1 = 0;
    double p_is2 = 0;
    double p_s1s2 = 0;
    double p_is1s2 = 0;
    double p_coinc = 0;
};

/// Fock cutoff used for the model (explicit n_max, or the certified one).
int oracle_cutoff(const ExperimentModel &model);

/// Exact joint click probabilities by inclusion-exclusion over the detector
/// subsets of {herald, s1, s2}.
PulseProbabilities pulse_probabilities(const ExperimentModel &model);

/// CAR = p_coinc / (p_i p_s)
double car_theory(const ExperimentModel &model);
/// g2h = p_i p_is1s2 / (p_is1 p_is2)
double g2h_theory(const ExperimentModel &model);
/// Marginal HBT g2 on the split pair: p_s1s2 / (p_s1 p_s2)
double g2_unconditional_theory(const ExperimentModel &model);

/// Signal photon-number distribution at the source conditioned on a herald
/// click.
PhotonNumberDistribution heralded_state(const ExperimentModel &model);

struct HeraldedMoments {
    double mean_n = 0;
    double parity = 0;
};
HeraldedMoments heralded_mean_and_parity_theory(const ExperimentModel &model);

/// Source brightness giving the requested CAR, holding everything else in
/// `model` fixed. CAR falls monotonically with the mean photon number.
double solve_mean_for_car(const ExperimentModel &model, double target_car);

} // namespace hpl
