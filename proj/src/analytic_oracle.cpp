#include "hpl/analytic_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "hpl/errors.hpp"
#include "hpl/records.hpp"

namespace hpl {
namespace {

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

/// Given n photons in each arm, the probability that every detector in
/// `silent` stays dark is dark_factor * base^n. Detector subsets use the
/// ClickBit mask.
struct SilenceTerm {
    double base = 1.0;
    double dark_factor = 1.0;
};

std::array<SilenceTerm, 8> silence_terms(const ExperimentModel &m) {
    const double a1 = m.eta_signal * m.signal_split;
    const double a2 = m.eta_signal * (1.0 - m.signal_split);
    const double herald_dark = 1.0 - m.dark_prob;
    const double signal_dark = 1.0 - m.dark_prob / 2.0;

    std::array<SilenceTerm, 8> out{};
    for (unsigned mask = 0; mask < 8; ++mask) {
        double idler = 1.0, absorbed = 0.0, dark = 1.0;
        if (mask & kIdlerBit) {
            idler = 1.0 - m.eta_idler;
            dark *= herald_dark;
        }
        if (mask & kSignal1Bit) {
            absorbed += a1;
            dark *= signal_dark;
        }
        if (mask & kSignal2Bit) {
            absorbed += a2;
            dark *= signal_dark;
        }
        // Idler and signal photons are routed independently, so the joint
        // silence probability factorizes per photon pair.
        out[mask] = {idler * (1.0 - absorbed), dark};
    }
    return out;
}

/// P(every detector in `clicked` fires | n) by inclusion-exclusion over its
/// subsets, for all n in [0, n_max].
template <class Visit>
void for_each_photon_number(const ExperimentModel &m, int n_max, Visit &&visit) {
    const auto terms = silence_terms(m);
    std::array<double, 8> power;
    power.fill(1.0);
    for (int n = 0; n <= n_max; ++n) {
        std::array<double, 8> silent{};
        for (unsigned mask = 0; mask < 8; ++mask)
            silent[mask] = terms[mask].dark_factor * power[mask];
        visit(n, silent);
        for (unsigned mask = 0; mask < 8; ++mask)
            power[mask] *= terms[mask].base;
    }
}

double all_click(const std::array<double, 8> &silent, unsigned clicked) {
    double acc = 0.0;
    for (unsigned sub = 0; sub < 8; ++sub) {
        if ((sub & clicked) != sub)
            continue;
        acc += (__builtin_popcount(sub) % 2 == 0 ? 1.0 : -1.0) * silent[sub];
    }
    return acc;
}

double herald_click(const ExperimentModel &m, int n) {
    return 1.0 - (1.0 - m.dark_prob) * std::pow(1.0 - m.eta_idler, n);
}

} // namespace

void ExperimentModel::validate() const {
    if (!unit_interval(eta_idler) || !unit_interval(eta_signal))
        throw DomainError("ExperimentModel: efficiencies must lie in [0, 1]");
    if (!unit_interval(signal_split))
        throw DomainError("ExperimentModel: signal_split must lie in [0, 1]");
    if (!unit_interval(dark_prob))
        throw DomainError("ExperimentModel: dark_prob must lie in [0, 1]");
    if (n_max < 0)
        throw DomainError("ExperimentModel: n_max must be >= 0");
}

ExperimentModel ExperimentModel::with_mean(double mean_total) const {
    ExperimentModel out = *this;
    out.source = TwinBeamState(mean_total, source.mode_count());
    return out;
}

ExperimentModel ExperimentModel::with_idler_split() const {
    ExperimentModel out = *this;
    std::swap(out.eta_idler, out.eta_signal);
    return out;
}

int oracle_cutoff(const ExperimentModel &model) {
    if (model.n_max == 0) {
        // Triple coincidences scale as mean^2, so the tail is held below
        // the tolerance relative to mean^3 to keep every joint probability
        // accurate to ~1e-12 relative.
        const double scale = std::min(1.0, model.source.mean_total());
        return certified_cutoff(model.source,
                                std::max(kTruncationTolerance * scale * scale * scale, 1e-300));
    }
    const double tail = multimode_tail(model.source, model.n_max);
    if (tail > kTruncationTolerance)
        throw TruncationError("uncertified truncation: n_max=" + std::to_string(model.n_max) +
                              " leaves tail mass " + std::to_string(tail) + " > " +
                              std::to_string(kTruncationTolerance));
    return model.n_max;
}

PulseProbabilities pulse_probabilities(const ExperimentModel &model) {
    model.validate();
    const auto dist = multimode_total_pmf(model.source, oracle_cutoff(model));
    constexpr unsigned I = kIdlerBit, S1 = kSignal1Bit, S2 = kSignal2Bit;

    PulseProbabilities p;
    for_each_photon_number(model, dist.n_max(), [&](int n, const std::array<double, 8> &silent) {
        const double w = dist[n];
        if (w == 0.0)
            return;
        p.p_i += w * all_click(silent, I);
        p.p_s1 += w * all_click(silent, S1);
        p.p_s2 += w * all_click(silent, S2);
        p.p_s += w * (1.0 - silent[S1 | S2]);
        p.p_is1 += w * all_click(silent, I | S1);
        p.p_is2 += w * all_click(silent, I | S2);
        p.p_s1s2 += w * all_click(silent, S1 | S2);
        p.p_is1s2 += w * all_click(silent, I | S1 | S2);
        // herald AND NOT(no signal click)
        p.p_coinc += w * (all_click(silent, I) - (silent[S1 | S2] - silent[I | S1 | S2]));
    });
    return p;
}

double car_theory(const ExperimentModel &model) {
    const auto p = pulse_probabilities(model);
    if (!(p.p_i * p.p_s > 0.0))
        throw UndefinedResult("car_theory: zero singles probability");
    return p.p_coinc / (p.p_i * p.p_s);
}

double g2h_theory(const ExperimentModel &model) {
    const auto p = pulse_probabilities(model);
    if (!(p.p_is1 * p.p_is2 > 0.0))
        throw UndefinedResult("g2h_theory: zero herald-signal coincidence probability");
    return p.p_i * p.p_is1s2 / (p.p_is1 * p.p_is2);
}

double g2_unconditional_theory(const ExperimentModel &model) {
    const auto p = pulse_probabilities(model);
    if (!(p.p_s1 * p.p_s2 > 0.0))
        throw UndefinedResult("g2_unconditional_theory: zero signal singles probability");
    return p.p_s1s2 / (p.p_s1 * p.p_s2);
}

PhotonNumberDistribution heralded_state(const ExperimentModel &model) {
    model.validate();
    const auto conditional = [&](int n_max) {
        const auto dist = multimode_total_pmf(model.source, n_max);
        std::vector<double> probs(dist.probs().begin(), dist.probs().end());
        double p_herald = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            probs[n] *= herald_click(model, n);
            p_herald += probs[n];
        }
        if (!(p_herald > 0.0))
            throw UndefinedResult("heralded_state: herald click probability is zero");
        for (double &p : probs)
            p /= p_herald;
        return std::pair{PhotonNumberDistribution(std::move(probs), dist.tail_bound() / p_herald),
                         p_herald};
    };

    auto [state, p_herald] = conditional(oracle_cutoff(model));
    if (model.n_max == 0 && state.tail_bound() > kTruncationTolerance) {
        // Renormalizing by p_i inflates the tail; certify the conditional one.
        state = conditional(certified_cutoff(model.source, kTruncationTolerance * p_herald)).first;
    }
    return state;
}

HeraldedMoments heralded_mean_and_parity_theory(const ExperimentModel &model) {
    const auto state = heralded_state(model);
    return {state.mean(), state.parity()};
}

double solve_mean_for_car(const ExperimentModel &model, double target_car) {
    if (!(target_car > 1.0))
        throw DomainError("solve_mean_for_car: target CAR must exceed 1");
    const auto residual = [&](double log_mean) {
        return std::log(car_theory(model.with_mean(std::exp(log_mean)))) - std::log(target_car);
    };
    double lo = std::log(1e-9), hi = std::log(10.0);
    const double f_lo = residual(lo), f_hi = residual(hi);
    if (f_lo < 0.0 || f_hi > 0.0)
        throw DomainError("solve_mean_for_car: CAR " + std::to_string(target_car) +
                          " is not reachable for mean_total in [1e-9, 10]");
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return std::exp(0.5 * (a + b));
}

} // namespace hpl
