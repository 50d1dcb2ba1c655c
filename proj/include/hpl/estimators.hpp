#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <ceres/jet.h>

#include "hpl/analytic_oracle.hpp"
#include "hpl/records.hpp"

namespace hpl {

enum class Method {
    car,
    klyshko_raw,
    klyshko_corrected,
    g2_unconditional,
    schmidt_k,
    g2_heralded,
    mean_n_first,
    mean_n_second,
    parity,
};

std::string_view to_string(Method m) noexcept;

struct FigureOfMerit {
    double value = 0;
    double std_err = 0;
    Method method = Method::car;
};

/// Count tallies as real numbers, so the estimator formulas can be evaluated
/// on measured counts, on per-pulse probabilities (pulses = 1) or on
/// differentiable scalars.
template <class T>
struct Tallies {
    T pulses{}, s_i{}, s_s1{}, s_s2{}, s_s{}, c_is{}, c_is1{}, c_is2{}, c_s1s2{}, c_is1s2{};

    /// Builds every tally from the 8 exclusive click-pattern counts.
    template <class Patterns>
    static Tallies from_patterns(const Patterns &n) {
        Tallies t;
        for (unsigned mask = 0; mask < 8; ++mask) {
            const T &v = n[mask];
            const bool i = mask & kIdlerBit, s1 = mask & kSignal1Bit, s2 = mask & kSignal2Bit;
            t.pulses += v;
            if (i) t.s_i += v;
            if (s1) t.s_s1 += v;
            if (s2) t.s_s2 += v;
            if (s1 || s2) t.s_s += v;
            if (i && (s1 || s2)) t.c_is += v;
            if (i && s1) t.c_is1 += v;
            if (i && s2) t.c_is2 += v;
            if (s1 && s2) t.c_s1s2 += v;
            if (i && s1 && s2) t.c_is1s2 += v;
        }
        return t;
    }
};

Tallies<double> tallies_of(const CountRecord &rec);
/// Expected counts per pulse.
Tallies<double> tallies_of(const PulseProbabilities &p);

/// Estimator formulas, generic over the scalar type.
namespace formula {

template <class T> T car(const Tallies<T> &t) { return t.pulses * t.c_is / (t.s_i * t.s_s); }
template <class T> T accidentals(const Tallies<T> &t) { return t.s_i * t.s_s / t.pulses; }

template <class T> T klyshko_signal_raw(const Tallies<T> &t) { return t.c_is / t.s_i; }
template <class T> T klyshko_idler_raw(const Tallies<T> &t) { return t.c_is / t.s_s; }
template <class T> T klyshko_signal_corrected(const Tallies<T> &t) {
    return (t.c_is - accidentals(t)) / t.s_i;
}
template <class T> T klyshko_idler_corrected(const Tallies<T> &t) {
    return (t.c_is - accidentals(t)) / t.s_s;
}

template <class T> T g2_unconditional(const Tallies<T> &t) {
    return t.pulses * t.c_s1s2 / (t.s_s1 * t.s_s2);
}
template <class T> T schmidt_k(const T &g2) { return T(1.0) / (g2 - T(1.0)); }

template <class T> T g2_heralded(const Tallies<T> &t) {
    return t.s_i * t.c_is1s2 / (t.c_is1 * t.c_is2);
}

template <class T> T mean_n_first(const T &car) { return car / (car - T(1.0)); }

/// Physical root of mu_sc n - 3/4 mu_sc^2 g2h n^2 = mu_s, written as
/// 2 mu_s / (mu_sc (1 + sqrt(1 - 3 g2h mu_s))), which equals
/// (1 - sqrt(1 - 3 g2h mu_s)) / (3/2 mu_sc g2h) without its cancellation
/// and tends to mu_s / mu_sc as g2h -> 0.
template <class T> T mean_n_second(const T &g2h, const T &mu_s, const T &mu_sc) {
    using std::sqrt;
    return T(2.0) * mu_s / (mu_sc * (T(1.0) + sqrt(T(1.0) - T(3.0) * g2h * mu_s)));
}

template <class T> T parity(const T &mean_n, const T &g2h) {
    return T(1.0) - T(2.0) * mean_n + T(2.0) * mean_n * mean_n * g2h;
}

} // namespace formula

/// Differentiable scalar over the 8 click-pattern counts.
using PatternJet = ceres::Jet<double, 8>;
using CountExpression = std::function<PatternJet(const Tallies<PatternJet> &)>;

/// First-order (delta-method) standard error of `expr` evaluated on `rec`.
/// The 8 exclusive click-pattern counts are multinomial with the pulse
/// number fixed: Var = sum_c g_c^2 N_c - (sum_c g_c N_c)^2 / pulses.
/// Throws UndefinedResult when the expression or its gradient is not finite.
double propagate_poisson(const CountExpression &expr, const CountRecord &rec);

/// Value and delta-method error of an arbitrary count expression.
FigureOfMerit estimate(const CountExpression &expr, const CountRecord &rec, Method method);

enum class Arm { signal, idler };
enum class HbtArm { signal, idler_as_split };

FigureOfMerit car(const CountRecord &rec);
/// {signal, idler} Klyshko efficiencies.
std::pair<FigureOfMerit, FigureOfMerit> klyshko(const CountRecord &rec, bool corrected);
/// HBT g2 of the beam on the split pair. `arm` only labels which beam was
/// routed there; for the idler, record with ExperimentModel::with_idler_split.
FigureOfMerit g2_unconditional(const CountRecord &rec, HbtArm arm = HbtArm::signal);
FigureOfMerit g2_heralded(const CountRecord &rec);

FigureOfMerit schmidt_k(const FigureOfMerit &g2);
FigureOfMerit mean_photon_first(const FigureOfMerit &car_value);
/// Inputs are treated as independent for the error. Use estimate_all for
/// the correlated error of estimates taken from one record.
FigureOfMerit mean_photon_second(const FigureOfMerit &g2h, const FigureOfMerit &mu_s_raw,
                                 const FigureOfMerit &mu_sc);
FigureOfMerit parity(const FigureOfMerit &mean_n, const FigureOfMerit &g2h);

/// One row of the figures table. `value` is empty when the estimator is
/// undefined for the record; `error` then says why.
struct FigureRow {
    std::string tag;
    Method method;
    std::optional<FigureOfMerit> value;
    std::string error;
};

/// Every figure of merit from one record, with errors propagated jointly
/// through the click-pattern counts.
std::vector<FigureRow> estimate_all(const CountRecord &rec);

/// Estimator formulas evaluated on exact probabilities (no errors).
struct TheoryFigures {
    std::optional<double> car, g2_unconditional, g2h, mu_s, mu_i, mu_sc, mu_ic, mean_n_first,
        mean_n_second, parity_first, parity_second;
};
TheoryFigures estimate_from_probabilities(const PulseProbabilities &p);

} // namespace hpl
