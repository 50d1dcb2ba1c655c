#include "hpl/estimators.hpp"

#include <array>
#include <cmath>

#include "hpl/errors.hpp"

namespace hpl {
namespace {

bool finite_jet(const PatternJet &j) {
    if (!std::isfinite(j.a))
        return false;
    for (int k = 0; k < 8; ++k)
        if (!std::isfinite(j.v[k]))
            return false;
    return true;
}

void require_positive(double v, const char *what) {
    if (!(v > 0.0))
        throw UndefinedResult(std::string(what) + " is zero; acquire more pulses");
}

template <int N>
double independent_error(const ceres::Jet<double, N> &f, const std::array<double, N> &errs) {
    double var = 0.0;
    for (int k = 0; k < N; ++k)
        var += f.v[k] * f.v[k] * errs[k] * errs[k];
    return std::sqrt(var);
}

template <class F>
std::optional<double> guarded(F &&f) {
    const double v = f();
    return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

} // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::car: return "car";
    case Method::klyshko_raw: return "klyshko_raw";
    case Method::klyshko_corrected: return "klyshko_corrected";
    case Method::g2_unconditional: return "g2_unconditional";
    case Method::schmidt_k: return "schmidt_k";
    case Method::g2_heralded: return "g2_heralded";
    case Method::mean_n_first: return "mean_n_first";
    case Method::mean_n_second: return "mean_n_second";
    case Method::parity: return "parity";
    }
    return "unknown";
}

Tallies<double> tallies_of(const CountRecord &rec) {
    Tallies<double> t;
    t.pulses = static_cast<double>(rec.pulses);
    t.s_i = static_cast<double>(rec.s_i);
    t.s_s1 = static_cast<double>(rec.s_s1);
    t.s_s2 = static_cast<double>(rec.s_s2);
    t.s_s = static_cast<double>(rec.s_s());
    t.c_is = static_cast<double>(rec.c_is);
    t.c_is1 = static_cast<double>(rec.c_is1);
    t.c_is2 = static_cast<double>(rec.c_is2);
    t.c_s1s2 = static_cast<double>(rec.c_s1s2);
    t.c_is1s2 = static_cast<double>(rec.c_is1s2);
    return t;
}

Tallies<double> tallies_of(const PulseProbabilities &p) {
    Tallies<double> t;
    t.pulses = 1.0;
    t.s_i = p.p_i;
    t.s_s1 = p.p_s1;
    t.s_s2 = p.p_s2;
    t.s_s = p.p_s;
    t.c_is = p.p_coinc;
    t.c_is1 = p.p_is1;
    t.c_is2 = p.p_is2;
    t.c_s1s2 = p.p_s1s2;
    t.c_is1s2 = p.p_is1s2;
    return t;
}

double propagate_poisson(const CountExpression &expr, const CountRecord &rec) {
    const PatternCounts counts = rec.patterns();
    std::array<PatternJet, 8> n;
    for (int c = 0; c < 8; ++c)
        n[c] = PatternJet(static_cast<double>(counts[c]), c);
    const PatternJet f = expr(Tallies<PatternJet>::from_patterns(n));
    if (!finite_jet(f))
        throw UndefinedResult("error propagation: a count in a denominator is zero; acquire more pulses");

    double sum_sq = 0.0, sum_lin = 0.0;
    for (int c = 0; c < 8; ++c) {
        const double nc = static_cast<double>(counts[c]);
        sum_sq += f.v[c] * f.v[c] * nc;
        sum_lin += f.v[c] * nc;
    }
    const double var = sum_sq - sum_lin * sum_lin / static_cast<double>(rec.pulses);
    return std::sqrt(std::max(var, 0.0));
}

FigureOfMerit estimate(const CountExpression &expr, const CountRecord &rec, Method method) {
    const PatternCounts counts = rec.patterns();
    std::array<PatternJet, 8> n;
    for (int c = 0; c < 8; ++c)
        n[c] = PatternJet(static_cast<double>(counts[c]));
    const double value = expr(Tallies<PatternJet>::from_patterns(n)).a;
    if (!std::isfinite(value))
        throw UndefinedResult(std::string(to_string(method)) + ": undefined for these counts; acquire more pulses");
    return {value, propagate_poisson(expr, rec), method};
}

FigureOfMerit car(const CountRecord &rec) {
    require_positive(static_cast<double>(rec.s_i), "car: idler singles");
    require_positive(static_cast<double>(rec.s_s()), "car: signal singles");
    return estimate([](const auto &t) { return formula::car(t); }, rec, Method::car);
}

std::pair<FigureOfMerit, FigureOfMerit> klyshko(const CountRecord &rec, bool corrected) {
    require_positive(static_cast<double>(rec.s_i), "klyshko: idler singles");
    require_positive(static_cast<double>(rec.s_s()), "klyshko: signal singles");
    if (corrected) {
        return {estimate([](const auto &t) { return formula::klyshko_signal_corrected(t); }, rec,
                         Method::klyshko_corrected),
                estimate([](const auto &t) { return formula::klyshko_idler_corrected(t); }, rec,
                         Method::klyshko_corrected)};
    }
    return {estimate([](const auto &t) { return formula::klyshko_signal_raw(t); }, rec,
                     Method::klyshko_raw),
            estimate([](const auto &t) { return formula::klyshko_idler_raw(t); }, rec,
                     Method::klyshko_raw)};
}

FigureOfMerit g2_unconditional(const CountRecord &rec, HbtArm) {
    require_positive(static_cast<double>(rec.s_s1), "g2_unconditional: s1 singles");
    require_positive(static_cast<double>(rec.s_s2), "g2_unconditional: s2 singles");
    return estimate([](const auto &t) { return formula::g2_unconditional(t); }, rec,
                    Method::g2_unconditional);
}

FigureOfMerit g2_heralded(const CountRecord &rec) {
    require_positive(static_cast<double>(rec.c_is1), "g2_heralded: herald-s1 coincidences");
    require_positive(static_cast<double>(rec.c_is2), "g2_heralded: herald-s2 coincidences");
    auto fom = estimate([](const auto &t) { return formula::g2_heralded(t); }, rec,
                        Method::g2_heralded);
    if (rec.c_is1s2 == 0) {
        // One-sided: the error a single triple coincidence would carry.
        fom.std_err = static_cast<double>(rec.s_i) /
                      (static_cast<double>(rec.c_is1) * static_cast<double>(rec.c_is2));
    }
    return fom;
}

FigureOfMerit schmidt_k(const FigureOfMerit &g2) {
    if (!(g2.value > 1.0))
        throw DomainError("schmidt_k: g2 = " + std::to_string(g2.value) +
                          " <= 1; the mode number is unbounded");
    const double excess = g2.value - 1.0;
    return {formula::schmidt_k(g2.value), g2.std_err / (excess * excess), Method::schmidt_k};
}

FigureOfMerit mean_photon_first(const FigureOfMerit &car_value) {
    if (!(car_value.value > 1.0))
        throw DomainError("mean_photon_first: CAR = " + std::to_string(car_value.value) + " <= 1");
    const double excess = car_value.value - 1.0;
    return {formula::mean_n_first(car_value.value), car_value.std_err / (excess * excess),
            Method::mean_n_first};
}

FigureOfMerit mean_photon_second(const FigureOfMerit &g2h, const FigureOfMerit &mu_s_raw,
                                 const FigureOfMerit &mu_sc) {
    if (!(mu_sc.value > 0.0))
        throw UndefinedResult("mean_photon_second: corrected efficiency mu_sc is zero");
    if (1.0 - 3.0 * g2h.value * mu_s_raw.value < 0.0)
        throw DomainError("mean_photon_second: 3 g2h mu_s = " +
                          std::to_string(3.0 * g2h.value * mu_s_raw.value) +
                          " exceeds 1; no real solution for the mean photon number");
    using J = ceres::Jet<double, 3>;
    const J n = formula::mean_n_second(J(g2h.value, 0), J(mu_s_raw.value, 1), J(mu_sc.value, 2));
    return {n.a, independent_error<3>(n, {g2h.std_err, mu_s_raw.std_err, mu_sc.std_err}),
            Method::mean_n_second};
}

FigureOfMerit parity(const FigureOfMerit &mean_n, const FigureOfMerit &g2h) {
    if (!std::isfinite(mean_n.value))
        throw DomainError("parity: mean photon number is not finite");
    if (!(g2h.value >= 0.0))
        throw DomainError("parity: g2h must be >= 0");
    using J = ceres::Jet<double, 2>;
    const J p = formula::parity(J(mean_n.value, 0), J(g2h.value, 1));
    return {p.a, independent_error<2>(p, {mean_n.std_err, g2h.std_err}), Method::parity};
}

std::vector<FigureRow> estimate_all(const CountRecord &rec) {
    std::vector<FigureRow> rows;
    const auto add = [&](std::string tag, Method method, auto &&compute) {
        FigureRow row{std::move(tag), method, std::nullopt, {}};
        try {
            row.value = compute();
        } catch (const std::exception &e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    };

    add("car", Method::car, [&] { return car(rec); });
    add("klyshko_raw_signal", Method::klyshko_raw, [&] { return klyshko(rec, false).first; });
    add("klyshko_raw_idler", Method::klyshko_raw, [&] { return klyshko(rec, false).second; });
    add("klyshko_corrected_signal", Method::klyshko_corrected, [&] { return klyshko(rec, true).first; });
    add("klyshko_corrected_idler", Method::klyshko_corrected, [&] { return klyshko(rec, true).second; });
    add("g2_unconditional", Method::g2_unconditional, [&] { return g2_unconditional(rec); });
    add("schmidt_k", Method::schmidt_k, [&] {
        const auto g2 = g2_unconditional(rec);
        (void)schmidt_k(g2);  // domain check
        return estimate([](const auto &x) { return formula::schmidt_k(formula::g2_unconditional(x)); },
                        rec, Method::schmidt_k);
    });
    add("g2_heralded", Method::g2_heralded, [&] { return g2_heralded(rec); });

    const auto first = [](const auto &x) { return formula::mean_n_first(formula::car(x)); };
    const auto second = [](const auto &x) {
        return formula::mean_n_second(formula::g2_heralded(x), formula::klyshko_signal_raw(x),
                                      formula::klyshko_signal_corrected(x));
    };
    add("mean_n_first", Method::mean_n_first, [&] {
        (void)mean_photon_first(car(rec));
        return estimate(first, rec, Method::mean_n_first);
    });
    add("mean_n_second", Method::mean_n_second, [&] {
        (void)mean_photon_second(g2_heralded(rec), klyshko(rec, false).first, klyshko(rec, true).first);
        return estimate(second, rec, Method::mean_n_second);
    });
    add("parity_first", Method::parity, [&] {
        (void)mean_photon_first(car(rec));
        (void)g2_heralded(rec);
        return estimate([first](const auto &x) { return formula::parity(first(x), formula::g2_heralded(x)); },
                        rec, Method::parity);
    });
    add("parity_second", Method::parity, [&] {
        (void)mean_photon_second(g2_heralded(rec), klyshko(rec, false).first, klyshko(rec, true).first);
        return estimate([second](const auto &x) { return formula::parity(second(x), formula::g2_heralded(x)); },
                        rec, Method::parity);
    });
    return rows;
}

TheoryFigures estimate_from_probabilities(const PulseProbabilities &p) {
    const auto t = tallies_of(p);
    TheoryFigures f;
    if (t.s_i > 0 && t.s_s > 0) {
        f.car = guarded([&] { return formula::car(t); });
        f.mu_s = formula::klyshko_signal_raw(t);
        f.mu_i = formula::klyshko_idler_raw(t);
        f.mu_sc = formula::klyshko_signal_corrected(t);
        f.mu_ic = formula::klyshko_idler_corrected(t);
    }
    if (t.s_s1 > 0 && t.s_s2 > 0)
        f.g2_unconditional = formula::g2_unconditional(t);
    if (t.c_is1 > 0 && t.c_is2 > 0)
        f.g2h = formula::g2_heralded(t);
    if (f.car && *f.car > 1.0)
        f.mean_n_first = formula::mean_n_first(*f.car);
    if (f.g2h && f.mu_s && f.mu_sc && *f.mu_sc > 0 && 3.0 * *f.g2h * *f.mu_s <= 1.0)
        f.mean_n_second = formula::mean_n_second(*f.g2h, *f.mu_s, *f.mu_sc);
    if (f.mean_n_first && f.g2h)
        f.parity_first = formula::parity(*f.mean_n_first, *f.g2h);
    if (f.mean_n_second && f.g2h)
        f.parity_second = formula::parity(*f.mean_n_second, *f.g2h);
    return f;
}

} // namespace hpl
