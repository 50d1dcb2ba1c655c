#include <catch_amalgamated.hpp>

#include <cmath>

#include "hpl/errors.hpp"
#include "hpl/estimators.hpp"
#include "oracles.hpp"

using namespace hpl;

namespace {

CountRecord record_of(const PatternCounts &n) { return CountRecord::from_patterns(n); }

// 10^6 pulses, 1000 herald and 1000 signal singles, 100 coincidences.
const PatternCounts kSparse{1'000'000 - 1900, 900, 900, 100, 0, 0, 0, 0};

PatternCounts scaled(const PatternCounts &n, std::uint64_t factor) {
    PatternCounts out;
    for (int c = 0; c < 8; ++c)
        out[c] = n[c] * factor;
    return out;
}

std::array<double, 8> as_real(const PatternCounts &n) {
    std::array<double, 8> out;
    for (int c = 0; c < 8; ++c)
        out[c] = static_cast<double>(n[c]);
    return out;
}

// Delta-method error from finite differences of the plain double formula.
template <class F>
double numeric_error(F f, const PatternCounts &counts) {
    const auto at = as_real(counts);
    const auto value = [&](const std::array<double, 8> &n) { return f(Tallies<double>::from_patterns(n)); };
    const auto g = testing::numeric_gradient(value, at);
    double sq = 0, lin = 0, pulses = 0;
    for (int c = 0; c < 8; ++c) {
        sq += g[c] * g[c] * at[c];
        lin += g[c] * at[c];
        pulses += at[c];
    }
    return std::sqrt(sq - lin * lin / pulses);
}

const PatternCounts kBusy{9'000'000, 40'000, 30'000, 9'000, 28'000, 8'000, 900, 350};

} // namespace

TEST_CASE("CAR and its propagated error", "[estimators]") {
    const auto fom = car(record_of(kSparse));
    CHECK(fom.value == Catch::Approx(100.0).epsilon(1e-14));
    CHECK(fom.std_err / fom.value == Catch::Approx(0.090548329636719418).epsilon(1e-9));
    CHECK(fom.method == Method::car);
}

TEST_CASE("automatic gradients match finite differences", "[estimators]") {
    const auto rec = record_of(kBusy);
    CHECK(car(rec).std_err ==
          Catch::Approx(numeric_error([](const auto &t) { return formula::car(t); }, kBusy)).epsilon(1e-5));
    CHECK(g2_heralded(rec).std_err ==
          Catch::Approx(numeric_error([](const auto &t) { return formula::g2_heralded(t); }, kBusy)).epsilon(1e-5));
    CHECK(klyshko(rec, true).first.std_err ==
          Catch::Approx(numeric_error([](const auto &t) { return formula::klyshko_signal_corrected(t); }, kBusy))
              .epsilon(1e-5));
    const auto second = [](const auto &t) {
        return formula::mean_n_second(formula::g2_heralded(t), formula::klyshko_signal_raw(t),
                                      formula::klyshko_signal_corrected(t));
    };
    double joint = 0;
    for (const auto &row : estimate_all(rec))
        if (row.tag == "mean_n_second")
            joint = row.value->std_err;
    CHECK(joint == Catch::Approx(numeric_error(second, kBusy)).epsilon(1e-5));
}

TEST_CASE("errors shrink as one over root counts", "[estimators][property]") {
    for (std::uint64_t factor : {4u, 16u, 100u}) {
        const auto a = estimate_all(record_of(kBusy));
        const auto b = estimate_all(record_of(scaled(kBusy, factor)));
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CAPTURE(a[k].tag, factor);
            REQUIRE(a[k].value);
            REQUIRE(b[k].value);
            CHECK(b[k].value->value == Catch::Approx(a[k].value->value).epsilon(1e-12));
            CHECK(b[k].value->std_err * std::sqrt(double(factor)) ==
                  Catch::Approx(a[k].value->std_err).epsilon(1e-9));
        }
    }
}

TEST_CASE("derived figures", "[estimators]") {
    CHECK(mean_photon_first({97.14, 0, Method::car}).value == Catch::Approx(1.0104014978156855).epsilon(1e-14));
    CHECK(parity({1.016, 0, Method::mean_n_second}, {0.0284, 0, Method::g2_heralded}).value ==
          Catch::Approx(-0.9733678592).epsilon(1e-12));
    CHECK(schmidt_k({1.5, 0.01, Method::g2_unconditional}).value == Catch::Approx(2.0));
    CHECK(schmidt_k({1.5, 0.01, Method::g2_unconditional}).std_err == Catch::Approx(0.04));
    CHECK_THROWS_AS(schmidt_k({1.0, 0.01, Method::g2_unconditional}), DomainError);
    CHECK_THROWS_AS(schmidt_k({0.98, 0.01, Method::g2_unconditional}), DomainError);
    CHECK_THROWS_AS(mean_photon_first({0.9, 0, Method::car}), DomainError);
    CHECK_THROWS_AS(mean_photon_second({0.5, 0, Method::g2_heralded}, {0.9, 0, Method::klyshko_raw},
                                       {0.8, 0, Method::klyshko_corrected}),
                    DomainError);
    CHECK_THROWS_AS(mean_photon_second({0.03, 0, Method::g2_heralded}, {0.38, 0, Method::klyshko_raw},
                                       {0.0, 0, Method::klyshko_corrected}),
                    UndefinedResult);
}

TEST_CASE("second-order mean is stable as g2h vanishes", "[estimators]") {
    const FigureOfMerit mu_s{0.38, 0, Method::klyshko_raw}, mu_sc{0.37, 0, Method::klyshko_corrected};
    for (double g : {1e-3, 1e-6, 1e-9, 1e-12, 0.0}) {
        const double n = mean_photon_second({g, 0, Method::g2_heralded}, mu_s, mu_sc).value;
        // first terms of the root's expansion in g2h
        const double series = 0.38 / 0.37 * (1 + 0.75 * g * 0.38);
        CHECK(n == Catch::Approx(series).epsilon(1e-6));
    }
}

TEST_CASE("figures from exact probabilities", "[estimators]") {
    ExperimentModel m;
    m.source = TwinBeamState(0.010447116149254638, 1);
    const auto f = estimate_from_probabilities(pulse_probabilities(m));
    CHECK(*f.car == Catch::Approx(97.14).epsilon(1e-8));
    CHECK(*f.mu_s == Catch::Approx(0.38209791366965011).epsilon(1e-10));
    CHECK(*f.mu_sc == Catch::Approx(0.37816443710315175).epsilon(1e-9));
    CHECK(*f.mean_n_first == Catch::Approx(1.0104014978156855).epsilon(1e-10));
    CHECK(*f.mean_n_second == Catch::Approx(1.0205202067960902).epsilon(1e-9));
    CHECK(*f.parity_first == Catch::Approx(-0.95085779846545237).epsilon(1e-9));
    CHECK(*f.parity_second == Catch::Approx(-0.96968726321546808).epsilon(1e-9));
}

TEST_CASE("undefined estimators are reported, not thrown", "[estimators]") {
    const auto rec = record_of({1000, 10, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(car(rec), UndefinedResult);
    const auto rows = estimate_all(rec);
    CHECK(rows.size() == 12);
    for (const auto &row : rows) {
        CAPTURE(row.tag);
        CHECK_FALSE(row.value);
        CHECK_FALSE(row.error.empty());
    }
}

TEST_CASE("heralded g2 without triple coincidences", "[estimators]") {
    const auto fom = g2_heralded(record_of({1'000'000, 5000, 3000, 400, 3000, 300, 10, 0}));
    CHECK(fom.value == 0.0);
    CHECK(fom.std_err == Catch::Approx(5700.0 / (400.0 * 300.0)));
}

TEST_CASE("method names", "[estimators]") {
    CHECK(to_string(Method::car) == "car");
    CHECK(to_string(Method::klyshko_corrected) == "klyshko_corrected");
    CHECK(to_string(Method::parity) == "parity");
}

TEST_CASE("mean and parity approach a single photon as CAR grows", "[estimators][property]") {
    ExperimentModel base;
    base.source = TwinBeamState(0.01, 1);
    double prev_n = INFINITY, prev_parity = INFINITY;
    for (double target : {10.0, 30.0, 100.0, 300.0, 1000.0}) {
        const auto f = estimate_from_probabilities(pulse_probabilities(base.with_mean(solve_mean_for_car(base, target))));
        REQUIRE(f.mean_n_second);
        REQUIRE(f.parity_second);
        CHECK(*f.mean_n_second < prev_n);
        CHECK(*f.mean_n_second > 1.0);
        CHECK(*f.parity_second < prev_parity);
        CHECK(*f.parity_second > -1.0);
        prev_n = *f.mean_n_second;
        prev_parity = *f.parity_second;
    }
}
