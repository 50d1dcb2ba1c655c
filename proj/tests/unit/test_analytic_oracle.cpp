#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "hpl/analytic_oracle.hpp"
#include "hpl/errors.hpp"
#include "oracles.hpp"

using namespace hpl;

namespace {

ExperimentModel model_at(double mean, int modes = 1, double dark = 0.0) {
    ExperimentModel m;
    m.source = TwinBeamState(mean, modes);
    m.dark_prob = dark;
    return m;
}

} // namespace

TEST_CASE("pulse probabilities at mean 0.01", "[analytic_oracle]") {
    // Frozen from a 40-digit evaluation of the generating function.
    const auto p = pulse_probabilities(model_at(0.01));
    CHECK(p.p_i == Catch::Approx(0.0031997288703262527).epsilon(1e-11).margin(1e-13));
    CHECK(p.p_s1 == Catch::Approx(0.0018864346385331723).epsilon(1e-11).margin(1e-13));
    CHECK(p.p_s == Catch::Approx(0.003765765406762438).epsilon(1e-11).margin(1e-13));
    CHECK(p.p_coinc == Catch::Approx(0.0012220519608415702).epsilon(1e-10).margin(1e-13));
    CHECK(car_theory(model_at(0.01)) == Catch::Approx(101.41991232605904).epsilon(1e-9));
    CHECK(g2h_theory(model_at(0.01)) == Catch::Approx(0.032823260843414636).epsilon(1e-8));
    CHECK(g2_unconditional_theory(model_at(0.01)) == Catch::Approx(1.9962342345932376).epsilon(1e-10));
}

TEST_CASE("multimode source with dark counts", "[analytic_oracle]") {
    const auto m = model_at(0.05, 3, 1e-4);
    const auto p = pulse_probabilities(m);
    CHECK(p.p_i == Catch::Approx(0.015978196128017138).epsilon(1e-11).margin(1e-13));
    CHECK(car_theory(m) == Catch::Approx(20.716481594875126).epsilon(1e-9));
    CHECK(g2h_theory(m) == Catch::Approx(0.10491448662874092).epsilon(1e-8));
    CHECK(g2_unconditional_theory(m) == Catch::Approx(1.3256928932635691).epsilon(1e-10));
}

TEST_CASE("oracle agrees with the generating function everywhere", "[analytic_oracle][property]") {
    for (int k : {1, 2, 4}) {
        for (double mean : {1e-3, 0.02, 0.3, 1.5}) {
            for (double dark : {0.0, 1e-5, 1e-2}) {
                for (double split : {0.5, 0.3}) {
                    CAPTURE(k, mean, dark, split);
                    auto m = model_at(mean, k, dark);
                    m.signal_split = split;
                    const auto p = pulse_probabilities(m);
                    const auto ref = [&](unsigned mask) {
                        return testing::pgf_all_click(mean, k, m.eta_idler, m.eta_signal, split, dark, mask);
                    };
                    CHECK(p.p_i == Catch::Approx(ref(1)).epsilon(1e-10).margin(1e-13));
                    CHECK(p.p_s1 == Catch::Approx(ref(2)).epsilon(1e-10).margin(1e-13));
                    CHECK(p.p_s2 == Catch::Approx(ref(4)).epsilon(1e-10).margin(1e-13));
                    CHECK(p.p_s1s2 == Catch::Approx(ref(6)).epsilon(1e-9).margin(1e-13));
                    CHECK(p.p_is1 == Catch::Approx(ref(3)).epsilon(1e-9).margin(1e-13));
                    CHECK(p.p_is2 == Catch::Approx(ref(5)).epsilon(1e-9).margin(1e-13));
                    CHECK(p.p_is1s2 == Catch::Approx(ref(7)).epsilon(1e-8).margin(1e-13));
                    CHECK(p.p_s == Catch::Approx(ref(2) + ref(4) - ref(6)).epsilon(1e-10).margin(1e-13));
                    CHECK(p.p_coinc == Catch::Approx(ref(3) + ref(5) - ref(7)).epsilon(1e-9).margin(1e-13));
                }
            }
        }
    }
}

TEST_CASE("CAR inversion", "[analytic_oracle]") {
    const double mean = solve_mean_for_car(model_at(0.01), 97.14);
    CHECK(mean == Catch::Approx(0.010447116149254638).epsilon(1e-8));
    CHECK(car_theory(model_at(mean)) == Catch::Approx(97.14).epsilon(1e-9));
    for (double target : {10.0, 1000.0}) {
        const double m = solve_mean_for_car(model_at(0.01), target);
        CHECK(car_theory(model_at(m)) == Catch::Approx(target).epsilon(1e-8));
    }
}

TEST_CASE("CAR falls with brightness", "[analytic_oracle][property]") {
    double prev = car_theory(model_at(1e-4));
    for (double mean = 2e-4; mean < 2.0; mean *= 1.5) {
        const double car = car_theory(model_at(mean));
        CHECK(car < prev);
        prev = car;
    }
}

TEST_CASE("heralded state", "[analytic_oracle]") {
    const auto m = model_at(0.01);
    const auto h = heralded_state(m);
    CHECK(h[0] == 0.0);
    CHECK(h[2] / h[1] == Catch::Approx(0.016623762376237624).epsilon(1e-12));
    CHECK(h.total() + h.tail_bound() == Catch::Approx(1.0).epsilon(1e-12));
    const auto mom = heralded_mean_and_parity_theory(m);
    CHECK(mom.mean_n == Catch::Approx(1.0167682738409705).epsilon(1e-10));
    CHECK(mom.parity == Catch::Approx(-0.96729827760528183).epsilon(1e-10));
}

TEST_CASE("idler split swaps arm efficiencies", "[analytic_oracle]") {
    const auto m = model_at(0.05).with_idler_split();
    CHECK(m.eta_idler == 0.378);
    CHECK(m.eta_signal == 0.321);
}

TEST_CASE("model validation", "[analytic_oracle]") {
    auto m = model_at(0.01);
    m.eta_idler = 1.2;
    CHECK_THROWS_AS(pulse_probabilities(m), DomainError);
    m = model_at(0.01);
    m.signal_split = -0.1;
    CHECK_THROWS_AS(pulse_probabilities(m), DomainError);
    m = model_at(50.0);
    CHECK_THROWS_AS(pulse_probabilities(m), TruncationError);
    m.n_max = 2000;
    CHECK_NOTHROW(pulse_probabilities(m));
}

TEST_CASE("probabilities are ordered by detector subset", "[analytic_oracle][property]") {
    for (double mean : {1e-4, 0.01, 0.3, 2.0})
        for (int modes : {1, 4})
            for (double dark : {0.0, 1e-3})
                for (double eta : {0.05, 0.5, 1.0}) {
                    auto m = model_at(mean, modes, dark);
                    m.eta_signal = eta;
                    m.signal_split = 0.3;
                    const auto p = pulse_probabilities(m);
                    for (double v : {p.p_i, p.p_s1, p.p_s2, p.p_s, p.p_is1, p.p_is2, p.p_s1s2, p.p_is1s2, p.p_coinc}) {
                        CHECK(v >= 0.0);
                        CHECK(v <= 1.0);
                    }
                    CHECK(p.p_is1s2 <= std::min({p.p_is1, p.p_is2, p.p_s1s2}));
                    CHECK(p.p_is1 <= std::min(p.p_i, p.p_s1));
                    CHECK(p.p_is2 <= std::min(p.p_i, p.p_s2));
                    CHECK(p.p_s1s2 <= std::min(p.p_s1, p.p_s2));
                    CHECK(p.p_coinc <= std::min(p.p_i, p.p_s));
                    CHECK(std::max(p.p_s1, p.p_s2) <= p.p_s);
                    CHECK(p.p_s == Catch::Approx(p.p_s1 + p.p_s2 - p.p_s1s2).margin(1e-15));
                    CHECK(p.p_coinc == Catch::Approx(p.p_is1 + p.p_is2 - p.p_is1s2).margin(1e-15));
                }
}

TEST_CASE("CAR slope over low brightness", "[analytic_oracle][property]") {
    const double lo = 1e-4, hi = 1e-3;
    const double slope = std::log(car_theory(model_at(hi)) / car_theory(model_at(lo))) / std::log(hi / lo);
    CHECK(std::abs(slope + 1.0) <= 0.01);
}

TEST_CASE("heralded g2 falls with signal efficiency", "[analytic_oracle][property]") {
    auto m = model_at(0.0104471);
    double prev = INFINITY;
    for (double eta : {0.01, 0.1, 0.321, 0.7, 1.0}) {
        m.eta_signal = eta;
        const double g = g2h_theory(m);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("heralded moments match the conditional distribution", "[analytic_oracle][property]") {
    for (double mean : {0.001, 0.05, 0.5})
        for (int modes : {1, 3}) {
            const auto m = model_at(mean, modes, 1e-4);
            const auto h = heralded_state(m);
            double odd = 0, norm = 0;
            for (int n = 0; n <= h.n_max(); ++n) {
                norm += h[n];
                if (n % 2)
                    odd += h[n];
            }
            CHECK(std::abs(norm + h.tail_bound() - 1.0) <= 1e-12);
            const auto mom = heralded_mean_and_parity_theory(m);
            CHECK(std::abs(mom.parity - (1.0 - 2.0 * odd)) <= 1e-12);
            CHECK(std::abs(mom.mean_n - h.mean()) <= 1e-12);
        }
}
