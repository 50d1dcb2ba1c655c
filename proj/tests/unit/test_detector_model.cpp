#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hpl/detector_model.hpp"
#include "hpl/errors.hpp"
#include "oracles.hpp"

using namespace hpl;

TEST_CASE("binomial coefficients", "[detector_model]") {
    CHECK(binomial(5, 2) == 10.0);
    CHECK(binomial(64, 32) == 1832624140942590534.0);
    CHECK(binomial(3, 5) == 0.0);
    CHECK(binomial(100, 50) == Catch::Approx(1.0089134454556419e29).epsilon(1e-12));
}

TEST_CASE("POVM weights sum to one", "[detector_model][property]") {
    for (int bins : {1, 2, 3, 4, 8}) {
        for (double eta : {0.0, 0.05, 0.321, 0.9, 1.0}) {
            for (double dark : {0.0, 1e-6, 1e-3, 0.2}) {
                const ClickDetectorConfig cfg{bins, eta, dark};
                std::vector<POVMDiagonal> elems;
                for (int k = 0; k <= bins; ++k)
                    elems.push_back(povm_click_diagonal(cfg, k, 40));
                for (int n = 0; n <= 40; ++n) {
                    CAPTURE(bins, eta, dark, n);
                    double sum = 0.0;
                    for (const auto &e : elems) {
                        CHECK(e.weights[n] >= -1e-12);
                        sum += e.weights[n];
                    }
                    CHECK(std::abs(sum - 1.0) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("POVM matches photon-by-photon enumeration", "[detector_model]") {
    for (int bins : {1, 2, 3}) {
        for (int n = 0; n <= 6; ++n) {
            for (int k = 0; k <= bins; ++k) {
                CAPTURE(bins, n, k);
                const auto e = povm_click_diagonal({bins, 0.37, 0.0}, k, 6);
                CHECK(e.weights[n] == Catch::Approx(testing::enumerate_clicks(bins, 0.37, n, k)).margin(1e-14));
            }
        }
    }
}

TEST_CASE("reduced single-click element", "[detector_model]") {
    const double eta = 0.321;
    const auto reduced = reduced_O1_diagonal(eta, 30);
    const auto full = povm_click_diagonal({2, eta, 0.0}, 1, 30);
    for (int n = 0; n <= 30; ++n)
        CHECK(reduced.weights[n] == Catch::Approx(full.weights[n]).margin(1e-15));
    CHECK(reduced.weights[0] == 0.0);
    CHECK(reduced.weights[1] == Catch::Approx(eta));
    CHECK(reduced.weights[2] == Catch::Approx(2 * ((1 - eta / 2) * (1 - eta / 2) - (1 - eta) * (1 - eta))));
}

TEST_CASE("Taylor coefficients of the single-click element", "[detector_model]") {
    CHECK(taylor_O1_coefficients(0.321, 1) == std::vector<double>{0.321});
    const auto c = taylor_O1_coefficients(0.321, 2);
    REQUIRE(c.size() == 2);
    CHECK(c[1] == Catch::Approx(-0.07728075).epsilon(1e-14));
    CHECK_THROWS_AS(taylor_O1_coefficients(0.3, 3), DomainError);
}

TEST_CASE("second-order expansion stays within the third-order term", "[detector_model][property]") {
    for (double eta : {0.001, 0.01, 0.05, 0.1, 0.3}) {
        const auto coeffs = taylor_O1_coefficients(eta, 2);
        const int n_top = static_cast<int>(std::floor(0.3 / eta + 1e-12));
        const auto exact = reduced_O1_diagonal(eta, n_top);
        for (int n = 0; n <= n_top; ++n) {
            CAPTURE(eta, n);
            const double approx = falling_factorial_series(coeffs, n);
            const double third = 1.75 * binomial(n, 3) * eta * eta * eta;
            CHECK(std::abs(exact.weights[n] - approx) <= third * (1 + 1e-6) + 1e-15);
        }
    }
}

TEST_CASE("binomial loss", "[detector_model]") {
    SECTION("thermal stays thermal with scaled mean") {
        const auto d = binomial_loss_transform(thermal_pmf(0.4, 120), 0.3);
        const auto ref = thermal_pmf(0.12, 120);
        for (int n = 0; n <= 60; ++n)
            CHECK(d[n] == Catch::Approx(ref[n]).epsilon(1e-10).margin(1e-300));
    }
    SECTION("losses compose multiplicatively") {
        const auto src = multimode_total_pmf(TwinBeamState(0.8, 3), 80);
        for (double a : {0.1, 0.5, 0.9}) {
            for (double b : {0.2, 0.7}) {
                const auto twice = binomial_loss_transform(binomial_loss_transform(src, a), b);
                const auto once = binomial_loss_transform(src, a * b);
                for (int n = 0; n <= 80; ++n)
                    CHECK(twice[n] == Catch::Approx(once[n]).epsilon(1e-10).margin(1e-16));
            }
        }
    }
    SECTION("large photon numbers use the log-gamma path") {
        const auto d = binomial_loss_transform(thermal_pmf(30.0, 500), 0.5);
        CHECK(d.mean() == Catch::Approx(thermal_pmf(30.0, 500).mean() * 0.5).epsilon(1e-10));
    }
    CHECK_THROWS_AS(binomial_loss_transform(thermal_pmf(0.1, 5), 1.5), DomainError);
}

TEST_CASE("click probability", "[detector_model]") {
    const auto d = thermal_pmf(0.05, certified_cutoff(TwinBeamState(0.05, 1), 1e-30));
    const double eta = 0.4, dark = 1e-3;
    const double p1 = click_probability(d, {1, eta, dark}, 1);
    // 1 - exp(-dark) E[(1-eta)^n] with the thermal generating function
    CHECK(p1 == Catch::Approx(1 - std::exp(-dark) / (1 + eta * 0.05)).epsilon(1e-12));
    // Bernoulli darks, as in the simulator, differ only at second order in dark
    const double bernoulli = 1 - (1 - 1e-7) / (1 + eta * 0.05);
    CHECK(std::abs(click_probability(d, {1, eta, 1e-7}, 1) - bernoulli) < 1e-7);
    CHECK_THROWS_AS(click_probability(d, povm_click_diagonal({1, eta, 0.0}, 1, d.n_max() + 1)), DomainError);
}

TEST_CASE("detector config validation", "[detector_model]") {
    CHECK_THROWS_AS(povm_click_diagonal({0, 0.5, 0.0}, 0, 3), DomainError);
    CHECK_THROWS_AS(povm_click_diagonal({2, -0.1, 0.0}, 0, 3), DomainError);
    CHECK_THROWS_AS(povm_click_diagonal({2, 0.5, -1e-3}, 0, 3), DomainError);
    CHECK_THROWS_AS(povm_click_diagonal({2, 0.5, 0.0}, 3, 3), DomainError);
}
