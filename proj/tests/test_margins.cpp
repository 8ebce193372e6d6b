#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "varbounds/margins.hpp"
#include "varbounds/numerics.hpp"

using namespace varbounds;

TEST_CASE("pareto quantile closed form") {
    ParetoMargin par(2.0);
    CHECK(par.quantile(0.75) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(par.quantile(0.0) == 0.0);
    CHECK(par.quantile(0.99) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(std::isinf(par.quantile(1.0)));
    CHECK_THROWS_AS(par.quantile(-0.1), std::domain_error);
    CHECK_THROWS_AS(par.quantile(1.1), std::domain_error);
}

TEST_CASE("pareto survival closed form") {
    CHECK(ParetoMargin(2.0).survival(1.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ParetoMargin(2.0).survival(0.0) == 1.0);
    CHECK(ParetoMargin(1.0).survival(9.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(ParetoMargin(2.0).survival(-1.0), std::domain_error);
}

TEST_CASE("pareto shape validation") {
    CHECK_THROWS_AS(ParetoMargin(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ParetoMargin(-1.0), std::invalid_argument);
    CHECK(ParetoMargin(0.5).has_finite_mean() == false);
    CHECK(ParetoMargin(1.0).has_finite_mean() == false);
    CHECK(ParetoMargin(1.5).has_finite_mean() == true);
}

TEST_CASE("expected shortfall closed form and error path") {
    CHECK(expected_shortfall_pareto(2.0, 0.99) == doctest::Approx(19.0).epsilon(1e-12));
    CHECK(expected_shortfall_pareto(2.0, 0.75) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(expected_shortfall_pareto(1.0, 0.99), std::domain_error);
    CHECK_THROWS_AS(expected_shortfall_pareto(0.5, 0.99), std::domain_error);
    CHECK_THROWS_AS(expected_shortfall_pareto(2.0, 1.0), std::domain_error);
}

TEST_CASE("expected shortfall agrees with tail quantile quadrature") {
    // ES_alpha = (1/(1-alpha)) Int_alpha^1 F^-(p) dp. The quantile blows up
    // at 1, so the oracle integrates under the substitution p = 1 - u^4,
    // which keeps the integrand bounded for theta > 4/3.
    for (double theta : {1.5, 2.0, 5.0}) {
        for (double alpha : {0.9, 0.99}) {
            ParetoMargin par(theta);
            QuadConfig quad;
            quad.rel_tolerance = 1e-12;
            quad.max_subdivisions = 4000;
            const double u_hi = std::pow(1.0 - alpha, 0.25);
            // F^-(1 - u^4) * 4u^3 = 4(u^{3-4/theta} - u^3), bounded on [0, u_hi]
            const double integral = integrate(
                [&](double u) {
                    return 4.0 * (std::pow(u, 3.0 - 4.0 / theta) - u * u * u);
                },
                0.0, u_hi, quad);
            const double es = expected_shortfall_pareto(theta, alpha);
            CHECK(integral / (1.0 - alpha) == doctest::Approx(es).epsilon(1e-8));
        }
    }
}

TEST_CASE("survival inverts quantile across shapes") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double theta : {0.5, 1.0, 2.0, 5.0}) {
        ParetoMargin par(theta);
        for (int i = 0; i < 1000; ++i) {
            const double p = unif(gen);
            const double back = par.survival(par.quantile(p));
            CHECK(back == doctest::Approx(1.0 - p).epsilon(1e-12));
        }
    }
}

TEST_CASE("quantile is nondecreasing") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double theta : {0.5, 1.0, 2.0, 5.0}) {
        ParetoMargin par(theta);
        for (int i = 0; i < 200; ++i) {
            double p1 = unif(gen), p2 = unif(gen);
            if (p1 > p2) std::swap(p1, p2);
            CHECK(par.quantile(p1) <= par.quantile(p2));
        }
    }
}

TEST_CASE("marginal model wraps pareto with metadata") {
    const MarginalModel m = MarginalModel::pareto(2.0);
    CHECK(m.quantile(0.99) == doctest::Approx(9.0));
    CHECK(m.survival(1.0) == doctest::Approx(0.25));
    CHECK(m.support_infimum() == 0.0);
    CHECK(m.has_finite_mean());
    CHECK(m.density_decreasing_from() == 0.0);
    REQUIRE(m.pareto_shape().has_value());
    CHECK(*m.pareto_shape() == 2.0);
    REQUIRE(m.has_survival_integral());
    CHECK(m.survival_integral(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("pareto survival integral matches quadrature") {
    for (double theta : {0.5, 1.0, 2.0, 5.0}) {
        ParetoMargin par(theta);
        for (auto [lo, hi] : std::vector<std::pair<double, double>>{
                 {0.0, 3.0}, {1.0, 1.0000001}, {2.0, 50.0}}) {
            const double closed = par.survival_integral(lo, hi);
            const double numeric =
                integrate([&](double x) { return par.survival(x); }, lo, hi);
            CHECK(closed == doctest::Approx(numeric).epsilon(1e-9));
        }
    }
}

TEST_CASE("generic marginal model without closed forms") {
    // Uniform on [0, 1]: quantile is the identity, bounded at 1.
    MarginalModel uniform([](double p) { return p; },
                          [](double x) { return 1.0 - std::fmin(x, 1.0); }, 0.0, true);
    CHECK(uniform.quantile(1.0) == 1.0);
    CHECK_FALSE(uniform.has_survival_integral());
    CHECK_FALSE(uniform.pareto_shape().has_value());
}
