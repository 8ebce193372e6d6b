#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "varbounds/margins.hpp"
#include "varbounds/numerics.hpp"

using namespace varbounds;

TEST_CASE("find_root locates sqrt(2)") {
    const double root = find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0);
    CHECK(root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("find_root rejects intervals without a sign change") {
    CHECK_THROWS_AS(find_root([](double x) { return x - 5.0; }, 0.0, 1.0), NoBracketError);
    try {
        find_root([](double x) { return x - 5.0; }, 0.0, 1.0);
    } catch (const NoBracketError& e) {
        CHECK(e.f_lo == -5.0);
        CHECK(e.f_hi == -4.0);
    }
}

TEST_CASE("end point override forces a detectable bracket") {
    // sin has a structural positive value at 3; overriding the upper end
    // point with -sin(3) guarantees opposite signs, and the root is pi.
    RootConfig cfg;
    cfg.f_upper_override = -std::sin(3.0);
    const double root = find_root([](double x) { return std::sin(x); }, 3.0, 4.0, cfg);
    CHECK(root == doctest::Approx(std::acos(-1.0)).epsilon(1e-12));
}

TEST_CASE("find_root invariant under sign flip") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    for (int i = 0; i < 50; ++i) {
        const double a = unif(gen);
        auto f = [a](double x) { return std::exp(x) - 2.0 - a * x; };
        auto g = [&](double x) { return -f(x); };
        const double r1 = find_root(f, 0.0, 5.0);
        const double r2 = find_root(g, 0.0, 5.0);
        CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
    }
}

TEST_CASE("shrinking the tolerance refines without jumping") {
    auto f = [](double x) { return std::cos(x) - x; };
    RootConfig loose;
    loose.tolerance = 1e-4;
    const double coarse = find_root(f, 0.0, 1.0, loose);
    RootConfig tight;
    tight.tolerance = 1e-12;
    const double fine = find_root(f, 0.0, 1.0, tight);
    CHECK(std::fabs(coarse - fine) <= 1e-4);
}

TEST_CASE("find_root exhausting the iteration budget reports the bracket") {
    RootConfig cfg;
    cfg.max_iterations = 3;
    cfg.tolerance = 1e-300; // unreachable, force the budget to run out
    try {
        find_root([](double x) { return std::tanh(50.0 * (x - 0.3)); }, 0.0, 1e6, cfg);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.bracket_lo <= 0.3);
        CHECK(e.bracket_hi >= 0.3);
    }
}

TEST_CASE("find_root input validation") {
    auto f = [](double x) { return x; };
    CHECK_THROWS_AS(find_root(f, 1.0, 1.0), std::invalid_argument);
    RootConfig bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(find_root(f, -1.0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("integrate on polynomials and powers") {
    CHECK(integrate([](double x) { return x; }, 0.0, 1.0) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(integrate([](double x) { return std::pow(1.0 + x, -2.0); }, 0.0, 1.0) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integrate matches the closed-form quantile mean") {
    // Mean of the Pareto(2) quantile over [0.99, 0.99875] equals
    // 2 * (sqrt(0.01) - sqrt(0.00125)) / width - 1.
    ParetoMargin par(2.0);
    const double a = 0.99, b = 0.99875;
    const double integral = integrate([&](double y) { return par.quantile(y); }, a, b);
    const double width = b - a;
    const double closed = 2.0 * (std::sqrt(1.0 - a) - std::sqrt(1.0 - b)) - width;
    CHECK(integral == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("integrate is additive over subintervals") {
    auto f = [](double x) { return std::exp(-x) * std::sin(3.0 * x) + 2.0; };
    const double whole = integrate(f, 0.0, 4.0);
    for (double c : {0.5, 1.7, 3.9}) {
        const double split = integrate(f, 0.0, c) + integrate(f, c, 4.0);
        CHECK(whole == doctest::Approx(split).epsilon(1e-9));
    }
}

TEST_CASE("integrate reports when the subdivision budget is exhausted") {
    QuadConfig cfg;
    cfg.rel_tolerance = 1e-14;
    cfg.max_subdivisions = 1;
    auto nasty = [](double x) { return std::sqrt(std::fabs(x - 0.1234567)); };
    try {
        integrate(nasty, 0.0, 1.0, cfg);
        FAIL("expected AccuracyError");
    } catch (const AccuracyError& e) {
        CHECK(std::isfinite(e.estimate));
        CHECK(e.error_bound > 0.0);
    }
}

TEST_CASE("integrate input validation") {
    auto f = [](double x) { return x; };
    CHECK_THROWS_AS(integrate(f, 1.0, 0.0), std::invalid_argument);
    QuadConfig bad;
    bad.rel_tolerance = 0.0;
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, bad), std::invalid_argument);
}
