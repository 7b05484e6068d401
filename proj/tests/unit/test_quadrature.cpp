#include <doctest.h>

#include <cmath>

#include "levyhk/errors.hpp"
#include "levyhk/quadrature.hpp"

using namespace levyhk;

TEST_CASE("adaptive Gauss-Kronrod on smooth integrands") {
    auto r = quad::integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    auto e = quad::integrate([](double x) { return std::exp(-x); }, 0.0, 30.0);
    CHECK(e.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-13));
    // narrow interior peak: 200 atan(100)
    auto pk = quad::integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
    CHECK(pk.value == doctest::Approx(200.0 * std::atan(100.0)).epsilon(1e-11));
    // endpoint singularity is not resolved, but the error estimate says so
    auto s = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-12, 1e-10});
    CHECK(std::abs(s.value - 2.0) <= s.error);
}

TEST_CASE("split integration and a single panel") {
    auto f = [](double x) { return std::abs(x - 0.3); };
    auto r = quad::integrate_split(f, 0.0, 1.0, {0.3});
    CHECK(r.value == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-14));
    // Kronrod 21 integrates degree 31 polynomials exactly
    auto p = quad::panel([](double x) { return std::pow(x, 20); }, 0.0, 1.0);
    CHECK(p.value == doctest::Approx(1.0 / 21.0).epsilon(1e-14));
    // duplicate or out-of-range cuts are harmless
    auto d = quad::integrate_split([](double x) { return std::cos(x); }, 0.0, 2.0, {1.0, 1.0, 1.0 + 1e-15, 5.0});
    CHECK(d.value == doctest::Approx(std::sin(2.0)).epsilon(1e-13));
}

TEST_CASE("kernel zeros") {
    CHECK(quad::kernel_zero(quad::Kernel::Cos, 1) == doctest::Approx(M_PI / 2));
    CHECK(quad::kernel_zero(quad::Kernel::Sin, 3) == doctest::Approx(3 * M_PI));
    CHECK(quad::kernel_zero(quad::Kernel::BesselJ0, 1) == doctest::Approx(2.404825557695773).epsilon(1e-13));
    CHECK(std::abs(quad::kernel_value(quad::Kernel::BesselJ0, quad::kernel_zero(quad::Kernel::BesselJ0, 5))) < 1e-13);
}

TEST_CASE("Euler averaging accelerates alternating series") {
    std::vector<double> ps;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
        s += (k % 2 ? 1.0 : -1.0) / k;
        ps.push_back(s);
    }
    CHECK(std::abs(ps.back() - std::log(2.0)) > 1e-2);
    CHECK(quad::euler_average(ps, 10) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("oscillatory tails") {
    // \int_{pi/2}^inf cos(u) e^{-u} du = -e^{-pi/2} / 2
    auto a = quad::oscillatory_tail([](double u) { return std::exp(-u); }, quad::Kernel::Cos, 1.0, 1);
    CHECK(a.value == doctest::Approx(-0.5 * std::exp(-M_PI / 2)).epsilon(1e-10));
    // slowly decaying amplitude: \int_pi^inf sin(u)/u du = pi/2 - Si(pi)
    auto b = quad::oscillatory_tail([](double u) { return 1.0 / u; }, quad::Kernel::Sin, 1.0, 1);
    CHECK(b.value == doctest::Approx(M_PI / 2 - 1.851937051982466).epsilon(1e-9));
    // frequency scaling: \int_{pi/2w}^inf cos(w u) e^{-u} du
    double w = 3.0;
    auto c = quad::oscillatory_tail([](double u) { return std::exp(-u); }, quad::Kernel::Cos, w, 1);
    double a0 = M_PI / (2 * w);
    double exact = std::exp(-a0) * (w * std::sin(w * a0) - std::cos(w * a0)) / (1 + w * w);
    CHECK(c.value == doctest::Approx(-exact).epsilon(1e-10));
}

TEST_CASE("oscillatory tail budget") {
    quad::OscillatoryOptions opt;
    opt.max_panels = 3;
    opt.min_panels = 1;
    opt.rel_tol = 1e-15;
    opt.abs_tol = 0.0;
    CHECK_THROWS_AS(quad::oscillatory_tail([](double u) { return 1.0 / std::sqrt(u); }, quad::Kernel::Sin, 1.0, 1, opt),
                    NumericError);
}
