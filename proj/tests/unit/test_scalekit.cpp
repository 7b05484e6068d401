#include <doctest.h>

#include <cmath>

#include "levyhk/errors.hpp"
#include "levyhk/scalekit.hpp"

using namespace levyhk;

namespace {

WeightFunction sqrt_weight() {
    WeightFunction w;
    w.eval = [](double s) { return std::sqrt(s); };
    w.beta_small = 0.5;
    w.alpha1 = w.alpha2 = 0.5;
    return w;
}

}  // namespace

TEST_CASE("closed forms for l(s) = s^{1/2}") {
    ScaleKit kit(sqrt_weight());
    for (double r : {1e-4, 0.01, 0.5, 1.0, 3.0, 100.0}) {
        double q = 1.0 / std::sqrt(r);
        CHECK(kit.K(r) == doctest::Approx(2.0 / 3.0 * q).epsilon(1e-10));
        CHECK(kit.L(r) == doctest::Approx(2.0 * q).epsilon(1e-10));
        CHECK(kit.h(r) == doctest::Approx(8.0 / 3.0 * q).epsilon(1e-10));
        CHECK(kit.V(r) == doctest::Approx(1.0 / std::sqrt(8.0 / 3.0 * q)).epsilon(1e-10));
        CHECK(kit.Phi(1.0 / r) == doctest::Approx(kit.L(r)).epsilon(1e-12));
    }
    CHECK(kit.Phi(0.0) == 0.0);
}

TEST_CASE("running sup, generalized inverse and theta") {
    ScaleKit kit(sqrt_weight());
    CHECK(kit.ell_star(4.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(kit.ell_inverse(3.0) == doctest::Approx(9.0).epsilon(1e-6));
    // theta = r v 1/l^{-1}(a/t)
    double cut = 1.0 / kit.ell_inverse(2.0 / 0.5);
    CHECK(kit.theta(2.0, 1e-6, 0.5) == doctest::Approx(cut));
    CHECK(kit.theta(2.0, 0.5, 0.5) == 0.5);
    CHECK_THROWS_AS(kit.ell_star(0.5), DomainError);
    CHECK_THROWS_AS(kit.K(0.0), DomainError);
    CHECK_THROWS_AS(kit.theta(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("derivative identity h' = -2K/r") {
    WeightFunction w;
    w.eval = [](double s) { return 0.5 / (1.0 + 1.0 / s); };
    w.beta_small = 1.0;
    ScaleKit kit(w);
    for (double r : {0.01, 0.3, 2.0, 50.0}) {
        double e = 1e-4 * r;
        double fd = (kit.h(r + e) - kit.h(r - e)) / (2 * e);
        CHECK(fd == doctest::Approx(-2.0 * kit.K(r) / r).epsilon(1e-6));
    }
}

TEST_CASE("scaling checks on exact power laws") {
    auto f = [](double r) { return std::pow(r, 0.7); };
    for (auto k : {ScalingKind::WLSinf, ScalingKind::WUSinf, ScalingKind::WLS0, ScalingKind::WUS0}) {
        auto res = check_scaling(f, k, 0.7, 1.0);
        CHECK(res.pass);
        CHECK(res.constant == doctest::Approx(1.0));
    }
    CHECK_FALSE(check_scaling(f, ScalingKind::WLSinf, 0.9, 1.0).pass);
    CHECK_FALSE(check_scaling(f, ScalingKind::WUSinf, 0.5, 1.0).pass);
    CHECK_FALSE(check_scaling(f, ScalingKind::WLS0, 0.9, 1.0).pass);
    CHECK_FALSE(check_scaling(f, ScalingKind::WUS0, 0.5, 1.0).pass);
    // a larger lower exponent at infinity is still a valid weaker claim from below
    CHECK(check_scaling(f, ScalingKind::WLSinf, 0.5, 1.0).pass);
}

TEST_CASE("almost monotone checks") {
    auto inc = [](double r) { return std::log(1.0 + r); };
    CHECK(check_almost_monotone(inc, ScalingKind::AlmostIncreasing, 1.0).pass);
    auto dec = [](double r) { return 1.0 / r; };
    CHECK(check_almost_monotone(dec, ScalingKind::AlmostDecreasing, 1.0).pass);
    CHECK_FALSE(check_almost_monotone(dec, ScalingKind::AlmostIncreasing, 1.0).pass);
}

TEST_CASE("logspace and weight validation") {
    auto v = logspace(1e-2, 1e2, 5);
    REQUIRE(v.size() == 5);
    CHECK(v.front() == doctest::Approx(1e-2));
    CHECK(v[2] == doctest::Approx(1.0));
    CHECK(v.back() == doctest::Approx(1e2));
    WeightFunction w = sqrt_weight();
    w.alpha2 = 1.2;
    CHECK_THROWS_AS(validate_weight(w), ModelError);
    WeightFunction none;
    CHECK_THROWS_AS(ScaleKit{none}, ModelError);
}
