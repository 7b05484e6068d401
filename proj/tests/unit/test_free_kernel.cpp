#include <doctest.h>

#include <cmath>

#include "levyhk/errors.hpp"
#include "levyhk/free_kernel.hpp"

using namespace levyhk;

TEST_CASE("Cauchy density matches the closed form") {
    const auto& m = catalog_model("cauchy");
    for (double t : {0.1, 1.0, 5.0})
        for (double r : {0.0, 0.3, 2.0, 40.0}) {
            auto v = free_density(m, t, r);
            CHECK_FALSE(v.divergent);
            CHECK(v.density == doctest::Approx(t / (M_PI * (t * t + r * r))).epsilon(1e-9));
        }
}

TEST_CASE("on-diagonal divergence of the geometric stable density") {
    const auto& m = catalog_model("geostable");
    auto a = free_density(m, 0.5, 0.0);
    CHECK(a.divergent);
    CHECK(std::isinf(a.density));
    // p(2, 0) = (1/pi) \int_0^inf (1+u)^{-2} du = 1/pi
    auto b = free_density(m, 2.0, 0.0);
    CHECK_FALSE(b.divergent);
    CHECK(b.density == doctest::Approx(1.0 / M_PI).epsilon(1e-8));
    CHECK(free_density(catalog_model("igs"), 50.0, 0.0).divergent);
    // off the diagonal the density stays finite
    auto c = free_density(m, 0.5, 0.1);
    CHECK(std::isfinite(c.density));
    CHECK(c.density > 0.0);
}

TEST_CASE("argument validation") {
    const auto& m = catalog_model("cauchy");
    CHECK_THROWS_AS(free_density(m, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(free_density(m, 1.0, -1.0), DomainError);
    CHECK_THROWS_AS(free_density(m, std::nan(""), 1.0), DomainError);
}

TEST_CASE("total mass") {
    CHECK(total_mass(catalog_model("cauchy"), 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(total_mass(catalog_model("stable-0.5"), 0.7) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("Chapman-Kolmogorov for Cauchy") {
    double err = chapman_kolmogorov_check(catalog_model("cauchy"), 0.4, 0.6, {0.0, 0.5, 2.0});
    CHECK(err < 1e-6);
}

TEST_CASE("kernel table interpolates the exact density") {
    const auto& m = catalog_model("cauchy");
    KernelTable tab(m, 1e-2, 2.0, 1e-3, 10.0, 24);
    for (double s : {0.013, 0.2, 1.7})
        for (double r : {0.002, 0.05, 0.9, 7.0}) {
            double ex = free_density(m, s, r).density;
            CHECK(tab(s, r) == doctest::Approx(ex).epsilon(5e-3));
        }
    // off-table queries fall back to direct evaluation
    CHECK(tab(5.0, 0.5) == doctest::Approx(5.0 / (M_PI * 25.25)).epsilon(1e-9));
}

TEST_CASE("free envelopes") {
    const auto& m = catalog_model("geostable");
    const auto& kit = catalog_kit("geostable");
    EnvelopeParams p;
    p.b = 0.0;
    CHECK(envelope_free_lower(m, kit, p, 0.5, 2.0) == doctest::Approx(0.5 * m.nu(2.0)));
    CHECK(envelope_free_upper(m, kit, p, 0.5, 2.0, Regime::S1) == doctest::Approx(0.5 / 2.0 * kit.K(2.0)));
    CHECK(regime_of(m) == Regime::S1);
    CHECK_THROWS_AS(envelope_free_upper(m, kit, p, 0.5, 2.0, Regime::S2), UsageError);
    CHECK_THROWS_AS(envelope_free_lower(m, kit, p, 0.5, 0.0), DomainError);
    CHECK_THROWS_AS(ondiag_upper_S2(m, kit, p, 1.0), UsageError);
    // S-2 on-diagonal bound is finite for a stable model
    const auto& s = catalog_model("stable-0.5");
    CHECK(std::isfinite(ondiag_upper_S2(s, catalog_kit("stable-0.5"), p, 0.3)));
}
