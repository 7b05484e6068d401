#include <doctest.h>

#include <cmath>

#include "levyhk/errors.hpp"
#include "levyhk/models.hpp"

using namespace levyhk;

TEST_CASE("stable Levy density constant") {
    // Cauchy: nu(r) = 1 / (pi r^2)
    CHECK(stable_nu_constant(1, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
    const auto& m = catalog_model("cauchy");
    CHECK(m.nu(2.0) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-13));
    CHECK(m.psi(3.0) == doctest::Approx(3.0));
}

TEST_CASE("characteristic exponent from the Levy density") {
    const auto& c = catalog_model("cauchy");
    for (double u : {0.01, 1.0, 50.0}) CHECK(psi_from_nu(c, u) == doctest::Approx(u).epsilon(1e-7));
    const auto& g = catalog_model("geostable");
    for (double u : {0.1, 1.0, 30.0}) CHECK(psi_from_nu(1, g.nu, u) == doctest::Approx(std::log1p(u)).epsilon(1e-6));
    const auto& s = catalog_model("stable-0.5");
    CHECK(psi_from_nu(s, 4.0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("subordinator chains") {
    SamplerDescriptor sd{SamplerDescriptor::Kind::SubordinateBrownian,
                         {{SubordinatorStage::Kind::Gamma, 1.0}, {SubordinatorStage::Kind::Stable, 0.5}}};
    CHECK(laplace_exponent(sd, 4.0) == doctest::Approx(std::log(3.0)));
    SamplerDescriptor st{SamplerDescriptor::Kind::DirectStable, {{SubordinatorStage::Kind::Stable, 0.25}}};
    CHECK(laplace_exponent(st, 16.0) == doctest::Approx(2.0));
}

TEST_CASE("catalog registry") {
    auto names = catalog_names();
    CHECK(names.size() == 8);
    CHECK_THROWS_AS(catalog_model("no-such-model"), UsageError);
    const auto& g = catalog_model("geostable");
    CHECK(g.flags.S1);
    CHECK_FALSE(g.flags.S2);
    CHECK(g.sampler.has_value());
    CHECK(catalog_model("logp-1").flags.S2);
    CHECK_FALSE(catalog_model("logp-1").sampler.has_value());
}

TEST_CASE("on-diagonal classification matches the catalog") {
    for (auto& n : catalog_names()) {
        INFO(n);
        CHECK(classify_on_diagonal(catalog_kit(n)) == catalog_model(n).ondiag);
    }
    const auto& g = catalog_model("geostable");
    CHECK(divergence_threshold(g) == doctest::Approx(1.0));
    CHECK(ondiag_divergent(g, 0.5));
    CHECK_FALSE(ondiag_divergent(g, 2.0));
    CHECK(ondiag_divergent(catalog_model("igs"), 100.0));
    CHECK_FALSE(ondiag_divergent(catalog_model("cauchy"), 1e-3));
}

TEST_CASE("structural checks and kappas") {
    auto b = check_condition_B(catalog_model("geostable"));
    CHECK(b.pass);
    auto k = fit_kappas(catalog_model("stable-0.5"));
    CHECK(k.first == doctest::Approx(k.second).epsilon(1e-9));
    const auto& g = catalog_model("geostable");
    CHECK(g.kappa1 <= g.kappa2);
    CHECK(g.kappa1 > 0.0);
}

TEST_CASE("model parameter validation") {
    CHECK_THROWS(make_geometric_stable(1, 2.5));
    CHECK_THROWS(make_stable(1, 0.0));
    CHECK_THROWS(make_logp_model(1, -2.0, 0.8));
}
