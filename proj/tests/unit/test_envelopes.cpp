#include <doctest.h>

#include <cmath>

#include "levyhk/envelopes.hpp"
#include "levyhk/errors.hpp"

using namespace levyhk;

namespace {

const ScaleKit& sqrt_kit() {
    static ScaleKit kit([] {
        WeightFunction w;
        w.eval = [](double s) { return std::sqrt(s); };
        w.beta_small = 0.5;
        w.alpha1 = w.alpha2 = 0.5;
        return w;
    }());
    return kit;
}

}  // namespace

TEST_CASE("boundary factor") {
    // L(1) = 2 for l(s) = sqrt(s); t L = 4 gives 1/2
    CHECK(boundary_factor(sqrt_kit(), 2.0, 1.0) == doctest::Approx(0.5));
    CHECK(boundary_factor(sqrt_kit(), 0.1, 1.0) == 1.0);
    CHECK_THROWS_AS(boundary_factor(sqrt_kit(), 0.0, 1.0), DomainError);
}

TEST_CASE("deep interior reduces to the free lower shape") {
    const auto& m = catalog_model("geostable");
    const auto& kit = catalog_kit("geostable");
    auto env = make_dirichlet_envelope(m, kit, Domain::intervals({{-1e6, 1e6}}), DirichletRegime::S1Small);
    env.lower.b = 0.7;
    auto x = make_point({0.0}), y = make_point({0.4});
    CHECK(dirichlet_lower(env, 0.05, x, y) == doctest::Approx(envelope_free_lower(m, kit, env.lower, 0.05, 0.4)));
    CHECK(dirichlet_upper(env, 0.05, x, y) ==
          doctest::Approx(envelope_free_lower(m, kit, env.upper, 0.05, 0.4)));
    CHECK_THROWS_AS(dirichlet_lower(env, 0.05, x, x), DomainError);
    CHECK_THROWS_AS(dirichlet_lower(env, 0.05, x, make_point({2e6})), UsageError);
}

TEST_CASE("S-2 envelopes use the theta radius") {
    const auto& m = catalog_model("stable-0.5");
    const auto& kit = catalog_kit("stable-0.5");
    auto dom = Domain::intervals({{-1.0, 1.0}});
    auto env = make_dirichlet_envelope(m, kit, dom, DirichletRegime::S2Small);
    env.lower.b = env.upper.b = 0.0;
    auto x = make_point({0.0});
    double t = 0.01;
    // above the cutoff theta(a, r, t) = r
    auto y = make_point({0.5});
    REQUIRE(kit.theta(env.eta, 0.5, t) == 0.5);
    double bf = boundary_factor(kit, t, 1.0) * boundary_factor(kit, t, 0.5);
    CHECK(dirichlet_lower(env, t, x, y) == doctest::Approx(bf * t * m.nu(0.5)));
    // on the diagonal the radius is the cutoff, so the bound stays finite
    CHECK(std::isfinite(dirichlet_upper(env, t, x, x)));
    CHECK(dirichlet_upper(env, t, x, x) > 0.0);
}

TEST_CASE("regime requirements") {
    auto dom = Domain::intervals({{-1.0, 1.0}});
    CHECK_THROWS_AS(make_dirichlet_envelope(catalog_model("cauchy"), catalog_kit("cauchy"), dom,
                                            DirichletRegime::S1Small),
                    UsageError);
    CHECK_THROWS_AS(make_dirichlet_envelope(catalog_model("geostable"), catalog_kit("geostable"), dom,
                                            DirichletRegime::S2Small),
                    UsageError);
    CHECK_THROWS_AS(make_dirichlet_envelope(catalog_model("geostable"), catalog_kit("geostable"),
                                            Domain::ball(make_point({0.0, 0.0}), 1.0), DirichletRegime::S1Small),
                    UsageError);
    auto env = make_dirichlet_envelope(catalog_model("geostable"), catalog_kit("geostable"), dom,
                                       DirichletRegime::L2Large);
    CHECK_THROWS_AS(dirichlet_lower(env, 0.1, make_point({0.0}), make_point({0.5})), UsageError);
}

TEST_CASE("survival envelope saturates deep inside") {
    const auto& kit = catalog_kit("geostable");
    auto env = make_dirichlet_envelope(catalog_model("geostable"), kit, Domain::intervals({{-1.0, 1.0}}),
                                       DirichletRegime::S1Small);
    auto b = survival_envelope(env, 1e-4, make_point({0.0}));
    CHECK(b.lower == 1.0);
    CHECK(b.upper == 1.0);
    auto n = survival_envelope(env, 1.0, make_point({0.999}));
    CHECK(n.lower == doctest::Approx(kit.V(1e-3)).epsilon(1e-6));
}

TEST_CASE("large time L-2 bound is log-linear in t") {
    const auto& kit = catalog_kit("geostable");
    auto env = make_dirichlet_envelope(catalog_model("geostable"), kit, Domain::intervals({{-1.0, 1.0}}),
                                       DirichletRegime::L2Large);
    env.lambda = 0.8;
    auto x = make_point({0.1}), y = make_point({-0.3});
    double a = std::log(dirichlet_large_time(env, 2.0, x, y).upper);
    double b = std::log(dirichlet_large_time(env, 3.0, x, y).upper);
    double c = std::log(dirichlet_large_time(env, 5.0, x, y).upper);
    CHECK(b - a == doctest::Approx(-0.8));
    CHECK(c - b == doctest::Approx(-1.6));
}

TEST_CASE("F1 closed form for log-type models") {
    double p = 1.0, t = 0.1, a2 = 1.0;
    double edge = std::exp(-a2 * std::pow(t, -1.0 / p));
    CHECK(f1_first_branch(p, t, edge * (1 - 1e-9), a2));
    CHECK_FALSE(f1_first_branch(p, t, edge * (1 + 1e-9), a2));
    CHECK(f1_logp(p, t, edge * 0.5, 1.0, a2, 1.0) == doctest::Approx(std::exp(10.0)));
    // a3 = 0 leaves t r^{-1} frak L(1/r)^p
    double r = 0.2;
    CHECK(f1_logp(p, t, r, 1.0, a2, 0.0) == doctest::Approx(t / r * frak_L(1.0 / r)));
    CHECK_THROWS_AS(f1_logp(0.0, t, r, 1.0, a2, 1.0), UsageError);
    CHECK_THROWS_AS(f1_logp(-0.5, t, r, 1.0, a2, 1.0), UsageError);
    CHECK(logp_case3(0.5, r, 0.0) == doctest::Approx(0.5 / r / frak_L(1.0 / r)));
    CHECK(frak_L(0.0) == doctest::Approx(1.0));
}

TEST_CASE("Green envelopes") {
    const auto& m = catalog_model("geostable");
    const auto& kit = catalog_kit("geostable");
    auto g = make_green_envelope(m, kit, Domain::intervals({{-1.0, 1.0}}));
    auto x = make_point({0.2}), y = make_point({-0.5});
    CHECK_THROWS_AS(green_shape(g, x, x), DomainError);
    CHECK(green_shape(g, x, y) == doctest::Approx(green_shape(g, y, x)));
    CHECK(green_shape(g, x, y) > 0.0);
    // the two boundary forms agree up to a factor at most 4
    for (double dx : {1e-3, 0.1, 0.9})
        for (double dy : {1e-3, 0.3})
            for (double r : {0.01, 0.5, 1.9}) {
                double q = green1_product(kit, dx, dy, r) / green1_min(kit, dx, dy, r);
                CHECK(q >= 0.25);
                CHECK(q <= 4.0);
            }
    CHECK_THROWS_AS(make_green_envelope(catalog_model("stable-0.5"), catalog_kit("stable-0.5"),
                                        Domain::ball(make_point({0.0, 0.0}), 1.0)),
                    UsageError);
}
