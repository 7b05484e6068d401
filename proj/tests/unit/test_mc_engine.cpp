#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "levyhk/errors.hpp"
#include "levyhk/mc_engine.hpp"

using namespace levyhk;

TEST_CASE("Welford merge equals a single pass") {
    Welford a, b, all;
    for (int i = 0; i < 10; ++i) {
        double x = std::sin(i) * 3 + i;
        (i < 4 ? a : b).add(x);
        all.add(x);
    }
    a.merge(b);
    CHECK(a.n == all.n);
    CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-14));
    CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    Welford e;
    e.merge(all);
    CHECK(e.mean == all.mean);
}

TEST_CASE("block streams are reproducible and distinct") {
    auto g1 = block_stream(7, 3), g2 = block_stream(7, 3), g3 = block_stream(7, 4), g4 = block_stream(8, 3);
    auto v1 = g1();
    CHECK(v1 == g2());
    CHECK(v1 != g3());
    CHECK(v1 != g4());
    for (int i = 0; i < 1000; ++i) {
        double u = uniform_open(g1);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gamma variates have the right mean") {
    for (double shape : {2.5, 0.01}) {
        auto g = block_stream(11, 0);
        Welford w;
        for (int i = 0; i < 100000; ++i) w.add(std::exp(sample_log_gamma(g, std::log(shape))));
        INFO("shape " << shape);
        CHECK(std::abs(w.mean - shape) < 5.0 * std::sqrt(shape / 100000.0));
        CHECK(w.variance() == doctest::Approx(shape).epsilon(0.05));
    }
}

TEST_CASE("positive stable Laplace transform") {
    for (double beta : {0.25, 0.5, 0.8}) {
        auto g = block_stream(5, 1);
        Welford w;
        for (int i = 0; i < 100000; ++i) w.add(std::exp(-std::exp(sample_log_positive_stable(g, beta))));
        INFO("beta " << beta);
        CHECK(std::abs(w.mean - std::exp(-1.0)) < 5.0 * w.std_error() + 1e-4);
    }
}

namespace {

// E cos(xi . X_t) from the exact increment sampler
double empirical_cf(const LevyModel& m, double t, double xi, int n) {
    IncrementSampler s(m);
    auto g = block_stream(99, 0);
    Point dx(m.d);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        s.increment(g, std::log(t), dx);
        acc += std::cos(xi * dx(0));
    }
    return acc / n;
}

}  // namespace

TEST_CASE("increments reproduce the characteristic function") {
    const int n = 100000;
    double tol = 5.0 / std::sqrt(2.0 * n);
    const auto& g = catalog_model("geostable");
    for (double xi : {0.5, 2.0}) CHECK(std::abs(empirical_cf(g, 1.0, xi, n) - 1.0 / (1.0 + xi)) < tol);
    CHECK(std::abs(empirical_cf(g, 0.3, 1.0, n) - std::pow(2.0, -0.3)) < tol);
    const auto& s = catalog_model("stable-0.5");
    CHECK(std::abs(empirical_cf(s, 0.5, 4.0, n) - std::exp(-0.5 * 2.0)) < tol);
    const auto& c = catalog_model("cauchy");
    CHECK(std::abs(empirical_cf(c, 1.0, 1.0, n) - std::exp(-1.0)) < tol);
    // d = 2 takes the generic subordination path
    auto g2 = make_geometric_stable(2, 1.0);
    CHECK(std::abs(empirical_cf(g2, 1.0, 1.0, n) - 0.5) < tol);
}

TEST_CASE("models without a sampler are rejected") {
    CHECK_THROWS_AS(IncrementSampler(catalog_model("logp-1")), UsageError);
}

TEST_CASE("config validation") {
    McConfig c;
    c.paths = 0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = {};
    c.dt = 0.0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = {};
    c.dt = 2.0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = {};
    c.refinement_levels = 9;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = {};
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("mean exit time of the symmetric stable process") {
    // E_0 tau for (-1, 1), alpha = 1/2
    double a = 0.5;
    double exact = std::sqrt(M_PI) / (std::pow(2.0, a) * boost::math::tgamma(1 + a / 2) * boost::math::tgamma((1 + a) / 2));
    McConfig cfg;
    cfg.paths = 4000;
    cfg.dt = 1e-3;
    cfg.horizon = 2.0;
    cfg.seed = 3;
    cfg.workers = 1;
    auto e = mean_exit_time(catalog_model("stable-0.5"), Domain::intervals({{-1.0, 1.0}}), make_point({0.0}), cfg);
    // sampling on a grid only misses exits, so allow a small upward bias
    CHECK(e.value > exact - 4.0 * e.std_error);
    CHECK(e.value < exact + 4.0 * e.std_error + 0.02);
}

TEST_CASE("results do not depend on the worker count") {
    McConfig cfg;
    cfg.paths = 3000;
    cfg.block_size = 250;
    cfg.dt = 2e-3;
    cfg.horizon = 0.5;
    cfg.seed = 42;
    const auto& m = catalog_model("geostable");
    auto dom = Domain::intervals({{-1.0, 1.0}});
    std::vector<double> ts{0.1, 0.25, 0.5};
    cfg.workers = 1;
    auto a = survival_probability(m, dom, make_point({0.3}), ts, cfg);
    cfg.workers = 3;
    auto b = survival_probability(m, dom, make_point({0.3}), ts, cfg);
    for (size_t i = 0; i < ts.size(); ++i) {
        CHECK(a.estimates[i].value == b.estimates[i].value);
        CHECK(a.estimates[i].std_error == b.estimates[i].std_error);
    }
    // survival is nonincreasing in t
    CHECK(a.estimates[0].value >= a.estimates[1].value);
    CHECK(a.estimates[1].value >= a.estimates[2].value);
    CHECK(a.estimates[2].value > 0.0);
}

TEST_CASE("killed kernel in a huge domain is the free kernel") {
    McConfig cfg;
    cfg.paths = 2000;
    cfg.dt = 5e-3;
    cfg.horizon = 0.5;
    cfg.seed = 1;
    cfg.workers = 1;
    const auto& m = catalog_model("geostable");
    auto e = dirichlet_kernel(m, Domain::intervals({{-1e4, 1e4}}), 0.5, make_point({0.0}), make_point({0.5}), cfg);
    double exact = free_density(m, 0.5, 0.5).density;
    CHECK(e.value == doctest::Approx(exact).epsilon(5e-3));
}

TEST_CASE("killed kernel symmetry") {
    McConfig cfg;
    cfg.paths = 20000;
    cfg.dt = 2e-3;
    cfg.horizon = 0.3;
    cfg.seed = 9;
    cfg.workers = 1;
    const auto& m = catalog_model("cauchy");
    auto dom = Domain::intervals({{-1.0, 1.0}});
    auto a = dirichlet_kernel(m, dom, 0.3, make_point({-0.3}), make_point({0.4}), cfg);
    auto b = dirichlet_kernel(m, dom, 0.3, make_point({0.4}), make_point({-0.3}), cfg);
    double se = std::hypot(a.std_error, b.std_error);
    CHECK(std::abs(a.value - b.value) < 4.0 * se + 1e-3 * a.value);
    // killing only removes mass
    CHECK(a.value < free_density(m, 0.3, 0.7).density);
}

TEST_CASE("start point checks") {
    McConfig cfg;
    cfg.paths = 10;
    auto dom = Domain::intervals({{-1.0, 1.0}});
    CHECK_THROWS_AS(run_killed(catalog_model("cauchy"), dom, make_point({2.0}), cfg, 1.0, false), UsageError);
    CHECK_THROWS_AS(mean_exit_time(catalog_model("cauchy"), Domain::intervals({{-INFINITY, 0.0}}), make_point({-1.0}), cfg),
                    UsageError);
}
