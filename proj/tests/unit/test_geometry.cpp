#include <doctest.h>

#include <cmath>

#include "levyhk/errors.hpp"
#include "levyhk/geometry.hpp"

using namespace levyhk;

TEST_CASE("interval unions") {
    auto d = Domain::intervals({{-1.0, 1.0}, {2.0, 5.0}});
    CHECK(d.dim() == 1);
    CHECK(d.bounded());
    CHECK(d.contains(make_point({0.5})));
    CHECK_FALSE(d.contains(make_point({1.5})));
    CHECK_FALSE(d.contains(make_point({1.0})));
    CHECK(d.boundary_distance(make_point({0.75})) == doctest::Approx(0.25));
    CHECK(d.boundary_distance(make_point({3.0})) == doctest::Approx(1.0));
    CHECK(d.inradius() == doctest::Approx(1.5));
    CHECK_THROWS_AS(Domain::intervals({{0.0, 2.0}, {1.0, 3.0}}), UsageError);
    CHECK_THROWS_AS(Domain::intervals({{1.0, 0.0}}), UsageError);
}

TEST_CASE("balls and annuli") {
    auto b = Domain::ball(make_point({0.0, 0.0}), 2.0);
    CHECK(b.dim() == 2);
    CHECK(b.contains(make_point({1.0, 1.0})));
    CHECK_FALSE(b.contains(make_point({2.0, 0.1})));
    CHECK(b.boundary_distance(make_point({0.6, 0.8})) == doctest::Approx(1.0));
    CHECK(b.r1() == doctest::Approx(2.0));
    auto a = Domain::annulus(make_point({0.0, 0.0, 0.0}), 1.0, 3.0);
    CHECK(a.dim() == 3);
    CHECK_FALSE(a.contains(make_point({0.5, 0.0, 0.0})));
    CHECK(a.contains(make_point({0.0, 2.0, 0.0})));
    CHECK(a.boundary_distance(make_point({0.0, 1.5, 0.0})) == doctest::Approx(0.5));
    CHECK(a.boundary_distance(make_point({0.0, 0.0, 2.6})) == doctest::Approx(0.4));
    CHECK_THROWS_AS(a.contains(make_point({1.0})), UsageError);
}

TEST_CASE("domain and point parsing") {
    auto d = parse_domain("interval:-1,1;2,4");
    CHECK(d.kind() == Domain::Kind::IntervalUnion);
    CHECK(d.parts().size() == 2);
    auto b = parse_domain("ball:0,0,1.5");
    CHECK(b.kind() == Domain::Kind::Ball);
    CHECK(b.dim() == 2);
    CHECK(b.radius_out() == doctest::Approx(1.5));
    auto a = parse_domain("annulus:0,0,1,2");
    CHECK(a.kind() == Domain::Kind::Annulus);
    CHECK_THROWS_AS(parse_domain("cube:1"), UsageError);
    CHECK_THROWS_AS(parse_domain("interval:1"), UsageError);
    CHECK_THROWS_AS(parse_domain("ball"), UsageError);
    CHECK_THROWS_AS(parse_domain("interval:a,b"), UsageError);
    auto p = parse_point("1.5,-2");
    CHECK(p.size() == 2);
    CHECK(p(1) == -2.0);
    CHECK_THROWS_AS(parse_point("1,2,3,4"), UsageError);
}

TEST_CASE("grid sampling") {
    auto d = Domain::intervals({{0.0, 1.0}});
    SampleParams sp;
    sp.n = 4;
    auto pts = sample_interior(d, SampleRule::Grid, sp);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0](0) == doctest::Approx(0.125));
    CHECK(pts[3](0) == doctest::Approx(0.875));
    auto b = Domain::ball(make_point({0.0, 0.0}), 1.0);
    for (auto& q : sample_interior(b, SampleRule::Grid, sp)) CHECK(b.contains(q));
}

TEST_CASE("boundary-layer sampling") {
    auto d = Domain::intervals({{-1.0, 1.0}});
    SampleParams sp;
    sp.deltas = {0.1, 0.01};
    auto pts = sample_interior(d, SampleRule::BoundaryLayer, sp);
    REQUIRE(pts.size() == 4);
    for (auto& q : pts) {
        double dist = d.boundary_distance(q);
        CHECK((std::abs(dist - 0.1) < 1e-12 || std::abs(dist - 0.01) < 1e-12));
    }
    sp.side = "left";
    pts = sample_interior(d, SampleRule::BoundaryLayer, sp);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0](0) == doctest::Approx(-0.9));
    sp.deltas = {1.0};
    CHECK_THROWS_AS(sample_interior(d, SampleRule::BoundaryLayer, sp), UsageError);
    sp.deltas = {};
    CHECK_THROWS_AS(sample_interior(d, SampleRule::BoundaryLayer, sp), UsageError);

    auto b = Domain::ball(make_point({0.0, 0.0}), 2.0);
    SampleParams bp;
    bp.deltas = {0.5};
    auto bq = sample_interior(b, SampleRule::BoundaryLayer, bp);
    REQUIRE(bq.size() == 1);
    CHECK(bq[0](0) == doctest::Approx(1.5));
    CHECK(b.boundary_distance(bq[0]) == doctest::Approx(0.5));
}
