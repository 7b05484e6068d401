#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "levyhk/errors.hpp"
#include "levyhk/harness.hpp"

using namespace levyhk;
namespace fs = std::filesystem;

TEST_CASE("constant fits") {
    std::vector<double> s{1.0, 2.0, 4.0, 8.0};
    auto same = fit_constant(s, s);
    CHECK(same.c == doctest::Approx(1.0));
    CHECK(same.spread == doctest::Approx(1.0));
    auto twice = fit_constant(s, {2.0, 4.0, 8.0, 16.0});
    CHECK(twice.c == doctest::Approx(2.0));
    CHECK(twice.spread == doctest::Approx(1.0));
    auto out = fit_constant(s, {1.0, 2.0, 40.0, 8.0});
    CHECK(out.spread >= std::pow(10.0, 0.9));
    CHECK_THROWS_AS(fit_constant({1.0, 2.0}, {1.0, 2.0}), UsageError);
    CHECK_THROWS_AS(fit_constant(s, {1.0, 2.0, 3.0}), UsageError);
    CHECK_THROWS_AS(fit_constant(s, {1.0, -2.0, 3.0, 4.0}), UsageError);
    CHECK(geometric_spread({2.0, 8.0, 4.0}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(geometric_spread({}), UsageError);
}

TEST_CASE("one-sided rate fits recover exact parameters") {
    std::vector<double> y, s, z;
    for (int i = 0; i < 10; ++i) {
        double zi = 0.3 * i, si = std::sin(i);
        z.push_back(zi);
        s.push_back(si);
        y.push_back(0.7 + si - 1.3 * zi);
    }
    for (auto side : {Side::Lower, Side::Upper}) {
        auto f = fit_rate_one_sided(y, s, z, side);
        CHECK(f.log_c == doctest::Approx(0.7));
        CHECK(f.b == doctest::Approx(1.3));
    }
    // perturbed data: lower fit sits below every point, upper above
    y[4] += 0.5;
    y[7] -= 0.4;
    auto lo = fit_rate_one_sided(y, s, z, Side::Lower), hi = fit_rate_one_sided(y, s, z, Side::Upper);
    for (size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] >= lo.log_c + s[i] - lo.b * z[i] - 1e-12);
        CHECK(y[i] <= hi.log_c + s[i] - hi.b * z[i] + 1e-12);
    }
    // negative slopes clamp to zero
    auto pos = fit_rate_one_sided({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 2.0}, Side::Lower);
    CHECK(pos.b == 0.0);
}

TEST_CASE("sandwich needs calibration and held-out points") {
    SandwichInput in;
    in.id = "x";
    in.coord_names = {"t"};
    for (int i = 0; i < 4; ++i) {
        SandwichPoint p;
        p.coords = {double(i)};
        p.estimate = std::exp(-0.5 * i);
        p.z_lower = p.z_upper = i;
        p.calibration = i < 3;
        in.points.push_back(p);
    }
    RatioReport rep;
    auto r = run_sandwich(in, rep);
    CHECK(r.held_out == 1);
    CHECK(r.spread == doctest::Approx(1.0));
    CHECK(r.lower.b == doctest::Approx(0.5));
    CHECK(rep.rows.size() == 4);
    CHECK(rep.columns.size() == 8);
    for (auto& p : in.points) p.calibration = true;
    RatioReport rep2;
    CHECK_THROWS_AS(run_sandwich(in, rep2), UsageError);
    in.points.resize(1);
    in.points[0].calibration = false;
    CHECK_THROWS_AS(run_sandwich(in, rep2), UsageError);
}

TEST_CASE("report checks and csv") {
    RatioReport r;
    r.id = "demo";
    r.check_le("a", 1.0, 2.0);
    r.check_ge("b", 1.0, 2.0);
    CHECK_FALSE(r.pass());
    CHECK(r.checks[0].pass);
    CHECK_FALSE(r.checks[1].pass);
    r.columns = {"u", "v"};
    r.rows = {{1.0, 2.5}};
    CHECK(r.csv().rfind("u,v\n", 0) == 0);
}

TEST_CASE("config parsing") {
    auto cfg = parse_config_text("# c\n[global]\nseed = 5\n[experiment.cauchy_oracle]\nt_values = 0.5, 1\nrel_tol = 1e-6 # x\n");
    CHECK(cfg.global.num("seed") == 5.0);
    REQUIRE(cfg.experiments.size() == 1);
    const auto& s = cfg.experiments[0];
    CHECK(s.name == "cauchy_oracle");
    CHECK(s.list("t_values") == std::vector<double>{0.5, 1.0});
    CHECK(s.num("rel_tol") == 1e-6);
    CHECK(s.num_or("other", 3.0) == 3.0);
    CHECK_THROWS_AS(s.integer("rel_tol"), UsageError);
    CHECK_NOTHROW(s.finish());
    (void)s.num("x_max");
    (void)s.num("points");
    try {
        s.finish();
        FAIL("finish should throw");
    } catch (const UsageError& e) {
        std::string w = e.what();
        CHECK(w.find("x_max") != std::string::npos);
        CHECK(w.find("points") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[bogus]\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("[experiment.a]\n[experiment.a]\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("novalue\n"), UsageError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), UsageError);
}

TEST_CASE("experiment seeds and registry") {
    CHECK(experiment_seed(1, "a") != experiment_seed(1, "b"));
    CHECK(experiment_seed(1, "a") == experiment_seed(1, "a"));
    CHECK(experiment_registry().size() == 13);
    CHECK(experiment_registry().count("hkeb_sandwich") == 1);
}

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("run_all is deterministic and writes its files") {
    const std::string text =
        "[global]\nseed = 17\n"
        "[experiment.cauchy_oracle]\nt_values = 0.5, 1\nx_max = 5\npoints = 6\nrel_tol = 1e-6\n"
        "[experiment.condition_checkers]\nexponents = 0.5, 1\nmismatch = 0.25\n";
    auto cfg = parse_config_text(text);
    auto base = fs::temp_directory_path() / "levyhk_unit_runall";
    fs::remove_all(base);
    RunContext a{17, 1, (base / "a").string()}, b{17, 2, (base / "b").string()};
    auto ra = run_all(cfg, a), rb = run_all(cfg, b);
    CHECK(ra.pass);
    CHECK(rb.pass);
    REQUIRE(ra.reports.size() == 2);
    for (auto f : {"cauchy_oracle.csv", "condition_checkers.csv", "summary.csv", "checks.csv"}) {
        INFO(f);
        REQUIRE(fs::exists(base / "a" / f));
        CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
    }
    CHECK(fs::exists(base / "a" / "timing.csv"));
    auto only = run_all(cfg, RunContext{17, 1, (base / "c").string()}, "cauchy_oracle");
    CHECK(only.reports.size() == 1);
    CHECK_THROWS_AS(run_all(cfg, a, "no_such_experiment"), UsageError);
    fs::remove_all(base);
}

TEST_CASE("unknown experiment in a config") {
    auto cfg = parse_config_text("[experiment.nope]\nx = 1\n");
    auto dir = (fs::temp_directory_path() / "levyhk_unit_unknown").string();
    CHECK_THROWS_AS(run_all(cfg, RunContext{1, 1, dir}), UsageError);
    fs::remove_all(dir);
}
