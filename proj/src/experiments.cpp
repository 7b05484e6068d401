#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "levyhk/envelopes.hpp"
#include "levyhk/errors.hpp"
#include "levyhk/free_kernel.hpp"
#include "levyhk/geometry.hpp"
#include "levyhk/harness.hpp"
#include "levyhk/mc_engine.hpp"
#include "levyhk/models.hpp"
#include "levyhk/scalekit.hpp"

namespace levyhk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

McConfig mc_from(const ConfigSection& s, const RunContext& ctx, const std::string& prefix = "") {
    McConfig c;
    c.paths = s.integer(prefix + "paths");
    c.dt = s.num(prefix + "dt");
    c.refinement_levels = static_cast<int>(s.num_or("refinement_levels", 1));
    c.block_size = static_cast<int>(s.num_or("block_size", 1000));
    c.seed = ctx.seed;
    c.workers = ctx.workers;
    return c;
}

double max_rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// log-spaced nodes of an n-point grid and the n+1 cell edges extended half a cell outside
std::vector<double> log_edges(double a, double b, int n) {
    double la = std::log(a), lb = std::log(b), h = (lb - la) / (n - 1);
    std::vector<double> out;
    for (int i = 0; i <= n; ++i) out.push_back(std::exp(la + (i - 0.5) * h));
    return out;
}

Point pt(double x) { return make_point({x}); }

// ---------------------------------------------------------------- free kernel oracle
RatioReport cauchy_oracle(const ConfigSection& s, const RunContext&) {
    auto ts = s.list("t_values");
    double xmax = s.num("x_max");
    long n = s.integer("points");
    double tol = s.num("rel_tol");
    s.finish();
    if (ts.empty() || n < 2) throw UsageError("cauchy_oracle needs t_values and at least 2 points");
    const auto& m = catalog_model("cauchy");
    RatioReport rep;
    rep.grid = "t in {" + std::to_string(ts.size()) + " values}, x in [-x_max, x_max]";
    rep.columns = {"t", "x", "density", "exact", "rel_err", "quad_err"};
    double worst = 0.0;
    for (long i = 0; i < n; ++i) {
        double t = ts[i % ts.size()];
        double x = -xmax + 2.0 * xmax * i / (n - 1);
        auto v = free_density(m, t, std::abs(x));
        double ex = t / (M_PI * (t * t + x * x));
        double e = max_rel(v.density, ex);
        worst = std::max(worst, e);
        rep.rows.push_back({t, x, v.density, ex, e, v.quad_err});
    }
    rep.spread = worst;
    rep.check_le("max_rel_err", worst, tol);
    return rep;
}

RatioReport normalization(const ConfigSection& s, const RunContext&) {
    double t = s.num("t");
    double mtol = s.num("mass_tol");
    double t1 = s.num("ck_t1"), t2 = s.num("ck_t2");
    auto xs = s.list("ck_points");
    double tol_geo = s.num("ck_tol_geostable"), tol_cau = s.num("ck_tol_cauchy");
    s.finish();
    RatioReport rep;
    rep.grid = "catalog models at fixed t; convolution check at sample points";
    rep.columns = {"model_index", "mass", "abs_dev"};
    double worst = 0.0;
    auto names = catalog_names();
    for (size_t i = 0; i < names.size(); ++i) {
        double mass = total_mass(catalog_model(names[i]), t);
        double dev = std::abs(mass - 1.0);
        worst = std::max(worst, dev);
        rep.rows.push_back({static_cast<double>(i), mass, dev});
        rep.check_le("mass_" + names[i], dev, mtol);
    }
    double ck_geo = chapman_kolmogorov_check(catalog_model("geostable"), t1, t2, xs);
    double ck_cau = chapman_kolmogorov_check(catalog_model("cauchy"), t1, t2, xs);
    rep.check_le("ck_geostable", ck_geo, tol_geo);
    rep.check_le("ck_cauchy", ck_cau, tol_cau);
    rep.spread = worst;
    return rep;
}

// ---------------------------------------------------------------- scale functions
// h(r) straight from its definition, \int (1 ^ s^2/r^2) s^{-1} l(1/s) ds in w = log s
double h_direct(const WeightFunction& w, double r) {
    double lr = std::log(r);
    auto g = [&](double v) {
        double s = std::exp(v);
        double f = v < lr ? std::exp(2.0 * (v - lr)) : 1.0;
        return f * w.eval(1.0 / s);
    };
    std::vector<double> cuts;
    for (double c = lr - 30.0; c < lr + 700.0; c += 5.0)
        if (c != lr) cuts.push_back(c);
    cuts.push_back(lr);
    std::sort(cuts.begin(), cuts.end());
    double lo = lr - 40.0, hi = lr + std::min(60.0 / std::max(w.beta_small, 1e-3), 1400.0);
    std::vector<double> in;
    for (double c : cuts)
        if (c > lo && c < hi) in.push_back(c);
    return quad::integrate_split(g, lo, hi, in, {1e-300, 1e-12}).value;
}

// L(r) = \int_r^inf s^{-1} l(1/s) ds, in the variable of s rather than of 1/s
double L_direct(const WeightFunction& w, double r) {
    double lr = std::log(r);
    double hi = lr + std::min(60.0 / std::max(w.beta_small, 1e-3), 1400.0);
    std::vector<double> cuts;
    for (double c = lr + 5.0; c < hi; c += 5.0) cuts.push_back(c);
    auto g = [&](double v) { return w.eval(std::exp(-v)); };
    return quad::integrate_split(g, lr, hi, cuts, {1e-300, 1e-12}).value + w.eval(std::exp(-hi)) / w.beta_small;
}

RatioReport scale_identities(const ConfigSection& s, const RunContext&) {
    double r0 = s.num("r_min"), r1 = s.num("r_max");
    long n = s.integer("points");
    double tol_h = s.num("tol_h"), tol_fd = s.num("tol_fd"), tol_phi = s.num("tol_phi"), tol_cf = s.num("tol_closed");
    double step = s.num("fd_step");
    s.finish();
    RatioReport rep;
    rep.grid = "log grid r in [r_min, r_max] per smooth catalog model";
    rep.columns = {"model_index", "r", "h", "h_direct", "fd_rel_err", "phi_rel_err"};
    auto rs = logspace(r0, r1, static_cast<int>(n));
    double wh = 0.0, wfd = 0.0, wphi = 0.0;
    auto names = catalog_names();
    for (size_t i = 0; i < names.size(); ++i) {
        const auto& kit = catalog_kit(names[i]);
        if (!kit.weight().smooth) continue;
        for (double r : rs) {
            double h = kit.h(r), hd = h_direct(kit.weight(), r);
            double e = step * r;
            double fd = (kit.h(r + e) - kit.h(r - e)) / (2.0 * e);
            double efd = max_rel(fd, -2.0 * kit.K(r) / r);
            double ephi = max_rel(kit.Phi(1.0 / r), L_direct(kit.weight(), r));
            wh = std::max(wh, max_rel(h, hd));
            wfd = std::max(wfd, efd);
            wphi = std::max(wphi, ephi);
            rep.rows.push_back({static_cast<double>(i), r, h, hd, efd, ephi});
        }
    }
    rep.check_le("h_equals_K_plus_L", wh, tol_h);
    rep.check_le("fd_derivative", wfd, tol_fd);
    rep.check_le("phi_equals_L_inverse", wphi, tol_phi);
    // l(s) = s^{1/2}
    WeightFunction w;
    w.eval = [](double x) { return std::sqrt(x); };
    w.beta_small = 0.5;
    w.alpha1 = w.alpha2 = 0.5;
    ScaleKit kit(w);
    double wc = 0.0;
    for (double r : rs) {
        double q = 1.0 / std::sqrt(r);
        wc = std::max({wc, max_rel(kit.K(r), 2.0 / 3.0 * q), max_rel(kit.L(r), 2.0 * q),
                       max_rel(kit.h(r), 8.0 / 3.0 * q)});
    }
    rep.check_le("closed_form_sqrt", wc, tol_cf);
    rep.spread = std::max({wh, wfd, wphi, wc});
    return rep;
}

RatioReport asym_sandwich(const ConfigSection& s, const RunContext&) {
    double r0 = s.num("r_min"), r1 = s.num("r_max");
    long n = s.integer("points");
    double cap = s.num("spread_cap");
    s.finish();
    RatioReport rep;
    rep.grid = "log grid r in [r_min, r_max], every catalog model";
    rep.columns = {"model_index", "r", "psi_inv_r", "h", "ratio"};
    auto rs = logspace(r0, r1, static_cast<int>(n));
    auto names = catalog_names();
    double worst = 0.0;
    for (size_t i = 0; i < names.size(); ++i) {
        const auto& m = catalog_model(names[i]);
        const auto& kit = catalog_kit(names[i]);
        std::vector<double> ratios;
        for (double r : rs) {
            double ps = m.psi(1.0 / r), h = kit.h(r);
            ratios.push_back(ps / h);
            rep.rows.push_back({static_cast<double>(i), r, ps, h, ps / h});
        }
        double sp = geometric_spread(ratios);
        worst = std::max(worst, sp);
        rep.check_le("spread_" + names[i], sp, cap);
    }
    rep.spread = worst;
    return rep;
}

RatioReport asym_lh(const ConfigSection& s, const RunContext&) {
    double r0 = s.num("r_min"), r1 = s.num("r_max");
    long n = s.integer("points");
    double lo = s.num("ratio_min"), hi = s.num("ratio_max");
    s.finish();
    RatioReport rep;
    rep.grid = "log grid r in [r_min, r_max], logp models p = -1, 0, 1";
    rep.columns = {"p", "r", "h_over_L"};
    double worst = 1.0;
    for (auto [name, p] : std::vector<std::pair<std::string, double>>{{"logp-m1", -1.0}, {"logp-0", 0.0}, {"logp-1", 1.0}}) {
        const auto& kit = catalog_kit(name);
        double mn = kInf, mx = 0.0;
        for (double r : logspace(r0, r1, static_cast<int>(n))) {
            double q = kit.h(r) / kit.L(r);
            mn = std::min(mn, q);
            mx = std::max(mx, q);
            rep.rows.push_back({p, r, q});
        }
        rep.check_ge("min_" + name, mn, lo);
        rep.check_le("max_" + name, mx, hi);
        worst = std::max(worst, mx);
    }
    rep.spread = worst;
    return rep;
}

// ---------------------------------------------------------------- free kernel sandwich
struct FreeSandwichGrid {
    double t0, t1, r0, r1;
    int n;
};

SandwichResult free_sandwich(const LevyModel& m, const ScaleKit& kit, const FreeSandwichGrid& g, double cap,
                             RatioReport& rep) {
    SandwichInput in;
    in.id = "hkeb";
    in.cap = cap;
    in.coord_names = {"t", "r"};
    auto add = [&](double t, double r, bool cal) {
        SandwichPoint p;
        p.coords = {t, r};
        p.estimate = free_density(m, t, r).density;
        double h = kit.h(r);
        p.log_shape_lower = std::log(t * m.nu(r));
        p.log_shape_upper = std::log(t * std::pow(r, -m.d) * kit.K(r));
        p.z_lower = p.z_upper = t * h;
        p.calibration = cal;
        in.points.push_back(p);
    };
    for (double t : log_edges(g.t0, g.t1, g.n))
        for (double r : log_edges(g.r0, g.r1, g.n)) add(t, r, true);
    for (double t : logspace(g.t0, g.t1, g.n))
        for (double r : logspace(g.r0, g.r1, g.n)) add(t, r, false);
    in.grid = std::to_string(g.n) + "x" + std::to_string(g.n) + " held out, " + std::to_string(g.n + 1) + "x" +
              std::to_string(g.n + 1) + " calibration";
    return run_sandwich(in, rep);
}

RatioReport hkeb_sandwich(const ConfigSection& s, const RunContext&) {
    FreeSandwichGrid g{s.num("t_min"), s.num("t_max"), s.num("r_min"), s.num("r_max"),
                       static_cast<int>(s.integer("grid_n"))};
    double cap = s.num("spread_cap"), stab = s.num("refine_tol");
    std::string model = s.str("model");
    s.finish();
    const auto& m = catalog_model(model);
    const auto& kit = catalog_kit(model);
    RatioReport rep;
    auto base = free_sandwich(m, kit, g, cap, rep);
    RatioReport fine_rep;
    auto g2 = g;
    g2.n = 2 * g.n;
    auto fine = free_sandwich(m, kit, g2, cap, fine_rep);
    rep.spread = base.spread;
    rep.constants.push_back({"fine_spread", fine.spread});
    rep.check_ge("held_out_min_ratio", base.min_ratio, 1.0);
    rep.check_le("spread", base.spread, cap);
    rep.check_le("refined_spread_change", std::abs(fine.spread / base.spread - 1.0), stab);
    return rep;
}

// ---------------------------------------------------------------- exit times and survival
double getoor(int d, double alpha, double r, double x) {
    using boost::math::tgamma;
    return tgamma(d / 2.0) / (std::pow(2.0, alpha) * tgamma(1.0 + alpha / 2.0) * tgamma((d + alpha) / 2.0)) *
           std::pow(r * r - x * x, alpha / 2.0);
}

RatioReport exit_times(const ConfigSection& s, const RunContext& ctx) {
    auto cfg = mc_from(s, ctx);
    cfg.horizon = s.num("horizon");
    auto radii = s.list("radii");
    double cap = s.num("spread_cap"), se_cap = s.num("rel_stderr_cap"), band = s.num("sigma_band");
    auto bdeltas = s.list("boundary_deltas");
    long bpaths = s.integer("boundary_paths");
    s.finish();
    RatioReport rep;
    rep.grid = "stable-0.5 B(0,1) from 0; geostable balls of the listed radii from the centre";
    rep.columns = {"case", "radius", "start", "estimate", "std_error", "refined", "reference", "ratio"};
    // oracle
    const auto& st = catalog_model("stable-0.5");
    auto e = mean_exit_time(st, Domain::ball(pt(0.0), 1.0), pt(0.0), cfg);
    double ref = getoor(1, 0.5, 1.0, 0.0);
    rep.rows.push_back({0, 1.0, 0.0, e.value, e.std_error, e.refined_value, ref, e.value / ref});
    rep.check_le("getoor_sigma", std::abs(e.value - ref) / e.std_error, band);
    int flagged = e.bias_flag ? 1 : 0, total = 1;
    // scaling law
    const auto& gs = catalog_model("geostable");
    const auto& kit = catalog_kit("geostable");
    std::vector<double> prod;
    double worst_se = 0.0;
    for (size_t i = 0; i < radii.size(); ++i) {
        McConfig c = cfg;
        c.seed = cfg.seed + 1000 * (i + 1);
        c.horizon = cfg.horizon * std::max(1.0, radii[i]);
        auto ge = mean_exit_time(gs, Domain::ball(pt(0.0), radii[i]), pt(0.0), c);
        double hr = kit.h(radii[i]);
        prod.push_back(ge.value * hr);
        worst_se = std::max(worst_se, ge.std_error / ge.value);
        flagged += ge.bias_flag;
        ++total;
        rep.rows.push_back({1, radii[i], 0.0, ge.value, ge.std_error, ge.refined_value, 1.0 / hr, ge.value * hr});
    }
    rep.spread = geometric_spread(prod);
    rep.check_le("scaling_spread", rep.spread, cap);
    rep.check_le("max_rel_stderr", worst_se, se_cap);
    // estimate shrinks toward the boundary of B(0,1)
    std::vector<McEstimate> be;
    for (size_t i = 0; i < bdeltas.size(); ++i) {
        McConfig c = cfg;
        c.paths = bpaths;
        c.seed = cfg.seed + 77 * (i + 1);
        double x = 1.0 - bdeltas[i];
        be.push_back(mean_exit_time(gs, Domain::ball(pt(0.0), 1.0), pt(x), c));
        rep.rows.push_back({2, 1.0, x, be.back().value, be.back().std_error, be.back().refined_value,
                            kit.V(bdeltas[i]) * kit.V(1.0), be.back().value / (kit.V(bdeltas[i]) * kit.V(1.0))});
    }
    bool dec = true;
    for (size_t i = 0; i + 1 < be.size(); ++i)
        if (bdeltas[i + 1] < bdeltas[i] && !(be[i + 1].value < be[i].value)) dec = false;
    rep.check("boundary_decrease", dec ? 1.0 : 0.0, 1.0, dec);
    if (flagged > 0.2 * total) {
        rep.unreliable = true;
        rep.note = "dt refinement moved more than 20% of the estimates by over 2 sigma";
    }
    return rep;
}

RatioReport survival_boundary(const ConfigSection& s, const RunContext& ctx) {
    auto cfg = mc_from(s, ctx);
    double t = s.num("t");
    auto deltas = s.list("deltas");
    double cap = s.num("spread_cap");
    std::string model = s.str("model");
    s.finish();
    const auto& m = catalog_model(model);
    const auto& kit = catalog_kit(model);
    auto dom = Domain::intervals({{-1.0, 1.0}});
    RatioReport rep;
    rep.grid = "interval (-1,1), start at -1 + delta";
    rep.columns = {"delta", "survival", "std_error", "refined", "V", "ratio", "capped_ratio", "bias_sigma"};
    std::vector<double> ratio, capped;
    double worst_bias = 0.0;
    int flagged = 0;
    for (size_t i = 0; i < deltas.size(); ++i) {
        McConfig c = cfg;
        c.seed = cfg.seed + 31 * (i + 1);
        auto sc = survival_probability(m, dom, pt(-1.0 + deltas[i]), {t}, c);
        auto& e = sc.estimates.front();
        double v = kit.V(deltas[i]);
        double q = e.value * std::sqrt(t) / v;
        double qc = e.value / std::min(1.0, v / std::sqrt(t));
        double bs = e.std_error > 0.0 ? std::abs(e.refined_value - e.value) / e.std_error : kInf;
        worst_bias = std::max(worst_bias, bs);
        flagged += e.bias_flag;
        ratio.push_back(q);
        capped.push_back(qc);
        rep.rows.push_back({deltas[i], e.value, e.std_error, e.refined_value, v, q, qc, bs});
    }
    rep.spread = geometric_spread(ratio);
    rep.constants.push_back({"capped_spread", geometric_spread(capped)});
    rep.check_le("ratio_spread", rep.spread, cap);
    rep.check_le("refinement_bias_sigma", worst_bias, 2.0);
    if (flagged > 0.2 * static_cast<double>(deltas.size())) {
        rep.unreliable = true;
        rep.note = "bias flag set on more than 20% of points";
    }
    return rep;
}

// ---------------------------------------------------------------- Dirichlet kernel sandwich
RatioReport main1_sandwich(const ConfigSection& s, const RunContext& ctx) {
    auto cfg = mc_from(s, ctx);
    auto ts = s.list("t_values"), xs = s.list("x_values"), ys = s.list("y_values");
    double cap = s.num("spread_cap"), bcap = s.num("boundary_factor_tol");
    auto bp = s.list("boundary_pairs");  // x1 y1 x2 y2
    double bt = s.num("boundary_t");
    std::string model = s.str("model");
    s.finish();
    if (bp.size() != 4) throw UsageError("boundary_pairs needs x1 y1 x2 y2");
    const auto& m = catalog_model(model);
    const auto& kit = catalog_kit(model);
    auto dom = Domain::intervals({{-1.0, 1.0}});
    auto env = make_dirichlet_envelope(m, kit, dom, DirichletRegime::S1Small);
    env.lower = env.upper = EnvelopeParams{1.0, 0.0, 1.0, 0.0, ""};
    double tmin = *std::min_element(ts.begin(), ts.end());
    if (!(cfg.dt > 0.0)) cfg.dt = std::min(1e-3, tmin / 200.0);
    SandwichInput in;
    in.id = "main1";
    in.cap = cap;
    in.coord_names = {"t", "x", "y", "std_error", "refined"};
    for (size_t i = 0; i < xs.size(); ++i) {
        std::vector<DirichletQuery> q;
        for (double t : ts)
            for (double y : ys) q.push_back({t, pt(y)});
        McConfig c = cfg;
        c.seed = cfg.seed + 101 * (i + 1);
        auto est = dirichlet_kernel_batch(m, dom, pt(xs[i]), q, c);
        size_t k = 0;
        for (size_t a = 0; a < ts.size(); ++a)
            for (size_t b = 0; b < ys.size(); ++b, ++k) {
                double t = ts[a];
                Point x = pt(xs[i]), y = pt(ys[b]);
                SandwichPoint p;
                p.coords = {t, xs[i], ys[b], est[k].std_error, est[k].refined_value};
                p.estimate = est[k].value;
                p.log_shape_lower = std::log(dirichlet_lower(env, t, x, y));
                p.log_shape_upper = std::log(dirichlet_upper(env, t, x, y));
                p.z_lower = p.z_upper = t * kit.h(std::abs(xs[i] - ys[b]));
                p.calibration = (a + b + i) % 2 == 0;
                p.bias_flag = est[k].bias_flag;
                in.points.push_back(p);
            }
    }
    in.grid = std::to_string(ts.size()) + "x" + std::to_string(xs.size()) + "x" + std::to_string(ys.size()) +
              " (t,x,y), checkerboard calibration";
    RatioReport rep;
    auto res = run_sandwich(in, rep);
    rep.spread = res.spread;
    rep.check_ge("held_out_min_ratio", res.min_ratio, 1.0);
    rep.check_le("held_out_spread", res.spread, cap);
    // boundary factor: same |x - y|, x at two distances from -1
    double d1 = dom.boundary_distance(pt(bp[0])), d2 = dom.boundary_distance(pt(bp[2]));
    McConfig c1 = cfg, c2 = cfg;
    c1.seed = cfg.seed + 9001;
    c2.seed = cfg.seed + 9002;
    auto p1 = dirichlet_kernel_batch(m, dom, pt(bp[0]), {{bt, pt(bp[1])}}, c1).front();
    auto p2 = dirichlet_kernel_batch(m, dom, pt(bp[2]), {{bt, pt(bp[3])}}, c2).front();
    double mc_ratio = p1.value / p2.value;
    double shape_ratio = std::sqrt(kit.L(d2) / kit.L(d1));
    double q = mc_ratio / shape_ratio;
    double dev = std::max(q, 1.0 / q);
    rep.constants.push_back({"boundary_mc_ratio", mc_ratio});
    rep.constants.push_back({"boundary_shape_ratio", shape_ratio});
    rep.check_le("boundary_factor_ratio", dev, bcap);
    return rep;
}

// ---------------------------------------------------------------- decay rate
RatioReport decay_bracket(const ConfigSection& s, const RunContext& ctx) {
    auto cfg = mc_from(s, ctx);
    auto radii = s.list("radii"), horizons = s.list("horizons");
    double cap = s.num("spread_cap"), r2min = s.num("r_squared_min");
    std::string model = s.str("model");
    s.finish();
    if (radii.size() != horizons.size()) throw UsageError("decay_bracket: radii and horizons differ in length");
    const auto& m = catalog_model(model);
    RatioReport rep;
    rep.grid = "balls centred at 0";
    rep.columns = {"radius", "lambda", "lambda_se", "lambda_refined", "h_r", "lambda_over_h", "r_squared", "t_lo",
                   "t_hi"};
    std::vector<double> q, lam;
    double worst_r2 = 1.0;
    int flagged = 0;
    for (size_t i = 0; i < radii.size(); ++i) {
        McConfig c = cfg;
        c.horizon = horizons[i];
        c.seed = cfg.seed + 13 * (i + 1);
        auto d = decay_rate(m, Domain::ball(pt(0.0), radii[i]), c);
        double hr = d.h_r2;  // r1 = r2 = r for a ball
        q.push_back(d.lambda / hr);
        lam.push_back(d.lambda);
        worst_r2 = std::min(worst_r2, d.r_squared);
        flagged += d.bias_flag;
        rep.rows.push_back({radii[i], d.lambda, d.lambda_std_error, d.lambda_refined, hr, d.lambda / hr, d.r_squared,
                            d.t_lo, d.t_hi});
    }
    bool dec = true;
    for (size_t i = 0; i + 1 < radii.size(); ++i)
        if (radii[i + 1] > radii[i] && !(lam[i + 1] < lam[i])) dec = false;
    rep.spread = geometric_spread(q);
    rep.check_le("lambda_over_h_spread", rep.spread, cap);
    rep.check("strictly_decreasing", dec ? 1.0 : 0.0, 1.0, dec);
    rep.check_ge("min_r_squared", worst_r2, r2min);
    if (flagged > 0.2 * static_cast<double>(radii.size())) {
        rep.unreliable = true;
        rep.note = "dt refinement moved the rate by more than 2 sigma";
    }
    return rep;
}

// ---------------------------------------------------------------- Green function
RatioReport green_sandwich(const ConfigSection& s, const RunContext& ctx) {
    auto cfg = mc_from(s, ctx);
    cfg.horizon = s.num("horizon");
    auto pairs = s.list("pairs");
    auto tg = logspace(s.num("t_grid_min"), s.num("t_grid_max"), static_cast<int>(s.integer("t_grid_n")));
    double cap = s.num("spread_cap"), g1lo = s.num("green1_min"), g1hi = s.num("green1_max");
    long nsample = s.integer("green1_pairs");
    std::string model = s.str("model");
    s.finish();
    if (pairs.size() < 6 || pairs.size() % 2) throw UsageError("green_sandwich: pairs needs at least three x y couples");
    const auto& m = catalog_model(model);
    const auto& kit = catalog_kit(model);
    auto dom = Domain::intervals({{-1.0, 1.0}});
    auto genv = make_green_envelope(m, kit, dom);
    // group targets by start point, keeping the pair order for the report
    std::map<double, std::vector<size_t>> by_x;
    size_t np = pairs.size() / 2;
    for (size_t i = 0; i < np; ++i) by_x[pairs[2 * i]].push_back(i);
    std::vector<GreenEstimate> est(np);
    size_t grp = 0;
    for (auto& [x, idx] : by_x) {
        std::vector<Point> ys;
        for (size_t i : idx) ys.push_back(pt(pairs[2 * i + 1]));
        McConfig c = cfg;
        c.seed = cfg.seed + 211 * (++grp);
        auto g = green_function(m, dom, pt(x), ys, c, tg);
        for (size_t k = 0; k < idx.size(); ++k) est[idx[k]] = g[k];
    }
    RatioReport rep;
    rep.grid = std::to_string(np) + " (x,y) pairs in (-1,1)";
    rep.columns = {"x", "y", "green", "std_error", "refined", "tail", "lambda", "shape", "ratio", "intgreen_shape",
                   "intgreen_ratio", "calibration"};
    std::vector<double> ratio;
    double c_int = 0.0;
    int flagged = 0;
    for (size_t i = 0; i < np; ++i) {
        Point x = pt(pairs[2 * i]), y = pt(pairs[2 * i + 1]);
        double sh = green_shape(genv, x, y);
        double r = std::abs(pairs[2 * i] - pairs[2 * i + 1]);
        double ig = intgreen_shape(m, kit, r);
        auto& g = est[i].total;
        ratio.push_back(g.value / sh);
        flagged += g.bias_flag;
        if (i % 2 == 0) c_int = std::max(c_int, g.value / ig);
        rep.rows.push_back({pairs[2 * i], pairs[2 * i + 1], g.value, g.std_error, g.refined_value, est[i].tail,
                            est[i].lambda, sh, g.value / sh, ig, g.value / ig, i % 2 == 0 ? 1.0 : 0.0});
    }
    rep.spread = geometric_spread(ratio);
    rep.check_le("green_shape_spread", rep.spread, cap);
    double worst_cover = 0.0;
    for (size_t i = 1; i < np; i += 2) {
        double r = std::abs(pairs[2 * i] - pairs[2 * i + 1]);
        worst_cover = std::max(worst_cover, est[i].total.value / (c_int * intgreen_shape(m, kit, r)));
    }
    rep.constants.push_back({"intgreen_c", c_int});
    rep.check_le("intgreen_held_out_cover", worst_cover, 1.0);
    // product and min boundary forms on random interior pairs
    Rng g = block_stream(ctx.seed, 0xfeed);
    double lo = kInf, hi = 0.0;
    for (long k = 0; k < nsample; ++k) {
        double x = 2.0 * uniform_open(g) - 1.0, y = 2.0 * uniform_open(g) - 1.0;
        if (x == y) continue;
        double dx = dom.boundary_distance(pt(x)), dy = dom.boundary_distance(pt(y)), r = std::abs(x - y);
        double q = green1_product(kit, dx, dy, r) / green1_min(kit, dx, dy, r);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    rep.check_ge("green1_ratio_min", lo, g1lo);
    rep.check_le("green1_ratio_max", hi, g1hi);
    if (flagged > 0.2 * static_cast<double>(np)) {
        rep.unreliable = true;
        rep.note = "bias flag set on more than 20% of pairs";
    }
    return rep;
}

// ---------------------------------------------------------------- log-type examples
const char* logp_name(double p) {
    if (p == -1.0) return "logp-m1";
    if (p == -0.5) return "logp-m0.5";
    if (p == 0.0) return "logp-0";
    if (p == 1.0) return "logp-1";
    throw UsageError("no catalog logp model for p = " + fmt(p));
}

RatioReport logp_shapes(const ConfigSection& s, const RunContext&) {
    auto ps = s.list("p_values");
    double r0 = s.num("r_min"), r1 = s.num("r_max");
    long n = s.integer("points");
    double cap = s.num("spread_cap");
    auto f1t = s.list("f1_t"), f1r = s.list("f1_r");
    double a0 = s.num("a0"), b = s.num("rate"), f1cap = s.num("f1_spread_cap");
    auto etas = s.list("eta_values");
    long en = s.integer("eta_grid_n");
    s.finish();
    RatioReport rep;
    rep.grid = "log grid r in [r_min, r_max]; F1 on the f1_t x f1_r grid";
    rep.columns = {"p", "r", "L", "h", "shape", "L_ratio", "h_ratio"};
    double worst = 0.0;
    for (double p : ps) {
        const auto& kit = catalog_kit(logp_name(p));
        std::vector<double> ql, qh;
        for (double r : logspace(r0, r1, static_cast<int>(n))) {
            double L = kit.L(r), h = kit.h(r), sh = logp_L_shape(p, r);
            ql.push_back(L / sh);
            qh.push_back(h / sh);
            rep.rows.push_back({p, r, L, h, sh, L / sh, h / sh});
        }
        double sl = geometric_spread(ql), shh = geometric_spread(qh);
        worst = std::max({worst, sl, shh});
        rep.check_le("L_spread_p" + fmt(p), sl, cap);
        rep.check_le("h_spread_p" + fmt(p), shh, cap);
    }
    rep.spread = worst;
    // F1 against the (S-2) upper envelope, p = 1, deep inside a wide interval
    const auto& m1 = catalog_model("logp-1");
    const auto& k1 = catalog_kit("logp-1");
    auto wide = Domain::intervals({{-50.0, 50.0}});
    auto env = make_dirichlet_envelope(m1, k1, wide, DirichletRegime::S2Small);
    env.upper = EnvelopeParams{1.0, b, a0, 0.0, ""};
    env.a0 = a0;
    double a2 = a0;  // a^{1/p} at p = 1
    // log S2 = log c + [branch 1] a1 / t + [branch 2] (log t - log r + log frakL + a3 t frakL log r)
    std::vector<double> y;
    std::vector<std::array<double, 3>> A;
    for (double t : f1t)
        for (double r : f1r) {
            double u = dirichlet_upper(env, t, pt(-r / 2.0), pt(r / 2.0));
            y.push_back(std::log(u));
            double fl = frak_L(1.0 / r);
            if (f1_first_branch(1.0, t, r, a2)) A.push_back({1.0, 1.0 / t, 0.0});
            else A.push_back({1.0, 0.0, t * fl * std::log(r)});
            if (!f1_first_branch(1.0, t, r, a2)) y.back() -= std::log(t) - std::log(r) + std::log(fl);
        }
    Eigen::MatrixXd M(y.size(), 3);
    Eigen::VectorXd Y(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        for (int j = 0; j < 3; ++j) M(i, j) = A[i][j];
        Y(i) = y[i];
    }
    Eigen::Vector3d coef = M.colPivHouseholderQr().solve(Y);
    double a1 = coef(1), a3 = coef(2), lc = coef(0);
    std::vector<double> fr;
    for (size_t i = 0; i < y.size(); ++i) {
        double t = f1t[i / f1r.size()], r = f1r[i % f1r.size()];
        double lf = log_f1_logp(1.0, t, r, a1, a2, a3);
        double lu = std::log(dirichlet_upper(env, t, pt(-r / 2.0), pt(r / 2.0)));
        fr.push_back(lu - lf - lc);
    }
    double f1sp = std::exp(*std::max_element(fr.begin(), fr.end()) - *std::min_element(fr.begin(), fr.end()));
    rep.constants.push_back({"f1_a1", a1});
    rep.constants.push_back({"f1_a2", a2});
    rep.constants.push_back({"f1_a3", a3});
    rep.constants.push_back({"f1_log_c", lc});
    rep.check_le("f1_vs_s2_spread", f1sp, f1cap);
    // (S-2) free sandwich for each eta: pass/fail must not depend on it
    std::vector<int> status;
    for (double eta : etas) {
        SandwichInput in;
        in.id = "eta";
        in.coord_names = {"t", "r"};
        auto genv = env;
        genv.eta = eta;
        genv.lower = EnvelopeParams{1.0, 0.0, eta, 0.0, ""};
        genv.upper = EnvelopeParams{1.0, 0.0, a0, 0.0, ""};
        auto add = [&](double t, double r, bool cal) {
            SandwichPoint p;
            p.coords = {t, r};
            p.estimate = free_density(m1, t, r).density;
            p.log_shape_lower = std::log(dirichlet_lower(genv, t, pt(-r / 2.0), pt(r / 2.0)));
            p.log_shape_upper = std::log(dirichlet_upper(genv, t, pt(-r / 2.0), pt(r / 2.0)));
            p.z_lower = t * k1.h(k1.theta(eta, r, t));
            p.z_upper = t * k1.h(k1.theta(a0, r, t));
            p.calibration = cal;
            in.points.push_back(p);
        };
        int en_i = static_cast<int>(en);
        for (double t : log_edges(f1t.front(), f1t.back(), en_i))
            for (double r : log_edges(f1r.front(), f1r.back(), en_i)) add(t, r, true);
        for (double t : logspace(f1t.front(), f1t.back(), en_i))
            for (double r : logspace(f1r.front(), f1r.back(), en_i)) add(t, r, false);
        RatioReport er;
        auto res = run_sandwich(in, er);
        // the lower bound is what eta parameterises: held-out coverage by the fitted lower shape
        double cover = kInf;
        size_t col_ratio = in.coord_names.size() + 3, col_cal = in.coord_names.size() + 5;
        for (auto& row : er.rows)
            if (row[col_cal] == 0.0) cover = std::min(cover, row[col_ratio]);
        status.push_back(cover >= 1.0);
        rep.constants.push_back({"eta_" + fmt(eta) + "_lower_cover", cover});
        rep.constants.push_back({"eta_" + fmt(eta) + "_spread", res.spread});
    }
    bool same = std::all_of(status.begin(), status.end(), [&](int v) { return v == status.front(); });
    rep.check("eta_pass_status_equal", same ? 1.0 : 0.0, 1.0, same);
    bool all = std::all_of(status.begin(), status.end(), [](int v) { return v == 1; });
    rep.check("eta_lower_cover_all", all ? 1.0 : 0.0, 1.0, all);
    return rep;
}

// ---------------------------------------------------------------- condition checkers
RatioReport condition_checkers(const ConfigSection& s, const RunContext&) {
    auto exps = s.list("exponents");
    double off = s.num("mismatch");
    s.finish();
    RatioReport rep;
    rep.grid = "power laws r^a on the default scaling grids; catalog on-diagonal classes";
    rep.columns = {"exponent", "kind", "tested_exponent", "violation", "pass"};
    bool accept = true, reject = true;
    for (double a : exps) {
        auto f = [a](double r) { return std::pow(r, a); };
        for (auto k : {ScalingKind::WLSinf, ScalingKind::WUSinf, ScalingKind::WLS0, ScalingKind::WUS0}) {
            auto res = check_scaling(f, k, a, 1.0);
            accept &= res.pass && std::abs(res.constant - 1.0) < 1e-9;
            rep.rows.push_back({a, static_cast<double>(k), a, res.violation, res.pass ? 1.0 : 0.0});
        }
        // lower scaling with a larger exponent and upper scaling with a smaller one must fail
        for (auto [k, e] : {std::pair{ScalingKind::WLSinf, a + off}, std::pair{ScalingKind::WUSinf, a - off},
                            std::pair{ScalingKind::WLS0, a + off}, std::pair{ScalingKind::WUS0, a - off}}) {
            auto res = check_scaling(f, k, e, 1.0);
            reject &= !res.pass;
            rep.rows.push_back({a, static_cast<double>(k), e, res.violation, res.pass ? 1.0 : 0.0});
        }
    }
    rep.check("accepts_exact_power_laws", accept, 1.0, accept);
    rep.check("rejects_mismatched_exponents", reject, 1.0, reject);
    bool cls = true;
    for (auto& name : catalog_names()) {
        bool ok = classify_on_diagonal(catalog_kit(name)) == catalog_model(name).ondiag;
        rep.check("ondiag_class_" + name, ok, 1.0, ok);
        cls &= ok;
    }
    rep.spread = accept && reject && cls ? 1.0 : 0.0;
    return rep;
}

}  // namespace

const std::map<std::string, Experiment>& experiment_registry() {
    static const std::map<std::string, Experiment> reg = {
        {"cauchy_oracle", cauchy_oracle},         {"normalization", normalization},
        {"scale_identities", scale_identities},   {"asym_sandwich", asym_sandwich},
        {"asym_lh", asym_lh},                     {"hkeb_sandwich", hkeb_sandwich},
        {"exit_times", exit_times},               {"survival_boundary", survival_boundary},
        {"main1_sandwich", main1_sandwich},       {"decay_bracket", decay_bracket},
        {"green_sandwich", green_sandwich},       {"logp_shapes", logp_shapes},
        {"condition_checkers", condition_checkers},
    };
    return reg;
}

}  // namespace levyhk
