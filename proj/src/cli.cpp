#include "levyhk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

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

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Table {
    std::vector<std::string> cols;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;

    void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }

    void print(std::ostream& os) const {
        std::vector<size_t> w(cols.size());
        for (size_t i = 0; i < cols.size(); ++i) w[i] = cols[i].size();
        for (auto& r : rows)
            for (size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
        auto line = [&](const std::vector<std::string>& r) {
            for (size_t i = 0; i < r.size(); ++i) {
                os << r[i];
                if (i + 1 < r.size()) os << std::string(w[i] - r[i].size() + 2, ' ');
            }
            os << "\n";
        };
        line(cols);
        for (auto& r : rows) line(r);
        for (auto& n : notes) os << n << "\n";
    }

    void write_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw UsageError("cannot write '" + path + "'");
        for (size_t i = 0; i < cols.size(); ++i) f << (i ? "," : "") << cols[i];
        f << "\n";
        for (auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
            f << "\n";
        }
    }
};

std::string pstr(const Point& p) {
    std::string s;
    for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ";" : "") + fmt(p(i));
    return s;
}

// "x;y;z" lists of points, coordinates comma separated
std::vector<Point> parse_points(const std::string& s) {
    std::vector<Point> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';'))
        if (!tok.empty()) out.push_back(parse_point(tok));
    if (out.empty()) throw UsageError("empty point list");
    return out;
}

std::string b01(bool b) { return b ? "1" : "0"; }

struct McFlags {
    std::string model, domain;
    long paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double horizon = 1.0;
    int refine = 1;
    int block = 1000;
    int workers = 0;
};

void add_mc_flags(CLI::App* c, McFlags& f) {
    c->add_option("--model", f.model, "catalog model name")->required();
    c->add_option("--domain", f.domain, "interval:a,b[;c,d] | ball:cx[,cy,cz],r | annulus:cx[,..],r_in,r_out")
        ->required();
    c->add_option("--paths", f.paths, "number of paths")->capture_default_str();
    c->add_option("--dt", f.dt, "skeleton step")->capture_default_str();
    c->add_option("--seed", f.seed, "random seed (required)")->required();
    c->add_option("--horizon", f.horizon, "simulation horizon")->capture_default_str();
    c->add_option("--refine", f.refine, "dt halvings monitored for the bias flag")->capture_default_str();
    c->add_option("--block", f.block, "paths per random stream block")->capture_default_str();
    c->add_option("--workers", f.workers, "worker threads, 0 = all (LEVYHK_THREADS caps)")->capture_default_str();
}

McConfig to_config(const McFlags& f) {
    McConfig c;
    c.paths = f.paths;
    c.dt = f.dt;
    c.seed = f.seed;
    c.horizon = f.horizon;
    c.refinement_levels = f.refine;
    c.block_size = f.block;
    c.workers = f.workers;
    validate(c);
    return c;
}

std::vector<std::string> est_cells(const McEstimate& e) {
    return {fmt(e.value), fmt(e.std_error), fmt(e.refined_value), b01(e.bias_flag)};
}

Table model_list() {
    Table t;
    t.cols = {"name", "family", "d", "flags", "ondiag", "kappa1", "kappa2", "sampler"};
    for (auto& n : catalog_names()) {
        const auto& m = catalog_model(n);
        t.add({m.name, m.family, std::to_string(m.d), describe(m.flags), to_string(m.ondiag), fmt(m.kappa1),
               fmt(m.kappa2), m.sampler ? "yes" : "no"});
    }
    return t;
}

Table model_show(const std::string& name) {
    const auto& m = catalog_model(name);
    Table t;
    t.cols = {"key", "value"};
    std::string params;
    for (auto& [k, v] : m.params) params += (params.empty() ? "" : ";") + k + "=" + fmt(v);
    std::string chain;
    if (m.sampler)
        for (auto& st : m.sampler->chain)
            chain += (chain.empty() ? "" : ">") +
                     (st.kind == SubordinatorStage::Kind::Gamma ? std::string("gamma") : "stable(" + fmt(st.beta) + ")");
    t.add({"name", m.name});
    t.add({"family", m.family});
    t.add({"d", std::to_string(m.d)});
    t.add({"params", params});
    t.add({"flags", describe(m.flags)});
    t.add({"ondiag", to_string(m.ondiag)});
    t.add({"divergence_threshold", fmt(divergence_threshold(m))});
    t.add({"kappa1", fmt(m.kappa1)});
    t.add({"kappa2", fmt(m.kappa2)});
    t.add({"psi_log_rate", fmt(m.psi_log_rate)});
    t.add({"sampler", chain.empty() ? "none" : chain});
    return t;
}

Table scale_table(const std::string& name, std::vector<double> rs, double r0, double r1, int n) {
    const auto& m = catalog_model(name);
    const auto& kit = catalog_kit(name);
    if (rs.empty()) {
        if (!(r0 > 0.0 && r1 > r0) || n < 2) throw UsageError("scale needs --r or a valid --r-min/--r-max/--points");
        rs = logspace(r0, r1, n);
    }
    Table t;
    t.cols = {"r", "K", "L", "h", "V", "psi_inv_r"};
    for (double r : rs) {
        if (!(r > 0.0)) throw UsageError("scale: r must be positive");
        t.add({fmt(r), fmt(kit.K(r)), fmt(kit.L(r)), fmt(kit.h(r)), fmt(kit.V(r)), fmt(m.psi(1.0 / r))});
    }
    return t;
}

Table kernel_free(const std::string& name, const std::vector<double>& ts, const std::vector<double>& rs,
                  const EnvelopeParams& p) {
    const auto& m = catalog_model(name);
    const auto& kit = catalog_kit(name);
    Table t;
    t.cols = {"t", "r", "p", "quad_err", "lower_env", "upper_env"};
    bool any_div = false;
    for (double tt : ts)
        for (double r : rs) {
            if (!(tt > 0.0) || r < 0.0) throw UsageError("kernel free needs t > 0 and r >= 0");
            auto v = free_density(m, tt, r);
            any_div |= v.divergent;
            double lo = r > 0.0 ? envelope_free_lower(m, kit, p, tt, r) : kNaN;
            double hi = kNaN;
            try {
                hi = envelope_free_upper(m, kit, p, tt, r, regime_of(m));
            } catch (const DomainError&) {
            }
            t.add({fmt(tt), fmt(r), v.divergent ? "inf" : fmt(v.density), fmt(v.quad_err), fmt(lo), fmt(hi)});
        }
    if (any_div) t.notes.push_back("inf: p(t, 0) diverges for this model at that t");
    return t;
}

Table kernel_dirichlet(const McFlags& f, const std::vector<double>& ts, const std::string& xs, const std::string& ys) {
    const auto& m = catalog_model(f.model);
    auto dom = parse_domain(f.domain);
    auto cfg = to_config(f);
    Point x = parse_point(xs);
    auto yv = parse_points(ys);
    std::vector<DirichletQuery> q;
    for (double t : ts)
        for (auto& y : yv) q.push_back({t, y});
    auto est = dirichlet_kernel_batch(m, dom, x, q, cfg);
    Table t;
    t.cols = {"t", "x", "y", "estimate", "std_error", "refined", "bias_flag", "raw", "clipped_fraction"};
    for (size_t i = 0; i < q.size(); ++i) {
        std::vector<std::string> row = {fmt(q[i].t), pstr(x), pstr(q[i].y)};
        for (auto& c : est_cells(est[i])) row.push_back(c);
        row.push_back(fmt(est[i].raw_value));
        row.push_back(fmt(est[i].clipped_fraction));
        t.add(row);
    }
    return t;
}

Table survival_table(const McFlags& f, const std::vector<double>& ts, const std::string& xs) {
    auto sc = survival_probability(catalog_model(f.model), parse_domain(f.domain), parse_point(xs), ts, to_config(f));
    Table t;
    t.cols = {"t", "survival", "std_error", "refined", "bias_flag"};
    for (size_t i = 0; i < ts.size(); ++i) {
        std::vector<std::string> row = {fmt(ts[i])};
        for (auto& c : est_cells(sc.estimates[i])) row.push_back(c);
        t.add(row);
    }
    return t;
}

Table exit_table(const McFlags& f, const std::string& xs) {
    Point x = parse_point(xs);
    auto e = mean_exit_time(catalog_model(f.model), parse_domain(f.domain), x, to_config(f));
    Table t;
    t.cols = {"x", "estimate", "std_error", "refined", "bias_flag"};
    std::vector<std::string> row = {pstr(x)};
    for (auto& c : est_cells(e)) row.push_back(c);
    t.add(row);
    return t;
}

Table green_table(const McFlags& f, const std::string& xs, const std::string& ys, double t0, double t1, int n) {
    auto cfg = to_config(f);
    if (t1 > cfg.horizon) throw UsageError("green: --t-max must not exceed --horizon");
    Point x = parse_point(xs);
    auto yv = parse_points(ys);
    auto g = green_function(catalog_model(f.model), parse_domain(f.domain), x, yv, cfg, logspace(t0, t1, n));
    Table t;
    t.cols = {"x", "y", "green", "std_error", "refined", "bias_flag", "tail", "lambda"};
    for (size_t i = 0; i < yv.size(); ++i) {
        std::vector<std::string> row = {pstr(x), pstr(yv[i])};
        for (auto& c : est_cells(g[i].total)) row.push_back(c);
        row.push_back(fmt(g[i].tail));
        row.push_back(fmt(g[i].lambda));
        t.add(row);
    }
    return t;
}

Table decay_table(const McFlags& f) {
    auto d = decay_rate(catalog_model(f.model), parse_domain(f.domain), to_config(f));
    Table t;
    t.cols = {"lambda", "lambda_se", "lambda_refined", "bias_flag", "r_squared", "t_lo", "t_hi", "h_r2", "h_r1_half"};
    t.add({fmt(d.lambda), fmt(d.lambda_std_error), fmt(d.lambda_refined), b01(d.bias_flag), fmt(d.r_squared),
           fmt(d.t_lo), fmt(d.t_hi), fmt(d.h_r2), fmt(d.h_r1_half)});
    return t;
}

struct EnvFlags {
    std::string which, model, domain = "interval:-1,1", x = "0", y = "0.5";
    std::vector<double> ts{0.1};
    double c = 1.0, b = 1.0, a0 = 1.0, eta = 1.0, lambda = kNaN;
    bool all_t = false;
    double p = 1.0, r = 0.01, a1 = 1.0, a2 = 1.0, a3 = 1.0;
};

Table envelope_table(const EnvFlags& f) {
    Table t;
    t.cols = {"which", "t", "x", "y", "r", "lower", "upper"};
    if (f.which == "f1") {
        for (double tt : f.ts) {
            double v = f1_logp(f.p, tt, f.r, f.a1, f.a2, f.a3);
            t.add({f.which, fmt(tt), "nan", "nan", fmt(f.r), fmt(v), fmt(v)});
        }
        return t;
    }
    if (f.model.empty()) throw UsageError("envelope --which " + f.which + " needs --model");
    const auto& m = catalog_model(f.model);
    const auto& kit = catalog_kit(f.model);
    auto dom = parse_domain(f.domain);
    Point x = parse_point(f.x), y = parse_point(f.y);
    double r = (x - y).norm();
    if (f.which == "green") {
        auto env = make_green_envelope(m, kit, dom);
        env.c_lower = 1.0 / f.c;
        env.c_upper = f.c;
        auto br = green_envelope(env, x, y);
        t.add({f.which, "nan", pstr(x), pstr(y), fmt(r), fmt(br.lower), fmt(br.upper)});
        return t;
    }
    DirichletRegime reg;
    if (f.which == "main1") reg = DirichletRegime::S1Small;
    else if (f.which == "main2-small") reg = DirichletRegime::S2Small;
    else if (f.which == "pdl" || f.which == "survival") reg = DirichletRegime::LowerUniversal;
    else if (f.which == "large1") reg = DirichletRegime::L1Large;
    else if (f.which == "large2") reg = DirichletRegime::L2Large;
    else throw UsageError("unknown envelope '" + f.which + "'");
    auto env = make_dirichlet_envelope(m, kit, dom, reg);
    env.lower = EnvelopeParams{1.0 / f.c, f.b, f.eta, 0.0, ""};
    env.upper = EnvelopeParams{f.c, f.b, f.a0, 0.0, ""};
    env.eta = f.eta;
    env.a0 = f.a0;
    if (reg == DirichletRegime::L2Large) {
        if (!(f.lambda > 0.0)) throw UsageError("large2 needs --lambda > 0 (see the decay subcommand)");
        env.lambda = f.lambda;
    }
    for (double tt : f.ts) {
        Bracket br{kNaN, kNaN};
        if (f.which == "main1" || f.which == "main2-small") br = {dirichlet_lower(env, tt, x, y), dirichlet_upper(env, tt, x, y)};
        else if (f.which == "pdl") br.lower = dirichlet_lower_universal(env, tt, x, y);
        else if (f.which == "survival") br = survival_envelope(env, tt, x, f.all_t);
        else br = dirichlet_large_time(env, tt, x, y);
        bool surv = f.which == "survival";
        t.add({f.which, fmt(tt), pstr(x), surv ? "nan" : pstr(y), surv ? "nan" : fmt(r), fmt(br.lower), fmt(br.upper)});
    }
    return t;
}

Table verify_table(const std::string& target, const std::string& config, const std::uint64_t* seed,
                   const std::string& out_dir, int workers, bool& pass) {
    auto cfg = load_config(config);
    RunContext ctx;
    if (seed) ctx.seed = *seed;
    else if (cfg.global.has("seed")) ctx.seed = static_cast<std::uint64_t>(cfg.global.integer("seed"));
    else throw UsageError("verify needs --seed or a [global] seed in the config");
    ctx.workers = workers;
    ctx.out_dir = out_dir;
    auto sum = run_all(cfg, ctx, target == "all" ? "" : target);
    pass = sum.pass;
    Table t;
    t.cols = {"experiment", "pass", "spread", "unreliable", "checks_passed", "checks_total", "runtime_s"};
    for (auto& r : sum.reports) {
        long np = std::count_if(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
        t.add({r.id, b01(r.pass()), fmt(r.spread), b01(r.unreliable), std::to_string(np), std::to_string(r.checks.size()),
               fmt(std::round(r.runtime * 10.0) / 10.0)});
        for (auto& c : r.checks)
            if (!c.pass) t.notes.push_back("  " + r.id + ": " + c.name + " = " + fmt(c.value) + " (limit " + fmt(c.limit) + ")");
        if (!r.note.empty()) t.notes.push_back("  " + r.id + ": " + r.note);
    }
    t.notes.push_back(sum.pass ? "all experiments passed" : "verification FAILED");
    return t;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"levyhk: heat kernels of isotropic unimodal Levy processes"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");
    std::string csv;
    std::function<Table()> action;
    bool verify_pass = true;

    auto with_csv = [&csv](CLI::App* c) { c->add_option("--csv", csv, "also write the table as CSV to this path"); };

    // model
    auto* model = app.add_subcommand("model", "catalog models");
    model->require_subcommand(1);
    auto* mlist = model->add_subcommand("list", "list catalog models");
    with_csv(mlist);
    mlist->callback([&] { action = [] { return model_list(); }; });
    auto* mshow = model->add_subcommand("show", "show one model");
    std::string show_name;
    mshow->add_option("--model", show_name, "catalog model name")->required();
    with_csv(mshow);
    mshow->callback([&] { action = [&] { return model_show(show_name); }; });

    // scale
    auto* scale = app.add_subcommand("scale", "scale functions K, L, h on an r grid");
    std::string sc_model;
    std::vector<double> sc_r;
    double sc_r0 = 1e-4, sc_r1 = 1e2;
    int sc_n = 13;
    scale->add_option("--model", sc_model, "catalog model name")->required();
    scale->add_option("--r", sc_r, "radii, comma separated")->delimiter(',');
    scale->add_option("--r-min", sc_r0)->capture_default_str();
    scale->add_option("--r-max", sc_r1)->capture_default_str();
    scale->add_option("--points", sc_n)->capture_default_str();
    with_csv(scale);
    scale->callback([&] { action = [&] { return scale_table(sc_model, sc_r, sc_r0, sc_r1, sc_n); }; });

    // kernel
    auto* kernel = app.add_subcommand("kernel", "free and Dirichlet heat kernels");
    kernel->require_subcommand(1);
    auto* kfree = kernel->add_subcommand("free", "free density by Fourier inversion; columns t,r,p,quad_err,lower_env,upper_env");
    std::string kf_model;
    std::vector<double> kf_t, kf_r;
    EnvelopeParams kf_p;
    kfree->add_option("--model", kf_model, "catalog model name")->required();
    kfree->add_option("--t", kf_t, "times, comma separated")->required()->delimiter(',');
    kfree->add_option("--r", kf_r, "radii, comma separated")->required()->delimiter(',');
    kfree->add_option("--c", kf_p.c, "envelope constant")->capture_default_str();
    kfree->add_option("--b", kf_p.b, "envelope rate")->capture_default_str();
    kfree->add_option("--a", kf_p.a, "theta parameter of the (S-2) upper envelope")->capture_default_str();
    with_csv(kfree);
    kfree->callback([&] { action = [&] { return kernel_free(kf_model, kf_t, kf_r, kf_p); }; });

    auto* kdir = kernel->add_subcommand("dirichlet", "killed kernel by Monte Carlo (Dynkin-Hunt)");
    McFlags kd;
    std::vector<double> kd_t;
    std::string kd_x, kd_y;
    add_mc_flags(kdir, kd);
    kdir->add_option("--t", kd_t, "times, comma separated")->required()->delimiter(',');
    kdir->add_option("--x", kd_x, "start point x[,y,z]")->required();
    kdir->add_option("--y", kd_y, "target points, ';' separated")->required();
    with_csv(kdir);
    kdir->callback([&] { action = [&] { return kernel_dirichlet(kd, kd_t, kd_x, kd_y); }; });

    // survival / exit / green / decay
    auto* surv = app.add_subcommand("survival", "survival probability P_x(tau > t); columns t,survival,std_error,refined,bias_flag");
    McFlags sv;
    std::vector<double> sv_t;
    std::string sv_x;
    add_mc_flags(surv, sv);
    surv->add_option("--t", sv_t, "times, comma separated")->required()->delimiter(',');
    surv->add_option("--x", sv_x, "start point")->required();
    with_csv(surv);
    surv->callback([&] { action = [&] { return survival_table(sv, sv_t, sv_x); }; });

    auto* ex = app.add_subcommand("exit", "mean exit time; columns x,estimate,std_error,refined,bias_flag");
    McFlags et;
    std::string et_x;
    add_mc_flags(ex, et);
    ex->add_option("--x", et_x, "start point")->required();
    with_csv(ex);
    ex->callback([&] { action = [&] { return exit_table(et, et_x); }; });

    auto* gr = app.add_subcommand("green", "Green function; columns x,y,green,std_error,refined,bias_flag,tail,lambda");
    McFlags gf;
    std::string g_x, g_y;
    double g_t0 = 1e-3, g_t1 = 4.0;
    int g_n = 48;
    add_mc_flags(gr, gf);
    gr->add_option("--x", g_x, "start point")->required();
    gr->add_option("--y", g_y, "target points, ';' separated")->required();
    gr->add_option("--t-min", g_t0)->capture_default_str();
    gr->add_option("--t-max", g_t1)->capture_default_str();
    gr->add_option("--t-points", g_n)->capture_default_str();
    with_csv(gr);
    gr->callback([&] { action = [&] { return green_table(gf, g_x, g_y, g_t0, g_t1, g_n); }; });

    auto* dec = app.add_subcommand("decay", "large time decay rate of the survival probability");
    McFlags df;
    add_mc_flags(dec, df);
    with_csv(dec);
    dec->callback([&] { action = [&] { return decay_table(df); }; });

    // envelope
    auto* envc = app.add_subcommand("envelope", "envelope shapes; columns which,t,x,y,r,lower,upper");
    EnvFlags ef;
    envc->add_option("--which", ef.which, "envelope")
        ->required()
        ->check(CLI::IsMember({"main1", "main2-small", "pdl", "large1", "large2", "green", "survival", "f1"}));
    envc->add_option("--model", ef.model, "catalog model name");
    envc->add_option("--domain", ef.domain)->capture_default_str();
    envc->add_option("--t", ef.ts, "times, comma separated")->delimiter(',');
    envc->add_option("--x", ef.x)->capture_default_str();
    envc->add_option("--y", ef.y)->capture_default_str();
    envc->add_option("--c", ef.c, "constant; lower uses 1/c")->capture_default_str();
    envc->add_option("--b", ef.b, "rate")->capture_default_str();
    envc->add_option("--a0", ef.a0)->capture_default_str();
    envc->add_option("--eta", ef.eta)->capture_default_str();
    envc->add_option("--lambda", ef.lambda, "decay rate for large2");
    envc->add_flag("--all-t", ef.all_t, "survival: bounded domain, all times");
    envc->add_option("--p", ef.p, "f1: log exponent")->capture_default_str();
    envc->add_option("--r", ef.r, "f1: radius")->capture_default_str();
    envc->add_option("--a1", ef.a1)->capture_default_str();
    envc->add_option("--a2", ef.a2)->capture_default_str();
    envc->add_option("--a3", ef.a3)->capture_default_str();
    with_csv(envc);
    envc->callback([&] { action = [&] { return envelope_table(ef); }; });

    // verify
    auto* ver = app.add_subcommand("verify", "run the acceptance suite, or one experiment of it");
    std::string v_target, v_config, v_out = "levyhk_out";
    std::uint64_t v_seed = 0;
    int v_workers = 0;
    ver->add_option("target", v_target, "all | <experiment id>")->required();
    ver->add_option("--config", v_config, "suite config")->required();
    auto* v_seed_opt = ver->add_option("--seed", v_seed, "overrides the [global] seed");
    ver->add_option("--out", v_out, "report directory")->capture_default_str();
    ver->add_option("--workers", v_workers, "worker threads, 0 = all")->capture_default_str();
    with_csv(ver);
    ver->callback([&] {
        action = [&] {
            return verify_table(v_target, v_config, v_seed_opt->count() ? &v_seed : nullptr, v_out, v_workers,
                                verify_pass);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }
    try {
        Table t = action();
        t.print(out);
        if (!csv.empty()) t.write_csv(csv);
        return verify_pass ? kExitOk : kExitVerifyFailed;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what();
        if (!std::isnan(e.partial)) err << " (partial value " << fmt(e.partial) << ")";
        err << "\n";
        return kExitNumeric;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
    }
    return kExitUsage;
}

}  // namespace levyhk
