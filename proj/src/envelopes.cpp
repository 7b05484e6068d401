#include "levyhk/envelopes.hpp"

#include <algorithm>
#include <cmath>

#include "levyhk/errors.hpp"

namespace levyhk {

std::string to_string(DirichletRegime r) {
    switch (r) {
    case DirichletRegime::S1Small: return "S1-small-t";
    case DirichletRegime::S2Small: return "S2-small-t";
    case DirichletRegime::L1Large: return "L1-large-t";
    case DirichletRegime::L2Large: return "L2-large-t";
    case DirichletRegime::LowerUniversal: return "lower-universal";
    }
    return "?";
}

DirichletEnvelope make_dirichlet_envelope(const LevyModel& m, const ScaleKit& kit, const Domain& dom,
                                          DirichletRegime regime) {
    if (dom.dim() != m.d) throw UsageError("domain and model dimensions differ");
    const auto& f = m.flags;
    switch (regime) {
    case DirichletRegime::S1Small:
        if (!f.S1) throw UsageError("model '" + m.name + "' does not satisfy (S-1)");
        break;
    case DirichletRegime::S2Small:
        if (!f.S2) throw UsageError("model '" + m.name + "' does not satisfy (S-2)");
        break;
    case DirichletRegime::L1Large:
        if (!(f.L1 && f.D)) throw UsageError("model '" + m.name + "' does not satisfy (L-1) and (D)");
        if (!dom.bounded()) throw UsageError("large time estimates need a bounded domain");
        break;
    case DirichletRegime::L2Large:
        if (!(f.L2 || f.S2)) throw UsageError("model '" + m.name + "' satisfies neither (L-2) nor (S-2)");
        if (!dom.bounded()) throw UsageError("large time estimates need a bounded domain");
        break;
    case DirichletRegime::LowerUniversal: break;
    }
    DirichletEnvelope env;
    env.model = &m;
    env.kit = &kit;
    env.domain = dom;
    env.regime = regime;
    return env;
}

double boundary_factor(const ScaleKit& kit, double t, double delta) {
    if (!(t > 0.0) || !(delta > 0.0)) throw DomainError("boundary factor needs t > 0 and delta > 0");
    return std::sqrt(std::min(1.0, 1.0 / (t * kit.L(delta))));
}

namespace {

double both_factors(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    return boundary_factor(*env.kit, t, env.domain.boundary_distance(x)) *
           boundary_factor(*env.kit, t, env.domain.boundary_distance(y));
}

double profile(const DirichletEnvelope& env, const EnvelopeParams& p, double t, double rho) {
    return p.c * t * env.model->nu(rho) * std::exp(-p.b * t * env.kit->h(rho));
}

void check_points(const DirichletEnvelope& env, const Point& x, const Point& y) {
    if (!env.domain.contains(x) || !env.domain.contains(y)) throw UsageError("envelope points must be interior");
}

}  // namespace

double dirichlet_lower_universal(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    check_points(env, x, y);
    double r = (x - y).norm();
    if (r == 0.0) throw DomainError("lower envelope shape is undefined on the diagonal");
    return both_factors(env, t, x, y) * profile(env, env.lower, t, r);
}

double dirichlet_lower(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    check_points(env, x, y);
    double r = (x - y).norm();
    if (env.regime == DirichletRegime::S2Small)
        return both_factors(env, t, x, y) * profile(env, env.lower, t, env.kit->theta(env.eta, r, t));
    if (env.regime != DirichletRegime::S1Small && env.regime != DirichletRegime::LowerUniversal)
        throw UsageError("small time lower envelope requested in regime " + to_string(env.regime));
    return dirichlet_lower_universal(env, t, x, y);
}

double dirichlet_upper(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    check_points(env, x, y);
    double r = (x - y).norm();
    if (env.regime == DirichletRegime::S2Small)
        return both_factors(env, t, x, y) * profile(env, env.upper, t, env.kit->theta(env.a0, r, t));
    if (env.regime != DirichletRegime::S1Small)
        throw UsageError("small time upper envelope requested in regime " + to_string(env.regime));
    if (r == 0.0) throw DomainError("(S-1) upper envelope is undefined on the diagonal");
    return both_factors(env, t, x, y) * profile(env, env.upper, t, r);
}

Bracket survival_envelope(const DirichletEnvelope& env, double t, const Point& x, bool all_t) {
    if (!env.domain.contains(x)) throw UsageError("survival envelope point must be interior");
    if (!(t > 0.0)) throw DomainError("survival envelope needs t > 0");
    double v = env.kit->V(env.domain.boundary_distance(x));
    if (!all_t) {
        double s = std::min(1.0, v / std::sqrt(t));
        return {env.lower.c * s, env.upper.c * s};
    }
    if (!env.domain.bounded()) throw UsageError("all-time survival envelope needs a bounded domain");
    double s = std::min(1.0, v / std::sqrt(std::min(t, 2.0)));
    double lo = env.lower.c * s * std::exp(-env.lower.b * t * env.kit->h(env.domain.r1() / 2.0));
    double hi = env.upper.c * s * std::exp(-env.upper.b * t * env.kit->h(env.domain.r2()));
    return {lo, hi};
}

Bracket dirichlet_large_time(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    check_points(env, x, y);
    const auto& kit = *env.kit;
    double bx = 1.0 / std::sqrt(kit.L(env.domain.boundary_distance(x)));
    double by = 1.0 / std::sqrt(kit.L(env.domain.boundary_distance(y)));
    if (env.regime == DirichletRegime::L2Large) {
        double s = std::exp(-env.lambda * t) * bx * by;
        return {env.lower.c * s, env.upper.c * s};
    }
    if (env.regime != DirichletRegime::L1Large)
        throw UsageError("large time envelope requested in regime " + to_string(env.regime));
    double r = (x - y).norm();
    if (r == 0.0) throw DomainError("(L-1) large time envelope is undefined on the diagonal");
    double nu = env.model->nu(r), hr = kit.h(r);
    double lo = env.lower.c * bx * by *
                (nu * std::exp(-env.lower.b * t * hr) + std::exp(-env.rate_lower * t * kit.h(env.domain.r1() / 2.0)));
    double hi = env.upper.c * bx * by *
                (nu * std::exp(-env.upper.b * t * hr) + std::exp(-env.rate_upper * t * kit.h(env.domain.r2())));
    return {lo, hi};
}

double large1_upper(const DirichletEnvelope& env, double t, const Point& x, const Point& y) {
    check_points(env, x, y);
    if (!env.domain.bounded()) throw UsageError("large1 bound needs a bounded domain");
    double r = (x - y).norm();
    if (r == 0.0) throw DomainError("large1 bound is undefined on the diagonal");
    double p = free_density(*env.model, t / 2.0, r / 2.0).density;
    return env.upper.c * p * std::exp(-env.upper.b * t * env.kit->h(env.domain.r2()) / 2.0);
}

GreenEnvelope make_green_envelope(const LevyModel& m, const ScaleKit& kit, const Domain& dom) {
    if (!dom.bounded()) throw UsageError("Green envelope needs a bounded domain");
    if (!m.flags.D) throw UsageError("model '" + m.name + "' does not satisfy (D)");
    if (dom.dim() != m.d) throw UsageError("domain and model dimensions differ");
    GreenEnvelope g;
    g.model = &m;
    g.kit = &kit;
    g.domain = dom;
    return g;
}

double green_shape(const GreenEnvelope& env, const Point& x, const Point& y) {
    if (!env.domain.contains(x) || !env.domain.contains(y)) throw UsageError("Green envelope points must be interior");
    double r = (x - y).norm();
    if (r == 0.0) throw DomainError("Green function diverges on the diagonal");
    const auto& kit = *env.kit;
    double Lr = kit.L(r);
    double Lx = kit.L(env.domain.boundary_distance(x)), Ly = kit.L(env.domain.boundary_distance(y));
    double bf = std::min(1.0, Lr / std::sqrt(Lx * Ly));
    return bf * kit.weight()(1.0 / r) / (std::pow(r, env.model->d) * Lr * Lr);
}

Bracket green_envelope(const GreenEnvelope& env, const Point& x, const Point& y) {
    double s = green_shape(env, x, y);
    return {env.c_lower * s, env.c_upper * s};
}

double green1_product(const ScaleKit& kit, double dx, double dy, double r) {
    double vr = kit.V(r);
    return std::min(1.0, kit.V(dx) / vr) * std::min(1.0, kit.V(dy) / vr);
}

double green1_min(const ScaleKit& kit, double dx, double dy, double r) {
    double vr = kit.V(r);
    return std::min(1.0, kit.V(dx) * kit.V(dy) / (vr * vr));
}

double intgreen_shape(const LevyModel& m, const ScaleKit& kit, double r) {
    if (!(r > 0.0)) throw DomainError("intgreen shape needs r > 0");
    double L = kit.L(r);
    return m.nu(r) / (L * L);
}

double frak_L(double r) { return std::log(M_E + r); }

double logp_L_shape(double p, double r) {
    if (!(r > 0.0)) throw DomainError("logp shape needs r > 0");
    if (p < -1.0) throw UsageError("logp shapes need p >= -1");
    if (p == -1.0) return frak_L(frak_L(1.0 / r));
    return std::pow(frak_L(1.0 / r), p + 1.0);
}

double logp_large_boundary_factor(double p, double delta) {
    if (p == -1.0) return 1.0 / frak_L(frak_L(1.0 / delta));
    return std::pow(frak_L(1.0 / delta), -(p + 1.0) / 2.0);
}

double logp_boundary_factor(double p, double t, double delta) {
    if (!(t > 0.0) || !(delta > 0.0)) throw DomainError("boundary factor needs t > 0 and delta > 0");
    return std::min(1.0, logp_large_boundary_factor(p, delta) / std::sqrt(t));
}

bool f1_first_branch(double p, double t, double r, double a2) {
    return r <= std::exp(-a2 * std::pow(t, -1.0 / p));
}

double log_f1_logp(double p, double t, double r, double a1, double a2, double a3, int d) {
    if (!(p > 0.0)) throw UsageError("F1 is defined for p > 0; use logp_case2 / logp_case3");
    if (!(t > 0.0) || !(r > 0.0)) throw DomainError("F1 needs t > 0 and r > 0");
    if (f1_first_branch(p, t, r, a2)) return a1 * std::pow(t, -1.0 / p);
    double lp = std::pow(frak_L(1.0 / r), p);
    return std::log(t) + (-d + a3 * t * lp) * std::log(r) + std::log(lp);
}

double f1_logp(double p, double t, double r, double a1, double a2, double a3, int d) {
    return std::exp(log_f1_logp(p, t, r, a1, a2, a3, d));
}

double logp_case2(double p, double t, double r, double c, int d) {
    if (!(p > -1.0 && p <= 0.0)) throw UsageError("case 2 shape needs -1 < p <= 0");
    double lp = std::pow(frak_L(1.0 / r), p);
    return t * std::pow(r, -d + c * t * lp) * lp;
}

double logp_case3(double t, double r, double c, int d) {
    return t * std::pow(r, -d) * std::pow(frak_L(1.0 / r), -1.0 - c * t);
}

}  // namespace levyhk
