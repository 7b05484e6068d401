#pragma once

#include <string>

#include "levyhk/free_kernel.hpp"
#include "levyhk/geometry.hpp"
#include "levyhk/models.hpp"
#include "levyhk/scalekit.hpp"

namespace levyhk {

enum class DirichletRegime { S1Small, S2Small, L1Large, L2Large, LowerUniversal };

std::string to_string(DirichletRegime r);

struct Bracket {
    double lower = 0.0, upper = 0.0;
};

struct DirichletEnvelope {
    const LevyModel* model = nullptr;
    const ScaleKit* kit = nullptr;
    Domain domain;
    EnvelopeParams lower, upper;
    DirichletRegime regime = DirichletRegime::S1Small;
    double eta = 1.0;  // theta parameter of the S2 lower bound
    double a0 = 1.0;   // theta parameter of the S2 upper bound
    double lambda = 0.0;  // L2: decay rate, usually from decay_rate
    // L1: rates of the pure exponential term, against h(r1/2) (lower) and h(r2) (upper)
    double rate_lower = 1.0, rate_upper = 1.0;
};

// checks the flags the regime needs; UsageError on mismatch
DirichletEnvelope make_dirichlet_envelope(const LevyModel& m, const ScaleKit& kit, const Domain& dom,
                                          DirichletRegime regime);

// (1 ^ 1/(t L(delta)))^{1/2}
double boundary_factor(const ScaleKit& kit, double t, double delta);

// boundary factors * c t nu(r) exp(-b t h(r)), r = |x - y| > 0
double dirichlet_lower_universal(const DirichletEnvelope& env, double t, const Point& x, const Point& y);
// S1: radius |x-y|; S2: radius theta_eta / theta_a0
double dirichlet_lower(const DirichletEnvelope& env, double t, const Point& x, const Point& y);
double dirichlet_upper(const DirichletEnvelope& env, double t, const Point& x, const Point& y);

// small time: c^{-+1} (1 ^ V(delta)/sqrt t); all_t on bounded domains adds the exponential factors
Bracket survival_envelope(const DirichletEnvelope& env, double t, const Point& x, bool all_t = false);

Bracket dirichlet_large_time(const DirichletEnvelope& env, double t, const Point& x, const Point& y);

// c p(t/2, |x-y|/2) exp(-b t h(r2) / 2)
double large1_upper(const DirichletEnvelope& env, double t, const Point& x, const Point& y);

struct GreenEnvelope {
    const LevyModel* model = nullptr;
    const ScaleKit* kit = nullptr;
    Domain domain;
    double c_lower = 1.0, c_upper = 1.0;
};

GreenEnvelope make_green_envelope(const LevyModel& m, const ScaleKit& kit, const Domain& dom);

// (1 ^ L(r)/sqrt(L(dx) L(dy))) l(1/r) / (r^d L(r)^2)
double green_shape(const GreenEnvelope& env, const Point& x, const Point& y);
Bracket green_envelope(const GreenEnvelope& env, const Point& x, const Point& y);
// the two boundary forms, through the renewal proxy
double green1_product(const ScaleKit& kit, double dx, double dy, double r);
double green1_min(const ScaleKit& kit, double dx, double dy, double r);
// nu(r) / L(r)^2
double intgreen_shape(const LevyModel& m, const ScaleKit& kit, double r);

// log-type closed forms, frak L(r) = log(e + r)
double frak_L(double r);
// L and h shape: frak L(1/r)^{p+1}, or frak L(frak L(1/r)) for p = -1
double logp_L_shape(double p, double r);
// 1 ^ frak L(1/delta)^{-(p+1)/2} / sqrt t   (p = -1: [frak L o frak L(1/delta)]^{-1})
double logp_boundary_factor(double p, double t, double delta);
// large time boundary factor without the t normalisation
double logp_large_boundary_factor(double p, double delta);

bool f1_first_branch(double p, double t, double r, double a2);
double f1_logp(double p, double t, double r, double a1, double a2, double a3, int d = 1);
double log_f1_logp(double p, double t, double r, double a1, double a2, double a3, int d = 1);
// -1 < p <= 0: t r^{-d + c t frak L(1/r)^p} frak L(1/r)^p
double logp_case2(double p, double t, double r, double c, int d = 1);
// p = -1: t r^{-d} frak L(1/r)^{-1-c t}
double logp_case3(double t, double r, double c, int d = 1);

}  // namespace levyhk
