#pragma once

#include <string>
#include <vector>

#include "levyhk/models.hpp"
#include "levyhk/scalekit.hpp"

namespace levyhk {

struct FreeKernelValue {
    double t = 0.0;
    double r = 0.0;
    double density = 0.0;  // +inf when divergent
    bool divergent = false;
    double quad_err = 0.0;
};

enum class Regime { S1, S2 };

Regime regime_of(const LevyModel& m);

struct EnvelopeParams {
    double c = 1.0;       // multiplicative constant
    double b = 1.0;       // exponential rate
    double a = 1.0;       // theta cutoff parameter
    double offset = 0.0;  // additive constant (large-time on-diagonal bound)
    std::string variant;
};

FreeKernelValue free_density(const LevyModel& m, double t, double r);

// c t nu(r) exp(-b t h(r))
double envelope_free_lower(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t, double r);
// S1: c t r^{-d} K(r) exp(-b t h(r)); S2: same with r -> theta_a(r, t)
double envelope_free_upper(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t, double r,
                           Regime regime);
// c [l^{-1}(a/t)]^d exp(-b t h(1/l^{-1}(a/t)))
double ondiag_upper_S2(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t);
// offset + c nu(r) exp(-b t h(r))
double ondiag_upper_L1_largetime(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t,
                                 double r);

// \int p(t, x) dx; d = 1 splits off the core mass via its Fourier form
double total_mass(const LevyModel& m, double t);

// max over sample points x of |p(t1+t2, x) - (p(t1) * p(t2))(x)|, d = 1
double chapman_kolmogorov_check(const LevyModel& m, double t1, double t2, const std::vector<double>& xs);

// log p tabulated on a (log s, log r) grid, bilinear lookup; exact evaluation off-table
class KernelTable {
public:
    KernelTable(const LevyModel& m, double s_min, double s_max, double r_min, double r_max, int per_decade = 24);
    double operator()(double s, double r) const;
    double r_min() const { return r_min_; }

private:
    LevyModel model_;
    double ls0_, ls1_, lr0_, lr1_, hs_, hr_;
    int ns_, nr_;
    double r_min_;
    std::vector<double> logp_;
};

}  // namespace levyhk
