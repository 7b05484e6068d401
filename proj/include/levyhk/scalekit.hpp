#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "levyhk/quadrature.hpp"

namespace levyhk {

// the function l of condition (A) plus what we know about it
struct WeightFunction {
    std::function<double(double)> eval;
    double beta_small = 1.0;  // l(s) ~ s^beta near 0
    double alpha1 = 0.0;      // large-argument scaling indices
    double alpha2 = 0.0;
    bool smooth = true;
    std::vector<double> knots;  // points where l is only continuous

    double operator()(double s) const { return eval(s); }
};

// throws ModelError when the structural requirements are violated
void validate_weight(const WeightFunction& w, bool require_alpha2_below_one = true);

class RunningSup;

class ScaleKit {
public:
    explicit ScaleKit(WeightFunction w, quad::Tolerance tol = {1e-14, 1e-12});

    const WeightFunction& weight() const { return w_; }

    double K(double r) const;
    double L(double r) const;
    double h(double r) const;
    double Phi(double u) const;
    double hat_Phi(double u) const;
    double ell_hat(double r) const;
    double ell_star(double r) const;
    // +infinity when l* never exceeds t
    double ell_inverse(double t) const;
    double theta(double a, double r, double t) const;
    double V(double r) const;  // h^{-1/2}

    std::string calibration_csv(const std::vector<double>& rs) const;

private:
    double phi_below_one() const;  // \int_0^1 s^{-1} l(s) ds

    WeightFunction w_;
    quad::Tolerance tol_;
    double phi1_ = 0.0;
    std::shared_ptr<RunningSup> sup_;
    std::shared_ptr<RunningSup> hat_sup_;
};

enum class ScalingKind { WLSinf, WUSinf, WLS0, WUS0, AlmostIncreasing, AlmostDecreasing };

std::string to_string(ScalingKind k);

struct ScalingCheckResult {
    ScalingKind kind = ScalingKind::WLSinf;
    double exponent = 0.0;
    double threshold = 1.0;
    double constant = 1.0;
    double violation = 0.0;
    bool pass = false;
};

struct ScalingGrid {
    int per_decade = 16;
    int decades = 6;
};

std::vector<double> scaling_points(ScalingKind kind, double threshold, ScalingGrid grid);

ScalingCheckResult check_scaling(const std::function<double(double)>& f, ScalingKind kind, double exponent,
                                 double threshold, ScalingGrid grid = {}, double slack = 0.01);

// direction: AlmostIncreasing or AlmostDecreasing; compares f(x) with sup/inf of f over [c0, x]
ScalingCheckResult check_almost_monotone(const std::function<double(double)>& f, ScalingKind direction,
                                         double c0, ScalingGrid grid = {}, double slack = 0.01);

// log-spaced points, inclusive
std::vector<double> logspace(double a, double b, int n);

}  // namespace levyhk
