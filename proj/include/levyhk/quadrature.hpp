#pragma once

#include <functional>
#include <vector>

namespace levyhk::quad {

using Fn = std::function<double(double)>;

struct Tolerance {
    double abs = 1e-14;
    double rel = 1e-12;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
};

// adaptive Gauss-Kronrod (21 point) on a finite interval
Result integrate(const Fn& f, double a, double b, Tolerance tol = {}, unsigned max_depth = 25);

// same, but splits [a,b] at the given interior points first
Result integrate_split(const Fn& f, double a, double b, const std::vector<double>& cuts, Tolerance tol = {});

// one fixed GK21 panel, no subdivision
Result panel(const Fn& f, double a, double b);

// Euler / van Wijngaarden: average the last m+1 partial sums m times
double euler_average(const std::vector<double>& partial_sums, int m);

enum class Kernel { Cos, Sin, BesselJ0 };

double kernel_value(Kernel k, double x);
// n-th positive zero (n >= 1)
double kernel_zero(Kernel k, int n);

struct OscillatoryOptions {
    int max_panels = 10000;
    double rel_tol = 1e-11;
    double abs_tol = 1e-300;
    int min_panels = 6;
    // stop summing once this says the amplitude is negligible at u
    std::function<bool(double)> negligible;
};

struct OscillatoryResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

// \int_{z_m/omega}^\infty kernel(omega u) f(u) du with z_m the m-th kernel zero.
// Panels between consecutive zeros, partial sums accelerated by repeated averaging.
// Throws NumericError (with the partial sum) past the panel budget.
OscillatoryResult oscillatory_tail(const Fn& f, Kernel k, double omega, int first_zero,
                                   const OscillatoryOptions& opt = {});

}  // namespace levyhk::quad
