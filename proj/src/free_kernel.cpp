#include "levyhk/free_kernel.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "levyhk/errors.hpp"
#include "levyhk/quadrature.hpp"

namespace levyhk {

namespace {

constexpr double kCut = 40.0;  // drop the integrand once t psi(u) > 40

double kernel_factor(int d, double r, double u) {
    switch (d) {
        case 1: return std::cos(r * u);
        case 2: return boost::math::cyl_bessel_j(0, r * u) * u;
        default: return std::sin(r * u) * u;
    }
}

double prefactor(int d, double r) {
    switch (d) {
        case 1: return 1.0 / M_PI;
        case 2: return 1.0 / (2.0 * M_PI);
        default: return r > 0.0 ? 1.0 / (2.0 * M_PI * M_PI * r) : 1.0 / (2.0 * M_PI * M_PI);
    }
}

// smallest u with t psi(u) >= kCut, +inf when psi saturates first
double cutoff_u(const LevyModel& m, double t) {
    if (t * m.psi(1e300) < kCut) return std::numeric_limits<double>::infinity();
    double lo = std::log(1e-30), hi = std::log(1e300);
    if (t * m.psi(std::exp(lo)) >= kCut) return std::exp(lo);
    for (int k = 0; k < 200 && hi - lo > 1e-10; ++k) {
        double mid = 0.5 * (lo + hi);
        if (t * m.psi(std::exp(mid)) >= kCut) hi = mid;
        else lo = mid;
    }
    return std::exp(hi);
}

// \int_0^inf u^{d-1} e^{-t psi(u)} du on a log scale; heavy tails closed off by their log-linear rate
double ondiag_integral(const LevyModel& m, double t, double& err) {
    int d = m.d;
    auto G = [&](double v) { return std::exp(d * v - t * m.psi(std::exp(v))); };
    double total = 0.0, prev_slope = 0.0;
    err = 0.0;
    for (double v = -40.0; v < 690.0; v += 1.0) {
        auto r = quad::integrate(G, v, v + 1.0, {1e-300, 1e-13});
        total += r.value;
        err += r.error;
        double g1 = G(v + 1.0);
        if (g1 < 1e-18 * total) return total;
        double slope = std::log(g1 / G(v + 0.5)) * 2.0;
        if (v > 30.0 && slope < 0.0 && std::abs(slope - prev_slope) < 1e-4 * std::abs(slope)) {
            total += g1 / (-slope);
            err += 1e-4 * g1 / (-slope);
            return total;
        }
        prev_slope = slope;
    }
    throw NumericError("on-diagonal integral does not decay", total);
}

}  // namespace

Regime regime_of(const LevyModel& m) { return m.flags.S2 ? Regime::S2 : Regime::S1; }

FreeKernelValue free_density(const LevyModel& m, double t, double r) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("free_density: t must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("free_density: r must be nonnegative");
    FreeKernelValue out;
    out.t = t;
    out.r = r;
    int d = m.d;
    if (r == 0.0) {
        if (ondiag_divergent(m, t)) {
            out.density = std::numeric_limits<double>::infinity();
            out.divergent = true;
            return out;
        }
        double err = 0.0;
        out.density = prefactor(d, 0.0) * ondiag_integral(m, t, err);
        out.quad_err = prefactor(d, 0.0) * err;
        return out;
    }
    auto f = [&](double u) { return std::exp(-t * m.psi(u)); };
    quad::Kernel kern = d == 1 ? quad::Kernel::Cos : d == 2 ? quad::Kernel::BesselJ0 : quad::Kernel::Sin;
    double u1 = quad::kernel_zero(kern, 1) / r;
    double ucut = cutoff_u(m, t);
    double uhead = std::min(u1, ucut);
    // head [0, uhead] on a log scale
    auto gh = [&](double v) {
        double u = std::exp(v);
        return kernel_factor(d, r, u) * f(u) * u;
    };
    double vhi = std::log(uhead), vlo = std::min(vhi, 0.0) - 40.0;
    std::vector<double> cuts;
    for (double c = vhi - 2.0; c > vlo; c -= 2.0) cuts.push_back(c);
    auto head = quad::integrate_split(gh, vlo, vhi, cuts, {1e-300, 1e-11});
    double value = head.value, err = head.error;
    if (uhead < u1) {
        out.density = prefactor(d, r) * value;
        out.quad_err = prefactor(d, r) * err;
        return out;
    }
    auto gt = [&](double u) {
        double w = d == 1 ? 1.0 : u;
        return w * f(u);
    };
    quad::OscillatoryOptions opt;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-15 * (std::abs(head.value) + gt(u1) / r);
    opt.negligible = [&](double u) { return t * m.psi(u) > kCut; };
    try {
        auto tail = quad::oscillatory_tail(gt, kern, r, 1, opt);
        value += tail.value;
        err += tail.error;
    } catch (const NumericError& e) {
        throw NumericError("free_density: oscillatory tail did not converge", prefactor(d, r) * (value + e.partial));
    }
    out.density = prefactor(d, r) * value;
    out.quad_err = prefactor(d, r) * err;
    return out;
}

double envelope_free_lower(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t, double r) {
    if (!(r > 0.0)) throw DomainError("free lower envelope is undefined at the origin");
    return p.c * t * m.nu(r) * std::exp(-p.b * t * kit.h(r));
}

double envelope_free_upper(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t, double r,
                           Regime regime) {
    if (regime != regime_of(m)) throw UsageError("free upper envelope: regime does not match model flags");
    double rho = r;
    if (regime == Regime::S2) rho = kit.theta(p.a, r, t);
    else if (!(r > 0.0)) throw DomainError("S1 upper envelope needs r > 0");
    if (!(rho > 0.0)) throw DomainError("upper envelope radius collapsed to zero");
    return p.c * t * std::pow(rho, -m.d) * kit.K(rho) * std::exp(-p.b * t * kit.h(rho));
}

double ondiag_upper_S2(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t) {
    if (!m.flags.S2) throw UsageError("on-diagonal S2 bound requested for a model without S-2");
    if (!(t > 0.0)) throw DomainError("t must be positive");
    double inv = kit.ell_inverse(p.a / t);
    if (std::isinf(inv)) throw NumericError("l^{-1} returned the infinity sentinel under S-2");
    return p.c * std::pow(inv, m.d) * std::exp(-p.b * t * kit.h(1.0 / inv));
}

double ondiag_upper_L1_largetime(const LevyModel& m, const ScaleKit& kit, const EnvelopeParams& p, double t,
                                 double r) {
    if (!(m.flags.L1 && m.flags.D)) throw UsageError("large-time on-diagonal bound needs L-1 and D");
    if (!(r > 0.0)) throw DomainError("r must be positive");
    return p.offset + p.c * m.nu(r) * std::exp(-p.b * t * kit.h(r));
}

double total_mass(const LevyModel& m, double t) {
    const double X = 1e6;
    auto p = [&](double r) { return free_density(m, t, r).density; };
    // tail beyond X: p ~ t nu there
    auto nu_tail_f = [&](double v) {
        double r = std::exp(v);
        return m.nu(r) * std::pow(r, m.d);
    };
    double tail = quad::integrate(nu_tail_f, std::log(X), std::log(X) + 60.0, {1e-300, 1e-8}).value;
    if (m.d == 1) {
        const double eps = 1e-3;
        // mass of (-eps, eps) = (2/pi) \int sin(eps u) e^{-t psi(u)} / u du; p may be unbounded there
        auto f = [&](double u) { return std::exp(-t * m.psi(u)) / u; };
        auto head_f = [&](double v) {
            double u = std::exp(v);
            return std::sin(eps * u) * f(u) * u;
        };
        double vhi = std::log(M_PI / eps);
        std::vector<double> cuts;
        for (double c = vhi - 2.0; c > -40.0; c -= 2.0) cuts.push_back(c);
        double core = quad::integrate_split(head_f, -40.0, vhi, cuts, {1e-300, 1e-12}).value;
        quad::OscillatoryOptions opt;
        opt.rel_tol = 1e-11;
        opt.negligible = [&](double u) { return t * m.psi(u) > kCut; };
        core += quad::oscillatory_tail(f, quad::Kernel::Sin, eps, 1, opt).value;
        core *= 2.0 / M_PI;
        // the rest from the density itself
        auto bulk_f = [&](double v) {
            double r = std::exp(v);
            return p(r) * r;
        };
        // fixed panels: p is smooth in log r and each evaluation is an oscillatory integral
        double bulk = 0.0;
        const double w = 0.5;
        for (double v = std::log(eps); v < std::log(X) - 1e-12; v += w)
            bulk += quad::panel(bulk_f, v, std::min(v + w, std::log(X))).value;
        return core + 2.0 * bulk + 2.0 * t * tail;
    }
    double area = m.d == 2 ? 2.0 * M_PI : 4.0 * M_PI;
    auto bulk_f = [&](double v) {
        double r = std::exp(v);
        return p(r) * std::pow(r, m.d);
    };
    std::vector<double> bc;
    for (double c = -20.0; c < std::log(X); c += 1.0) bc.push_back(c);
    double bulk = quad::integrate_split(bulk_f, -21.0, std::log(X), bc, {1e-300, 1e-9}).value;
    return area * (bulk + t * tail);
}

namespace {

// log p(t, r) as a spline in log r with power-law extrapolation
class RadialInterp {
public:
    RadialInterp(const LevyModel& m, double t) {
        const int per_decade = 24;
        x0_ = std::log(1e-10);
        x1_ = std::log(1e6);
        int n = 16 * per_decade + 1;
        h_ = (x1_ - x0_) / (n - 1);
        y_.resize(n);
        for (int i = 0; i < n; ++i) y_[i] = std::log(free_density(m, t, std::exp(x0_ + i * h_)).density);
        slo_ = (y_[1] - y_[0]) / h_;
        shi_ = (y_[n - 1] - y_[n - 2]) / h_;
        sp_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(y_.begin(), y_.end(),
                                                                                            x0_, h_);
    }
    double operator()(double r) const {
        double x = std::log(std::abs(r));
        if (x < x0_) return std::exp(y_.front() + slo_ * (x - x0_));
        if (x > x1_) return std::exp(y_.back() + shi_ * (x - x1_));
        return std::exp((*sp_)(x));
    }

private:
    double x0_, x1_, h_, slo_, shi_;
    std::vector<double> y_;
    std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> sp_;
};

}  // namespace

double chapman_kolmogorov_check(const LevyModel& m, double t1, double t2, const std::vector<double>& xs) {
    if (m.d != 1) throw UsageError("Chapman-Kolmogorov check is implemented on the line only");
    if (xs.empty()) throw UsageError("Chapman-Kolmogorov check needs sample points");
    RadialInterp p1(m, t1), p2(m, t2);
    double worst = 0.0;
    const double lz = std::log(1e10), lo = -50.0;
    for (double x0 : xs) {
        double x = std::abs(x0);
        auto exact = free_density(m, t1 + t2, x);
        if (exact.divergent) throw NumericError("Chapman-Kolmogorov sample point sits on a divergent diagonal");
        auto piece = [&](auto&& g, double hi) {
            std::vector<double> cuts;
            for (double c = hi - 1.0; c > lo; c -= 2.0) cuts.push_back(c);
            return quad::integrate_split(g, lo, hi, cuts, {1e-300, 1e-10}).value;
        };
        double conv = 0.0;
        if (x == 0.0) {
            auto g = [&](double v) {
                double z = std::exp(v);
                return p1(z) * p2(z) * z;
            };
            conv = 2.0 * piece(g, lz);
        } else {
            double lh = std::log(x / 2.0);
            conv += piece([&](double v) { double z = std::exp(v); return p1(z) * p2(x + z) * z; }, lz);
            conv += piece([&](double v) { double z = std::exp(v); return p1(z) * p2(x - z) * z; }, lh);
            conv += piece([&](double v) { double z = std::exp(v); return p1(x - z) * p2(z) * z; }, lh);
            conv += piece([&](double v) { double z = std::exp(v); return p1(x + z) * p2(z) * z; }, lz);
        }
        worst = std::max(worst, std::abs(exact.density - conv));
    }
    return worst;
}

KernelTable::KernelTable(const LevyModel& m, double s_min, double s_max, double r_min, double r_max, int per_decade)
    : model_(m), r_min_(r_min) {
    if (!(s_min > 0.0 && s_max > s_min && r_min > 0.0 && r_max > r_min)) throw UsageError("kernel table: bad ranges");
    double l10 = std::log(10.0);
    ls0_ = std::log(s_min);
    ls1_ = std::log(s_max);
    lr0_ = std::log(r_min);
    lr1_ = std::log(r_max);
    ns_ = std::max(2, static_cast<int>(std::ceil((ls1_ - ls0_) / l10 * per_decade)) + 1);
    nr_ = std::max(2, static_cast<int>(std::ceil((lr1_ - lr0_) / l10 * per_decade)) + 1);
    hs_ = (ls1_ - ls0_) / (ns_ - 1);
    hr_ = (lr1_ - lr0_) / (nr_ - 1);
    logp_.resize(static_cast<size_t>(ns_) * nr_);
    for (int i = 0; i < ns_; ++i) {
        double s = std::exp(ls0_ + i * hs_);
        for (int j = 0; j < nr_; ++j) {
            double r = std::exp(lr0_ + j * hr_);
            double v = free_density(m, s, r).density;
            logp_[static_cast<size_t>(i) * nr_ + j] = std::log(std::max(v, 1e-300));
        }
    }
}

double KernelTable::operator()(double s, double r) const {
    double ls = std::log(s), lr = std::log(r);
    if (ls < ls0_ || ls > ls1_ || lr < lr0_ || lr > lr1_) return free_density(model_, s, r).density;
    double fi = (ls - ls0_) / hs_, fj = (lr - lr0_) / hr_;
    int i = std::min(static_cast<int>(fi), ns_ - 2), j = std::min(static_cast<int>(fj), nr_ - 2);
    double a = fi - i, b = fj - j;
    auto at = [this](int ii, int jj) { return logp_[static_cast<size_t>(ii) * nr_ + jj]; };
    double v = (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
               a * b * at(i + 1, j + 1);
    return std::exp(v);
}

}  // namespace levyhk
