#include "levyhk/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "levyhk/errors.hpp"

namespace levyhk::quad {

namespace bq = boost::math::quadrature;

namespace {

struct BudgetExceeded {};

// boost recursion with an evaluation cap; noise-level targets otherwise refine everywhere
double gk_capped(const Fn& f, double a, double b, unsigned depth, double rel, double* err, double* l1, long cap) {
    long n = 0;
    auto g = [&](double x) {
        if (++n > cap) throw BudgetExceeded{};
        return f(x);
    };
    try {
        return bq::gauss_kronrod<double, 21>::integrate(g, a, b, depth, rel, err, l1);
    } catch (const BudgetExceeded&) {
        return bq::gauss_kronrod<double, 21>::integrate(f, a, b, 8, rel, err, l1);
    }
}

}  // namespace

Result integrate(const Fn& f, double a, double b, Tolerance tol, unsigned max_depth) {
    if (a == b) return {};
    double err = 0.0, l1 = 0.0;
    const long cap = 400000;
    double v = gk_capped(f, a, b, max_depth, tol.rel, &err, &l1, cap);
    // boost stops on relative-to-L1; an absolute floor only matters for tiny integrals
    if (err > tol.abs && err > tol.rel * std::abs(v) && max_depth > 0) {
        // try harder once; integrands here are smooth between knots
        v = gk_capped(f, a, b, max_depth + 5, tol.rel, &err, &l1, cap);
    }
    return {v, err};
}

Result integrate_split(const Fn& f, double a, double b, const std::vector<double>& cuts, Tolerance tol) {
    std::vector<double> pts{a};
    for (double c : cuts)
        if (c > std::min(a, b) && c < std::max(a, b)) pts.push_back(c);
    pts.push_back(b);
    if (a < b) std::sort(pts.begin(), pts.end());
    else std::sort(pts.begin(), pts.end(), std::greater<>());
    // merge cuts that nearly coincide; slivers only feed rounding noise to the adaptive rule
    {
        double tiny = 1e-9 * std::abs(b - a);
        std::vector<double> keep{pts.front()};
        for (size_t i = 1; i + 1 < pts.size(); ++i)
            if (std::abs(pts[i] - keep.back()) > tiny && std::abs(pts.back() - pts[i]) > tiny) keep.push_back(pts[i]);
        keep.push_back(pts.back());
        pts.swap(keep);
    }
    // crude pass first so every piece is held to a tolerance relative to the whole
    size_t np = pts.size() - 1;
    std::vector<double> l1(np);
    double total = 0.0;
    for (size_t i = 0; i < np; ++i) {
        double e = 0.0;
        bq::gauss_kronrod<double, 21>::integrate(f, pts[i], pts[i + 1], 0, 0.0, &e, &l1[i]);
        total += l1[i];
    }
    double floor_abs = std::max(tol.abs, tol.rel * total);
    Result out;
    for (size_t i = 0; i < np; ++i) {
        if (l1[i] < 1e-3 * floor_abs) {
            auto r = panel(f, pts[i], pts[i + 1]);
            out.value += r.value;
            out.error += r.error;
            continue;
        }
        Tolerance t = tol;
        t.rel = std::min(1e-2, std::max(tol.rel, tol.rel * total / l1[i]));
        auto r = integrate(f, pts[i], pts[i + 1], t);
        out.value += r.value;
        out.error += r.error;
    }
    return out;
}

Result panel(const Fn& f, double a, double b) {
    double err = 0.0;
    double v = bq::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err);
    return {v, err};
}

double euler_average(const std::vector<double>& s, int m) {
    int n = static_cast<int>(s.size());
    m = std::min(m, n - 1);
    if (m <= 0) return s.back();
    std::vector<double> w(s.end() - (m + 1), s.end());
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m - k; ++i) w[i] = 0.5 * (w[i] + w[i + 1]);
    return w[0];
}

double kernel_value(Kernel k, double x) {
    switch (k) {
        case Kernel::Cos: return std::cos(x);
        case Kernel::Sin: return std::sin(x);
        case Kernel::BesselJ0: return boost::math::cyl_bessel_j(0, x);
    }
    return 0.0;
}

namespace {
// J0 zeros are used a lot (d = 2 inversion); cache a prefix
std::vector<double> g_j0_zeros;
std::mutex g_j0_mu;

double j0_zero(int n) {
    std::lock_guard<std::mutex> lk(g_j0_mu);
    if (g_j0_zeros.size() < static_cast<size_t>(n)) {
        size_t want = std::max<size_t>(n, 2 * g_j0_zeros.size() + 64);
        size_t have = g_j0_zeros.size();
        g_j0_zeros.resize(want);
        boost::math::cyl_bessel_j_zero(0.0, static_cast<int>(have) + 1, static_cast<unsigned>(want - have),
                                       g_j0_zeros.begin() + have);
    }
    return g_j0_zeros[n - 1];
}
}  // namespace

double kernel_zero(Kernel k, int n) {
    switch (k) {
        case Kernel::Cos: return (n - 0.5) * M_PI;
        case Kernel::Sin: return n * M_PI;
        case Kernel::BesselJ0: return j0_zero(n);
    }
    return 0.0;
}

OscillatoryResult oscillatory_tail(const Fn& f, Kernel k, double omega, int first_zero,
                                   const OscillatoryOptions& opt) {
    auto g = [&](double u) { return kernel_value(k, omega * u) * f(u); };
    std::vector<double> sums;
    sums.reserve(256);
    double acc = 0.0, prev_est = 0.0, err_acc = 0.0;
    int stable = 0;
    double lo = kernel_zero(k, first_zero) / omega;
    for (int n = 0; n < opt.max_panels; ++n) {
        double hi = kernel_zero(k, first_zero + n + 1) / omega;
        auto r = panel(g, lo, hi);
        acc += r.value;
        err_acc += r.error;
        sums.push_back(acc);
        if (opt.negligible && opt.negligible(lo)) {
            return {acc, err_acc + std::abs(r.value), n + 1};
        }
        lo = hi;
        if (n + 1 < opt.min_panels) continue;
        int m = std::min<int>(static_cast<int>(sums.size()) - 1, 24);
        double est = euler_average(sums, m);
        double diff = std::abs(est - prev_est);
        if (diff <= std::max(opt.abs_tol, opt.rel_tol * std::abs(est))) {
            if (++stable >= 2) return {est, diff + err_acc, n + 1};
        } else {
            stable = 0;
        }
        prev_est = est;
    }
    throw NumericError("oscillatory series did not converge within panel budget", prev_est);
}

}  // namespace levyhk::quad
