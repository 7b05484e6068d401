#include "levyhk/scalekit.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>

#include "levyhk/errors.hpp"

namespace levyhk {

namespace {

void require_positive(double r, const char* what) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError(std::string(what) + ": argument must be positive and finite");
}

}  // namespace

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
    out.front() = a;
    out.back() = b;
    return out;
}

void validate_weight(const WeightFunction& w, bool require_alpha2_below_one) {
    if (!w.eval) throw ModelError("weight function has no evaluator");
    if (!(w.beta_small > 0.0)) throw ModelError("weight small-argument exponent must be positive");
    if (w.alpha1 > w.alpha2) throw ModelError("weight indices need alpha1 <= alpha2");
    if (require_alpha2_below_one && !(w.alpha2 < 1.0)) throw ModelError("weight needs alpha2 < 1");
    for (double s : {1e-8, 1e-3, 0.5, 1.0, 2.0, 1e3, 1e8}) {
        double v = w.eval(s);
        if (!(v > 0.0) || !std::isfinite(v)) throw ModelError("weight must be positive and finite");
    }
    // dyadic pieces of \int_0^1 s^{-1} l(s) ds should shrink geometrically
    double prev = 0.0;
    for (int k = 1; k <= 40; ++k) {
        double a = std::ldexp(1.0, -k), b = 2 * a;
        auto piece = quad::integrate([&](double v) { return w.eval(std::exp(v)); }, std::log(a), std::log(b)).value;
        if (k > 20 && piece > 0.9 * prev) throw ModelError("weight is not integrable against ds/s at 0");
        prev = piece;
    }
}

// sup of f over [1, r] on a cached log grid, with local refinement at grid maxima
class RunningSup {
public:
    RunningSup(std::function<double(double)> f, int per_decade = 64, int decades = 300)
        : f_(std::move(f)), per_decade_(per_decade), decades_(decades) {}

    double sup(double r) const {
        build();
        double lr = std::log10(r);
        if (lr >= decades_) return std::max(prefix_.back(), f_(r));
        size_t i = static_cast<size_t>(std::floor(lr * per_decade_));
        if (i + 1 < x_.size() && x_[i + 1] <= r) ++i;
        while (i > 0 && x_[i] > r) --i;
        double v = std::max(prefix_[i], f_(r));
        if (i < peak_loc_.size() && peak_loc_[i] <= r) v = std::max(v, peak_val_[i]);
        return v;
    }

    double inverse(double t) const {
        build();
        if (f_(1.0) > t) return 1.0;
        auto it = std::upper_bound(prefix_.begin(), prefix_.end(), t);
        if (it == prefix_.end()) return std::numeric_limits<double>::infinity();
        size_t i = static_cast<size_t>(it - prefix_.begin());
        double lo = i == 0 ? 1.0 : x_[i - 1], hi = x_[i];
        for (int k = 0; k < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++k) {
            double mid = 0.5 * (lo + hi);
            if (sup(mid) > t) hi = mid;
            else lo = mid;
        }
        return hi;
    }

private:
    void build() const {
        std::call_once(once_, [this] {
            size_t n = static_cast<size_t>(per_decade_) * decades_ + 1;
            x_.resize(n);
            fx_.resize(n);
            for (size_t i = 0; i < n; ++i) {
                x_[i] = std::pow(10.0, static_cast<double>(i) / per_decade_);
                fx_[i] = f_(x_[i]);
            }
            peak_loc_.assign(n, std::numeric_limits<double>::infinity());
            peak_val_.assign(n, -std::numeric_limits<double>::infinity());
            for (size_t i = 1; i + 1 < n; ++i) {
                bool local = fx_[i] >= fx_[i - 1] && fx_[i] >= fx_[i + 1];
                bool flat = fx_[i] == fx_[i - 1] && fx_[i] == fx_[i + 1];
                if (!local || flat) continue;
                auto neg = [this](double lx) { return -f_(std::exp(lx)); };
                auto [lx, nv] = boost::math::tools::brent_find_minima(neg, std::log(x_[i - 1]), std::log(x_[i + 1]), 40);
                double loc = std::exp(lx), val = -nv;
                if (val <= fx_[i]) continue;
                size_t cell = loc < x_[i] ? i - 1 : i;
                if (val > peak_val_[cell]) {
                    peak_val_[cell] = val;
                    peak_loc_[cell] = loc;
                }
            }
            prefix_.resize(n);
            prefix_[0] = fx_[0];
            for (size_t i = 1; i < n; ++i) prefix_[i] = std::max({prefix_[i - 1], fx_[i], peak_val_[i - 1]});
        });
    }

    std::function<double(double)> f_;
    int per_decade_, decades_;
    mutable std::once_flag once_;
    mutable std::vector<double> x_, fx_, prefix_, peak_loc_, peak_val_;
};

ScaleKit::ScaleKit(WeightFunction w, quad::Tolerance tol) : w_(std::move(w)), tol_(tol) {
    if (!w_.eval) throw ModelError("weight function has no evaluator");
    phi1_ = phi_below_one();
    auto f = w_.eval;
    sup_ = std::make_shared<RunningSup>(f);
    hat_sup_ = std::make_shared<RunningSup>([f](double s) { return 1.0 / f(s); });
}

double ScaleKit::phi_below_one() const {
    // \int_{-inf}^0 l(e^w) dw, truncated where l(e^w) ~ e^{beta w} is negligible
    double W = std::min(60.0 / w_.beta_small, 1400.0);
    std::vector<double> cuts;
    for (double k : w_.knots)
        if (k < 1.0) cuts.push_back(std::log(k));
    auto g = [this](double v) { return w_.eval(std::exp(v)); };
    double v = quad::integrate_split(g, -W, 0.0, cuts, tol_).value;
    return v + w_.eval(std::exp(-W)) / w_.beta_small;
}

double ScaleKit::Phi(double u) const {
    if (!(u >= 0.0) || !std::isfinite(u)) throw DomainError("Phi: argument must be nonnegative and finite");
    if (u == 0.0) return 0.0;
    auto g = [this](double v) { return w_.eval(std::exp(v)); };
    double lu = std::log(u);
    std::vector<double> cuts;
    for (double k : w_.knots) cuts.push_back(std::log(k));
    if (u > 1.0) {
        // a few more cuts help the long log range for slowly varying l
        for (double c = 1.0; c < lu; c *= 4.0) cuts.push_back(c);
        return phi1_ + quad::integrate_split(g, 0.0, lu, cuts, tol_).value;
    }
    double W = std::min(60.0 / w_.beta_small, 1400.0);
    double v = quad::integrate_split(g, lu - W, lu, cuts, tol_).value;
    return v + w_.eval(std::exp(lu - W)) / w_.beta_small;
}

double ScaleKit::L(double r) const {
    require_positive(r, "L");
    return Phi(1.0 / r);
}

double ScaleKit::K(double r) const {
    require_positive(r, "K");
    // K(r) = \int_0^inf e^{-2v} l(e^v / r) dv
    double grow = std::max({w_.alpha2, std::min(w_.beta_small, 1.9), 0.0});
    double V = std::min(45.0 / (2.0 - grow), 700.0);
    std::vector<double> cuts;
    for (double k : w_.knots) {
        double c = std::log(k * r);
        if (c > 0.0) cuts.push_back(c);
    }
    for (double c = 1.0; c < V; c *= 3.0) cuts.push_back(c);
    auto g = [this, r](double v) { return std::exp(-2.0 * v) * w_.eval(std::exp(v) / r); };
    return quad::integrate_split(g, 0.0, V, cuts, tol_).value;
}

double ScaleKit::h(double r) const { return K(r) + L(r); }

double ScaleKit::V(double r) const { return 1.0 / std::sqrt(h(r)); }

double ScaleKit::ell_star(double r) const {
    if (!(r >= 1.0)) throw DomainError("ell_star: argument must be >= 1");
    return sup_->sup(r);
}

double ScaleKit::ell_inverse(double t) const {
    if (!(t > 0.0)) throw DomainError("ell_inverse: argument must be positive");
    return sup_->inverse(t);
}

double ScaleKit::theta(double a, double r, double t) const {
    if (!(a > 0.0) || !(t > 0.0) || !(r >= 0.0)) throw DomainError("theta: need a, t > 0 and r >= 0");
    double inv = ell_inverse(a / t);
    double cutoff = std::isinf(inv) ? 0.0 : 1.0 / inv;
    return std::max(r, cutoff);
}

double ScaleKit::ell_hat(double r) const {
    if (!(r >= 1.0)) throw DomainError("ell_hat: argument must be >= 1");
    return hat_sup_->sup(r);
}

double ScaleKit::hat_Phi(double u) const {
    if (!(u >= 1.0)) throw DomainError("hat_Phi: argument must be >= 1");
    if (u == 1.0) return 0.0;
    double lu = std::log(u);
    std::vector<double> cuts;
    for (double c = 1.0; c < lu; c *= 4.0) cuts.push_back(c);
    auto g = [this](double v) { return 1.0 / ell_hat(std::exp(v)); };
    return quad::integrate_split(g, 0.0, lu, cuts, {1e-12, 1e-10}).value;
}

std::string ScaleKit::calibration_csv(const std::vector<double>& rs) const {
    std::ostringstream os;
    os << "r,K,L,h,phi,v_proxy\n" << std::setprecision(12);
    for (double r : rs) {
        double k = K(r), l = L(r);
        os << r << ',' << k << ',' << l << ',' << k + l << ',' << Phi(r) << ',' << 1.0 / std::sqrt(k + l) << '\n';
    }
    return os.str();
}

std::string to_string(ScalingKind k) {
    switch (k) {
        case ScalingKind::WLSinf: return "WLSinf";
        case ScalingKind::WUSinf: return "WUSinf";
        case ScalingKind::WLS0: return "WLS0";
        case ScalingKind::WUS0: return "WUS0";
        case ScalingKind::AlmostIncreasing: return "almost-increasing";
        case ScalingKind::AlmostDecreasing: return "almost-decreasing";
    }
    return "?";
}

std::vector<double> scaling_points(ScalingKind kind, double threshold, ScalingGrid grid) {
    int n = grid.per_decade * grid.decades + 1;
    bool at_zero = kind == ScalingKind::WLS0 || kind == ScalingKind::WUS0;
    std::vector<double> pts;
    if (at_zero) {
        // (0, threshold], ordered from the threshold downward
        for (int i = 0; i < n; ++i) pts.push_back(threshold * std::pow(10.0, -static_cast<double>(i) / grid.per_decade));
    } else {
        // (threshold, inf): start half a step above the threshold
        for (int i = 0; i < n; ++i)
            pts.push_back(threshold * std::pow(10.0, (i + 0.5) / grid.per_decade));
    }
    return pts;
}

namespace {

// best constant over pairs among the first m points (ordered from the threshold outward)
// lower kinds: c = min ratio; upper kinds: c = max ratio
double best_constant(const std::vector<double>& x, const std::vector<double>& fx, size_t m, double alpha,
                     bool lower) {
    double c = lower ? std::numeric_limits<double>::infinity() : 0.0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) {
            double r = x[i], R = x[j];
            if (!(r <= R)) continue;
            double q = fx[j] / fx[i] * std::pow(r / R, alpha);
            c = lower ? std::min(c, q) : std::max(c, q);
        }
    return c;
}

}  // namespace

ScalingCheckResult check_scaling(const std::function<double(double)>& f, ScalingKind kind, double exponent,
                                 double threshold, ScalingGrid grid, double slack) {
    if (kind == ScalingKind::AlmostIncreasing || kind == ScalingKind::AlmostDecreasing)
        throw UsageError("check_scaling: use check_almost_monotone for monotonicity kinds");
    if (grid.per_decade <= 0 || grid.decades <= 0) throw UsageError("check_scaling: empty grid");
    auto x = scaling_points(kind, threshold, grid);
    if (x.size() < 2) throw UsageError("check_scaling: grid needs at least two points");
    std::vector<double> fx(x.size());
    for (size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);
    bool lower = kind == ScalingKind::WLSinf || kind == ScalingKind::WLS0;
    // calibrate on the part of the grid nearest the threshold, then extend
    size_t m = std::max<size_t>(2, (2 * x.size()) / 3);
    double c_cal = best_constant(x, fx, m, exponent, lower);
    double c_all = best_constant(x, fx, x.size(), exponent, lower);
    ScalingCheckResult res;
    res.kind = kind;
    res.exponent = exponent;
    res.threshold = threshold;
    res.constant = c_all;
    res.violation = lower ? c_cal / c_all : c_all / c_cal;
    res.pass = c_all > 0.0 && std::isfinite(c_all) && res.violation <= 1.0 + slack;
    return res;
}

ScalingCheckResult check_almost_monotone(const std::function<double(double)>& f, ScalingKind direction, double c0,
                                         ScalingGrid grid, double slack) {
    if (direction != ScalingKind::AlmostIncreasing && direction != ScalingKind::AlmostDecreasing)
        throw UsageError("check_almost_monotone: direction must be almost-increasing or almost-decreasing");
    if (grid.per_decade <= 0 || grid.decades <= 0) throw UsageError("check_almost_monotone: empty grid");
    int n = grid.per_decade * grid.decades + 1;
    bool inc = direction == ScalingKind::AlmostIncreasing;
    std::vector<double> g(n);
    double run = inc ? 0.0 : std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double v = f(c0 * std::pow(10.0, static_cast<double>(i) / grid.per_decade));
        run = inc ? std::max(run, v) : std::min(run, v);
        g[i] = inc ? v / run : run / v;  // in (0, 1]
    }
    int m = std::max(2, (2 * n) / 3);
    double c_cal = *std::min_element(g.begin(), g.begin() + m);
    double c_all = *std::min_element(g.begin(), g.end());
    ScalingCheckResult res;
    res.kind = direction;
    res.exponent = 0.0;
    res.threshold = c0;
    res.constant = c_all;
    res.violation = c_cal / c_all;
    res.pass = c_all > 0.0 && res.violation <= 1.0 + slack;
    return res;
}

}  // namespace levyhk
