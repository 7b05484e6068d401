#include "levyhk/models.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <sstream>

#include "levyhk/errors.hpp"
#include "levyhk/quadrature.hpp"

namespace levyhk {

namespace {

constexpr double kE = 2.718281828459045235;

double softplus(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double frak_L(double s) { return std::log(kE + s); }

void check_dim(int d) {
    if (d < 1 || d > 3) throw ModelError("dimension must be 1, 2 or 3");
}

// nu by inverting the complete Bernstein structure of phi:
// m(rho) = Im phi(rho e^{i pi}) / pi is the density of the Levy density's Laplace representation,
// nu(r) = \int m(rho) G_rho(r) drho with G_rho the resolvent kernel of Delta - ... in R^d.
// Here written in s = sqrt(rho).
double nu_from_cbf(int d, const std::function<double(double)>& m_of_s, double r) {
    auto kernel = [d, r](double s) {
        switch (d) {
            case 1: return std::exp(-r * s);
            case 2: return s * boost::math::cyl_bessel_k(0, r * s) / M_PI;
            default: return s * std::exp(-r * s) / (2.0 * M_PI * r);
        }
    };
    double w0 = std::log(1.0 / r);
    auto g = [&](double w) {
        double s = std::exp(w);
        return s * m_of_s(s) * kernel(s);
    };
    std::vector<double> cuts;
    for (double c = -40.0; c < 4.0; c += 4.0) cuts.push_back(w0 + c);
    return quad::integrate_split(g, w0 - 50.0, w0 + std::log(60.0), cuts, {1e-300, 1e-12}).value;
}

// Im of the iterated log chain evaluated on the negative axis, over pi
double m_iterated(double alpha, int iterations, double s) {
    std::complex<double> z = std::polar(std::pow(s, alpha), M_PI * alpha / 2.0);
    for (int k = 0; k < iterations; ++k) z = std::log(1.0 + z);
    return std::imag(z) / M_PI;
}

// psi for logp models is tabulated in log-log and splined
class PsiTable {
public:
    PsiTable(int d, std::function<double(double)> nu) : d_(d), nu_(std::move(nu)) {}

    double operator()(double u) const {
        if (u <= 0.0) return 0.0;
        build();
        double x = std::log(u);
        if (x < x0_) return std::exp(y_.front() + slope_lo_ * (x - x0_));
        if (x > x1_) return std::exp(y_.back() + slope_hi_ * (x - x1_));
        return std::exp((*spline_)(x));
    }

private:
    void build() const {
        std::call_once(once_, [this] {
            const int per_decade = 16;
            x0_ = std::log(1e-12);
            // nu(r) r^{-d} must stay finite down to r ~ 10 / u
            x1_ = std::log(10.0) * (d_ == 1 ? 300.0 : 290.0 / d_);
            int n = static_cast<int>(std::lround((x1_ - x0_) / std::log(10.0) * per_decade)) + 1;
            double h = (x1_ - x0_) / (n - 1);
            y_.resize(n);
            for (int i = 0; i < n; ++i) y_[i] = std::log(psi_from_nu(d_, nu_, std::exp(x0_ + i * h)));
            slope_lo_ = (y_[1] - y_[0]) / h;
            slope_hi_ = (y_[n - 1] - y_[n - 2]) / h;
            spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
                y_.begin(), y_.end(), x0_, h);
        });
    }

    int d_;
    std::function<double(double)> nu_;
    mutable std::once_flag once_;
    mutable std::vector<double> y_;
    mutable double x0_ = 0, x1_ = 0, slope_lo_ = 0, slope_hi_ = 0;
    mutable std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

double surface_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        default: return 4.0 * M_PI;
    }
}

}  // namespace

std::string describe(const ConditionFlags& f) {
    std::string s;
    auto add = [&s](bool on, const char* n) {
        if (!on) return;
        if (!s.empty()) s += ' ';
        s += n;
    };
    add(f.A, "A");
    add(f.B, "B");
    add(f.C, "C");
    add(f.D, "D");
    add(f.S1, "S-1");
    add(f.S2, "S-2");
    add(f.L1, "L-1");
    add(f.L2, "L-2");
    return s;
}

std::string to_string(OnDiagonal c) {
    switch (c) {
        case OnDiagonal::FiniteAll: return "finite";
        case OnDiagonal::DivergentAll: return "divergent";
        case OnDiagonal::Mixed: return "mixed";
    }
    return "?";
}

double laplace_exponent(const SamplerDescriptor& s, double lambda) {
    double v = lambda;
    for (auto it = s.chain.rbegin(); it != s.chain.rend(); ++it) {
        if (it->kind == SubordinatorStage::Kind::Stable) v = std::pow(v, it->beta);
        else v = std::log1p(v);
    }
    return v;
}

double stable_nu_constant(int d, double alpha) {
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((d + alpha) / 2.0) /
           (std::pow(M_PI, d / 2.0) * std::tgamma(1.0 - alpha / 2.0));
}

std::pair<double, double> fit_kappas(const LevyModel& m) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double r : logspace(1e-6, 1e3, 9 * 32 + 1)) {
        double q = m.nu(r) * std::pow(r, m.d) / m.weight(1.0 / r);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    return {lo, hi};
}

LevyModel make_geometric_stable(int d, double alpha) {
    check_dim(d);
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("geometric stable needs 0 < alpha < 2");
    LevyModel m;
    std::ostringstream nm;
    nm << "geostable(d=" << d << ",alpha=" << alpha << ")";
    m.name = nm.str();
    m.family = "geometric-stable";
    m.d = d;
    m.params = {{"alpha", alpha}};
    double beta = alpha / 2.0;
    m.psi = [alpha](double u) { return u <= 0.0 ? 0.0 : softplus(alpha * std::log(u)); };
    m.weight.eval = [alpha, beta](double s) { return beta / (1.0 + std::pow(s, -alpha)); };
    m.weight.beta_small = alpha;
    m.weight.alpha1 = 0.0;
    m.weight.alpha2 = 0.0;
    m.weight.smooth = true;
    auto ms = [alpha](double s) { return m_iterated(alpha, 1, s); };
    m.nu = [d, ms](double r) { return nu_from_cbf(d, ms, r); };
    m.flags = {true, true, true, true, true, false, false, true};
    m.ondiag = OnDiagonal::Mixed;
    m.psi_log_rate = alpha;
    m.sampler = SamplerDescriptor{SamplerDescriptor::Kind::SubordinateBrownian,
                                  {{SubordinatorStage::Kind::Gamma, 1.0}, {SubordinatorStage::Kind::Stable, beta}}};
    std::tie(m.kappa1, m.kappa2) = fit_kappas(m);
    return m;
}

LevyModel make_iterated_geometric_stable(int d, double alpha, int iterations) {
    check_dim(d);
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("iterated geometric stable needs 0 < alpha < 2");
    if (iterations < 1) throw DomainError("iterations must be positive");
    if (iterations == 1) return make_geometric_stable(d, alpha);
    LevyModel m;
    std::ostringstream nm;
    nm << "igs(d=" << d << ",alpha=" << alpha << ",n=" << iterations << ")";
    m.name = nm.str();
    m.family = "iterated-geometric-stable";
    m.d = d;
    m.params = {{"alpha", alpha}, {"iterations", iterations}};
    double beta = alpha / 2.0;
    m.psi = [alpha, iterations](double u) {
        if (u <= 0.0) return 0.0;
        double v = softplus(alpha * std::log(u));
        for (int k = 1; k < iterations; ++k) v = std::log1p(v);
        return v;
    };
    // l(s) = s^2 phi'(s^2) = beta s^alpha / prod_k (1 + phi_k)
    m.weight.eval = [alpha, beta, iterations](double s) {
        double ls = alpha * std::log(s);
        double v = softplus(ls), acc = v;
        for (int k = 1; k < iterations; ++k) {
            v = std::log1p(v);
            acc += v;
        }
        return beta * std::exp(ls - acc);
    };
    m.weight.beta_small = alpha;
    m.weight.alpha1 = -0.1;
    m.weight.alpha2 = 0.0;
    m.weight.smooth = true;
    auto ms = [alpha, iterations](double s) { return m_iterated(alpha, iterations, s); };
    m.nu = [d, ms](double r) { return nu_from_cbf(d, ms, r); };
    m.flags = {true, true, true, true, true, false, true, false};
    m.ondiag = OnDiagonal::DivergentAll;
    m.psi_log_rate = 0.0;
    SamplerDescriptor sd{SamplerDescriptor::Kind::SubordinateBrownian, {}};
    for (int k = 0; k < iterations; ++k) sd.chain.push_back({SubordinatorStage::Kind::Gamma, 1.0});
    sd.chain.push_back({SubordinatorStage::Kind::Stable, beta});
    m.sampler = sd;
    std::tie(m.kappa1, m.kappa2) = fit_kappas(m);
    return m;
}

LevyModel make_logp_model(int d, double p, double beta) {
    check_dim(d);
    if (p < -1.0) throw ModelError("logp model needs p >= -1 (finite Levy measure otherwise)");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("logp model needs 0 < beta < 1");
    LevyModel m;
    std::ostringstream nm;
    nm << "logp(d=" << d << ",p=" << p << ",beta=" << beta << ")";
    m.name = nm.str();
    m.family = "logp";
    m.d = d;
    m.params = {{"p", p}, {"beta", beta}};
    double l1p = std::pow(frak_L(1.0), p);
    auto w = [p, beta, l1p](double s) { return s >= 1.0 ? std::pow(frak_L(s), p) : std::pow(s, beta) * l1p; };
    m.weight.eval = w;
    m.weight.beta_small = beta;
    m.weight.alpha1 = p < 0.0 ? -0.1 : 0.0;
    m.weight.alpha2 = p > 0.0 ? 0.1 : 0.0;
    m.weight.smooth = false;
    m.weight.knots = {1.0};
    m.nu = [d, w](double r) { return std::pow(r, -d) * w(1.0 / r); };
    auto table = std::make_shared<PsiTable>(d, m.nu);
    m.psi = [table](double u) { return (*table)(u); };
    m.kappa1 = m.kappa2 = 1.0;
    // kink at r = 1: -nu'/r keeps decreasing only if 1 + beta <= 1 + p / ((e+1) L(1))
    bool b_ok = p > 0.0 && beta <= p / ((kE + 1.0) * frak_L(1.0));
    m.flags.A = true;
    m.flags.B = b_ok;
    m.flags.C = true;
    m.flags.D = true;
    m.flags.S1 = p <= 0.0;
    m.flags.S2 = p > 0.0;
    m.flags.L1 = p < 0.0;
    m.flags.L2 = p == 0.0;
    if (p > 0.0) {
        m.ondiag = OnDiagonal::FiniteAll;
        m.psi_log_rate = std::numeric_limits<double>::infinity();
    } else if (p < 0.0) {
        m.ondiag = OnDiagonal::DivergentAll;
        m.psi_log_rate = 0.0;
    } else {
        m.ondiag = OnDiagonal::Mixed;
        m.psi_log_rate = surface_area(d);
    }
    return m;
}

LevyModel make_stable(int d, double alpha) {
    check_dim(d);
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable needs 0 < alpha < 2");
    LevyModel m;
    std::ostringstream nm;
    nm << "stable(d=" << d << ",alpha=" << alpha << ")";
    m.name = nm.str();
    m.family = "stable";
    m.d = d;
    m.params = {{"alpha", alpha}};
    double C = stable_nu_constant(d, alpha);
    double beta = alpha / 2.0;
    m.psi = [alpha](double u) { return u <= 0.0 ? 0.0 : std::pow(u, alpha); };
    m.nu = [C, d, alpha](double r) { return C * std::pow(r, -d - alpha); };
    m.weight.eval = [alpha, beta](double s) { return beta * std::pow(s, alpha); };
    m.weight.beta_small = alpha;
    m.weight.alpha1 = alpha;
    m.weight.alpha2 = alpha;
    m.weight.smooth = true;
    m.kappa1 = m.kappa2 = C / beta;
    m.flags = {alpha < 1.0, true, true, true, false, true, false, false};
    m.ondiag = OnDiagonal::FiniteAll;
    m.psi_log_rate = std::numeric_limits<double>::infinity();
    m.sampler = SamplerDescriptor{SamplerDescriptor::Kind::DirectStable, {{SubordinatorStage::Kind::Stable, beta}}};
    return m;
}

double psi_from_nu(const LevyModel& m, double u) { return psi_from_nu(m.d, m.nu, u); }

double psi_from_nu(int d, const std::function<double(double)>& nu, double u) {
    check_dim(d);
    if (!(u > 0.0)) throw DomainError("psi_from_nu: u must be positive");
    // x = u r; psi(u) = c_d \int_0^inf (1 - k_d(x)) nu(x/u) (x/u)^{d-1} dx / u
    double cd = surface_area(d);
    auto g = [&](double x) {
        double r = x / u;
        return nu(r) * std::pow(r, d - 1) / u;
    };
    auto one_minus_k = [d](double x) {
        switch (d) {
            case 1: {
                double s = std::sin(0.5 * x);
                return 2.0 * s * s;
            }
            case 2: return x < 1e-3 ? x * x / 4.0 - x * x * x * x / 64.0 : 1.0 - boost::math::cyl_bessel_j(0, x);
            default: return x < 1e-3 ? x * x / 6.0 - x * x * x * x / 120.0 : 1.0 - std::sin(x) / x;
        }
    };
    quad::Kernel kern = d == 1 ? quad::Kernel::Cos : d == 2 ? quad::Kernel::BesselJ0 : quad::Kernel::Sin;
    int first = 4;
    double X = quad::kernel_zero(kern, first);
    // keep the r = 1 kink of piecewise densities out of the fixed panels when cheap to do so
    if (u > X && u < 1e4) {
        while (quad::kernel_zero(kern, first) <= u) ++first;
        X = quad::kernel_zero(kern, first);
    }
    // log scale up to the first zero, then linear panels between zeros
    double X0 = quad::kernel_zero(kern, 1);
    std::vector<double> head_cuts;
    for (double c = -30.0; c < std::log(X0); c += 3.0) head_cuts.push_back(c);
    if (u < X0) head_cuts.push_back(std::log(u));
    auto head_f = [&](double v) {
        double x = std::exp(v);
        return x * one_minus_k(x) * g(x);
    };
    // keep r = x / u above the double range floor
    double head_lo = std::max(-40.0, std::log(u) - 690.0);
    double head = quad::integrate_split(head_f, head_lo, std::log(X0), head_cuts, {1e-300, 1e-12}).value;
    {
        std::vector<double> cuts;
        for (int n = 2; n < first; ++n) cuts.push_back(quad::kernel_zero(kern, n));
        if (u > X0 && u < X) cuts.push_back(u);
        auto lin_f = [&](double x) { return one_minus_k(x) * g(x); };
        head += quad::integrate_split(lin_f, X0, X, cuts, {1e-300, 1e-12}).value;
    }
    // \int_X^inf g(x) dx = \int_{X/u}^inf nu(r) r^{d-1} dr, in log r
    double lr0 = std::log(X / u);
    auto tail_f = [&](double v) {
        double r = std::exp(v);
        return nu(r) * std::pow(r, d);
    };
    double lr1 = std::max(lr0, 0.0) + 200.0;
    std::vector<double> tail_cuts{0.0};
    for (double c = lr0 + 2.0; c < lr1; c += 4.0) tail_cuts.push_back(c);
    double tail = quad::integrate_split(tail_f, lr0, lr1, tail_cuts, {1e-300, 1e-12}).value;
    {
        // power-law remainder past the cut
        double f1 = tail_f(lr1), f0 = tail_f(lr1 - 1.0);
        double rate = std::log(f0 / f1);
        if (f1 > 0.0 && rate > 0.05) tail += f1 / rate;
    }
    quad::OscillatoryOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14 * (head + tail);
    std::function<double(double)> osc_f = g;
    if (d == 3) osc_f = [&](double x) { return g(x) / x; };
    double osc = quad::oscillatory_tail(osc_f, kern, 1.0, first, opt).value;
    double v = cd * (head + tail - osc);
    if (!std::isfinite(v)) throw NumericError("psi_from_nu: non-finite result", v);
    return v;
}

ScalingCheckResult check_condition_B(const LevyModel& m, const std::vector<double>& grid_in, double slack) {
    std::vector<double> grid = grid_in.empty() ? logspace(1e-4, 10.0, 5 * 16 + 1) : grid_in;
    if (grid.size() < 3) throw UsageError("check_condition_B: grid needs at least three points");
    std::vector<double> g(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        double r = grid[i], e = 1e-4 * r;
        g[i] = -(m.nu(r + e) - m.nu(r - e)) / (2.0 * e) / r;
    }
    double worst = 0.0;
    for (size_t i = 0; i + 1 < grid.size(); ++i) worst = std::max(worst, g[i + 1] / g[i]);
    double c0 = 0.0;
    std::vector<double> big;
    for (double r : grid)
        if (r >= 1.0) big.push_back(r);
    if (big.size() < 2) big = logspace(1.0, 10.0, 17);
    for (double r : big) c0 = std::max(c0, m.nu(r) / m.nu(r + 1.0));
    ScalingCheckResult res;
    res.kind = ScalingKind::AlmostDecreasing;
    res.threshold = 1.0;
    res.constant = c0;
    res.violation = worst;
    res.pass = worst <= 1.0 + slack && std::isfinite(c0) && c0 > 0.0;
    return res;
}

double divergence_threshold(const LevyModel& m) {
    switch (m.ondiag) {
        case OnDiagonal::FiniteAll: return 0.0;
        case OnDiagonal::DivergentAll: return std::numeric_limits<double>::infinity();
        case OnDiagonal::Mixed: return m.d / m.psi_log_rate;
    }
    return 0.0;
}

bool ondiag_divergent(const LevyModel& m, double t) {
    double ts = divergence_threshold(m);
    if (std::isinf(ts)) return true;
    return t <= ts;
}

OnDiagonal classify_on_diagonal(const ScaleKit& kit) {
    auto rho = [&kit](double r) { return kit.Phi(r) / std::log1p(r); };
    double q = std::log(rho(1e32) / rho(1e8)) / std::log(4.0);
    if (q > 0.2) return OnDiagonal::FiniteAll;
    if (q < -0.2) return OnDiagonal::DivergentAll;
    return OnDiagonal::Mixed;
}

namespace {

struct CatalogEntry {
    std::string name;
    std::function<LevyModel()> make;
    std::unique_ptr<LevyModel> model;
    std::unique_ptr<ScaleKit> kit;
    std::once_flag once;
};

std::vector<std::unique_ptr<CatalogEntry>>& registry() {
    static std::vector<std::unique_ptr<CatalogEntry>> reg = [] {
        std::vector<std::unique_ptr<CatalogEntry>> r;
        auto add = [&r](std::string n, std::function<LevyModel()> f) {
            auto e = std::make_unique<CatalogEntry>();
            e->name = std::move(n);
            e->make = std::move(f);
            r.push_back(std::move(e));
        };
        add("cauchy", [] { return make_stable(1, 1.0); });
        add("stable-0.5", [] { return make_stable(1, 0.5); });
        add("geostable", [] { return make_geometric_stable(1, 1.0); });
        add("igs", [] { return make_iterated_geometric_stable(1, 1.0, 2); });
        add("logp-m1", [] { return make_logp_model(1, -1.0, 0.8); });
        add("logp-m0.5", [] { return make_logp_model(1, -0.5, 0.8); });
        add("logp-0", [] { return make_logp_model(1, 0.0, 0.8); });
        add("logp-1", [] { return make_logp_model(1, 1.0, 0.8); });
        return r;
    }();
    return reg;
}

CatalogEntry& entry(const std::string& name) {
    for (auto& e : registry())
        if (e->name == name) {
            std::call_once(e->once, [&e] {
                e->model = std::make_unique<LevyModel>(e->make());
                e->model->name = e->name;
                e->kit = std::make_unique<ScaleKit>(e->model->weight);
            });
            return *e;
        }
    std::string known;
    for (auto& e : registry()) known += " " + e->name;
    throw UsageError("unknown model '" + name + "'; known:" + known);
}

}  // namespace

std::vector<std::string> catalog_names() {
    std::vector<std::string> out;
    for (auto& e : registry()) out.push_back(e->name);
    return out;
}

const LevyModel& catalog_model(const std::string& name) { return *entry(name).model; }

const ScaleKit& catalog_kit(const std::string& name) { return *entry(name).kit; }

}  // namespace levyhk
