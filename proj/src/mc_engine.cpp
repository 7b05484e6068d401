#include "levyhk/mc_engine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "levyhk/errors.hpp"

namespace levyhk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// run fn(block) for every block; blocks are claimed from an atomic counter
void parallel_blocks(long nblocks, int workers, const std::function<void(long)>& fn) {
    workers = static_cast<int>(std::min<long>(std::max(1, workers), nblocks));
    if (workers <= 1) {
        for (long b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long b = next.fetch_add(1);
                if (b >= nblocks) return;
                try {
                    fn(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

long block_count(const McConfig& cfg) { return (cfg.paths + cfg.block_size - 1) / cfg.block_size; }

void require_sampler(const LevyModel& m) {
    if (!m.sampler) throw UsageError("model '" + m.name + "' has no exact-increment sampler");
}

struct DecayFit {
    double lambda = 0.0, lambda_se = 0.0, r2 = 0.0, t_lo = 0.0, t_hi = 0.0;
    int points = 0;
};

// log-linear regression of survival over the window where it is resolved
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& p, long n) {
    double p_hi = 0.3, p_lo = std::max(1e-3, 100.0 / static_cast<double>(n));
    std::vector<double> tt, yy;
    for (size_t i = 0; i < t.size(); ++i)
        if (p[i] <= p_hi && p[i] >= p_lo) {
            tt.push_back(t[i]);
            yy.push_back(std::log(p[i]));
        }
    DecayFit f;
    f.points = static_cast<int>(tt.size());
    if (tt.size() < 8) throw NumericError("survival not resolved on enough time points for a decay fit");
    Eigen::MatrixXd A(tt.size(), 2);
    Eigen::VectorXd y(tt.size());
    for (size_t i = 0; i < tt.size(); ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = tt[i];
        y(i) = yy[i];
    }
    Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd res = y - A * coef;
    double ss_res = res.squaredNorm();
    double ss_tot = (y.array() - y.mean()).square().sum();
    double tbar = A.col(1).mean();
    double sxx = (A.col(1).array() - tbar).square().sum();
    f.lambda = -coef(1);
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    f.lambda_se = std::sqrt(ss_res / std::max<double>(1.0, tt.size() - 2.0) / sxx);
    f.t_lo = tt.front();
    f.t_hi = tt.back();
    return f;
}

std::vector<double> survival_at(const KilledPaths& kp, int level, const std::vector<double>& times) {
    std::vector<double> out(times.size());
    double step = kp.step[level];
    const auto& ex = kp.exit_step[level];
    std::vector<long> alive(times.size(), 0);
    std::vector<std::int64_t> lim(times.size());
    for (size_t j = 0; j < times.size(); ++j) lim[j] = static_cast<std::int64_t>(std::floor(times[j] / step + 1e-9));
    for (long i = 0; i < kp.n; ++i)
        for (size_t j = 0; j < times.size(); ++j)
            if (ex[i] < 0 || ex[i] > lim[j]) ++alive[j];
    for (size_t j = 0; j < times.size(); ++j) out[j] = static_cast<double>(alive[j]) / kp.n;
    return out;
}

}  // namespace

void validate(const McConfig& cfg) {
    if (cfg.paths < 1) throw UsageError("paths must be positive");
    if (!(cfg.dt > 0.0)) throw UsageError("dt must be positive");
    if (!(cfg.horizon >= cfg.dt)) throw UsageError("dt must not exceed the horizon");
    if (cfg.block_size < 1) throw UsageError("block size must be positive");
    if (cfg.refinement_levels < 0 || cfg.refinement_levels > 6) throw UsageError("refinement levels must be in 0..6");
}

int effective_workers(const McConfig& cfg) {
    int w = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("LEVYHK_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) w = std::min(w, cap);
    }
    return std::max(1, w);
}

void Welford::add(double x) {
    ++n;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
}

void Welford::merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
        *this = o;
        return;
    }
    long nn = n + o.n;
    double d = o.mean - mean;
    mean += d * o.n / nn;
    m2 += o.m2 + d * d * static_cast<double>(n) * o.n / nn;
    n = nn;
}

Rng block_stream(std::uint64_t seed, std::uint64_t block) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(block + 0x632be59bd9b4e019ULL)));
}

double uniform_open(Rng& g) { return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53; }

namespace {

double log_gamma_impl(Rng& g, double log_shape, std::normal_distribution<double>& normal) {
    double a = std::exp(log_shape);
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    double boost = 0.0;
    if (a < 1.0) {
        // G(a) = G(a+1) U^{1/a}
        boost = std::log(uniform_open(g)) / a;
        a += 1.0;
    }
    // Marsaglia-Tsang
    double d = a - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal(g), v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform_open(g);
        // squeeze first, it skips two logs most of the time
        if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v) + boost;
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d * v) + boost;
    }
}

}  // namespace

double sample_log_gamma(Rng& g, double log_shape) {
    std::normal_distribution<double> normal;
    return log_gamma_impl(g, log_shape, normal);
}

double sample_log_positive_stable(Rng& g, double beta) {
    // Kanter / Chambers-Mallows-Stuck, totally skewed
    double U = M_PI * uniform_open(g);
    double W = -std::log(uniform_open(g));
    return std::log(std::sin(beta * U)) - std::log(std::sin(U)) / beta +
           (1.0 - beta) / beta * (std::log(std::sin((1.0 - beta) * U)) - std::log(W));
}

IncrementSampler::IncrementSampler(const LevyModel& m) : d_(m.d) {
    require_sampler(m);
    desc_ = *m.sampler;
    for (auto& st : desc_.chain)
        if (st.kind == SubordinatorStage::Kind::Stable && !(st.beta > 0.0 && st.beta < 1.0))
            throw UsageError("stable subordinator stage needs index in (0, 1)");
}

double IncrementSampler::log_subordinator(Rng& g, double log_dt) const {
    double lt = log_dt;
    for (auto& st : desc_.chain) {
        if (!std::isfinite(lt)) return lt;
        if (st.kind == SubordinatorStage::Kind::Gamma) lt = log_gamma_impl(g, lt, normal_);
        else lt = lt / st.beta + sample_log_positive_stable(g, st.beta);
    }
    return lt;
}

void IncrementSampler::increment(Rng& g, double log_dt, Point& dx) const {
    dx.resize(d_);
    if (d_ == 1 && !desc_.chain.empty() && desc_.chain.back().kind == SubordinatorStage::Kind::Stable) {
        // B(2 S) with S a beta-stable subordinator at time T is T^{1/alpha} times a symmetric
        // alpha-stable variate, alpha = 2 beta; drawn directly by Chambers-Mallows-Stuck
        double lt = log_dt;
        for (size_t i = 0; i + 1 < desc_.chain.size() && std::isfinite(lt); ++i) {
            auto& st = desc_.chain[i];
            if (st.kind == SubordinatorStage::Kind::Gamma) lt = log_gamma_impl(g, lt, normal_);
            else lt = lt / st.beta + sample_log_positive_stable(g, st.beta);
        }
        if (!std::isfinite(lt) && lt < 0) {
            dx(0) = 0.0;
            return;
        }
        double alpha = 2.0 * desc_.chain.back().beta;
        double V = M_PI * (uniform_open(g) - 0.5);
        double z;
        if (alpha == 1.0) {
            z = std::tan(V);
        } else {
            double W = -std::log(uniform_open(g));
            z = std::sin(alpha * V) / std::pow(std::cos(V), 1.0 / alpha) *
                std::pow(std::cos((1.0 - alpha) * V) / W, (1.0 - alpha) / alpha);
        }
        dx(0) = std::exp(lt / alpha) * z;
        return;
    }
    double ls = log_subordinator(g, log_dt);
    if (!std::isfinite(ls) && ls < 0) {
        dx.setZero();
        return;
    }
    double sd = std::exp(0.5 * (ls + std::log(2.0)));
    for (int i = 0; i < d_; ++i) dx(i) = sd * normal_(g);
}

std::vector<PathSkeleton> simulate_paths(const LevyModel& m, const McConfig& cfg, const Point& x0,
                                         const Domain* domain) {
    require_sampler(m);
    validate(cfg);
    if (x0.size() != m.d) throw UsageError("start point dimension does not match the model");
    long steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
    std::vector<PathSkeleton> out(cfg.paths);
    IncrementSampler proto(m);
    double ldt = std::log(cfg.dt);
    parallel_blocks(block_count(cfg), effective_workers(cfg), [&](long b) {
        Rng g = block_stream(cfg.seed, b);
        IncrementSampler s = proto;
        Point dx(m.d);
        long lo = b * cfg.block_size, hi = std::min(cfg.paths, lo + cfg.block_size);
        for (long i = lo; i < hi; ++i) {
            auto& p = out[i];
            Point x = x0;
            p.points.push_back(x);
            p.last_inside = x;
            for (long k = 1; k <= steps; ++k) {
                s.increment(g, ldt, dx);
                x += dx;
                p.points.push_back(x);
                if (domain) {
                    if (!domain->contains(x)) {
                        p.exit_index = k;
                        break;
                    }
                    p.last_inside = x;
                }
            }
        }
    });
    return out;
}

KilledPaths run_killed(const LevyModel& m, const Domain& dom, const Point& x0, const McConfig& cfg, double horizon,
                       bool keep_points) {
    require_sampler(m);
    validate(cfg);
    if (x0.size() != dom.dim() || dom.dim() != m.d) throw UsageError("dimensions of model, domain and point differ");
    if (!dom.contains(x0)) throw UsageError("start point is not inside the domain");
    int L = cfg.refinement_levels;
    KilledPaths kp;
    kp.n = cfg.paths;
    kp.levels = L;
    kp.horizon = horizon;
    for (int l = 0; l <= L; ++l) kp.step.push_back(std::ldexp(cfg.dt, -l));
    kp.exit_step.assign(L + 1, std::vector<std::int64_t>(cfg.paths, -1));
    if (keep_points) kp.exit_point.assign(L + 1, std::vector<Point>(cfg.paths, Point::Zero(m.d)));
    double dtf = kp.step[L];
    long steps = static_cast<long>(std::ceil(horizon / dtf - 1e-9));
    double ldt = std::log(dtf);
    IncrementSampler proto(m);
    parallel_blocks(block_count(cfg), effective_workers(cfg), [&](long b) {
        Rng g = block_stream(cfg.seed, b);
        IncrementSampler s = proto;
        Point dx(m.d);
        long lo = b * cfg.block_size, hi = std::min(cfg.paths, lo + cfg.block_size);
        for (long i = lo; i < hi; ++i) {
            Point x = x0;
            int finest_alive = L;  // levels > finest_alive have exited
            for (long k = 1; k <= steps; ++k) {
                s.increment(g, ldt, dx);
                x += dx;
                // level l looks at fine steps divisible by 2^{L-l}
                int tz = k == 0 ? L : std::min<int>(L, __builtin_ctzl(static_cast<unsigned long>(k)));
                int coarsest_here = L - tz;
                if (coarsest_here > finest_alive) continue;
                if (dom.contains(x)) continue;
                for (int l = std::max(coarsest_here, 0); l <= finest_alive; ++l) {
                    kp.exit_step[l][i] = k >> (L - l);
                    if (keep_points) kp.exit_point[l][i] = x;
                }
                finest_alive = coarsest_here - 1;
                if (finest_alive < 0) break;
            }
        }
    });
    return kp;
}

SurvivalCurve survival_probability(const LevyModel& m, const Domain& dom, const Point& x,
                                   const std::vector<double>& times, const McConfig& cfg) {
    if (times.empty()) throw UsageError("survival needs a time grid");
    for (double t : times)
        if (!(t >= 0.0)) throw UsageError("survival times must be nonnegative");
    if (x.size() != dom.dim() || !dom.contains(x)) throw UsageError("survival start point must be interior");
    double horizon = std::max(*std::max_element(times.begin(), times.end()), cfg.dt);
    McConfig c = cfg;
    c.horizon = horizon;
    auto kp = run_killed(m, dom, x, c, horizon, false);
    SurvivalCurve sc;
    sc.domain = dom.describe();
    sc.x = x;
    sc.times = times;
    auto p0 = survival_at(kp, 0, times);
    std::vector<double> p1 = kp.levels >= 1 ? survival_at(kp, 1, times) : p0;
    for (size_t j = 0; j < times.size(); ++j) {
        McEstimate e;
        e.value = e.raw_value = p0[j];
        e.std_error = std::sqrt(p0[j] * (1.0 - p0[j]) / kp.n);
        e.paths = kp.n;
        e.dt = cfg.dt;
        e.refined_value = p1[j];
        e.bias_flag = std::abs(p1[j] - p0[j]) > 2.0 * e.std_error && kp.levels >= 1;
        sc.estimates.push_back(e);
    }
    return sc;
}

McEstimate mean_exit_time(const LevyModel& m, const Domain& dom, const Point& x, const McConfig& cfg) {
    if (!dom.bounded()) throw UsageError("mean exit time needs a bounded domain");
    // one run out to the last extension; a path alive past horizon*2^ext is censored there.
    // Same estimate as restarting with a doubled horizon, without re-simulating.
    auto kp = run_killed(m, dom, x, cfg, std::ldexp(cfg.horizon, 3), false);
    for (int ext = 0; ext <= 3; ++ext) {
        double horizon = std::ldexp(cfg.horizon, ext);
        auto lim0 = static_cast<std::int64_t>(std::floor(horizon / kp.step[0] + 1e-9));
        long censored = std::count_if(kp.exit_step[0].begin(), kp.exit_step[0].end(),
                                      [lim0](std::int64_t k) { return k < 0 || k > lim0; });
        if (static_cast<double>(censored) > 1e-3 * kp.n) continue;
        auto level_stats = [&](int l) {
            long nb = block_count(cfg);
            std::vector<Welford> w(nb);
            for (long b = 0; b < nb; ++b) {
                long lo = b * cfg.block_size, hi = std::min(cfg.paths, lo + cfg.block_size);
                for (long i = lo; i < hi; ++i) {
                    auto k = kp.exit_step[l][i];
                    double tau = k * kp.step[l] - 0.5 * kp.step[l];
                    w[b].add(k < 0 || tau > horizon ? horizon : tau);
                }
            }
            Welford all;
            for (auto& x : w) all.merge(x);
            return all;
        };
        auto w0 = level_stats(0);
        McEstimate e;
        e.value = e.raw_value = w0.mean;
        e.std_error = w0.std_error();
        e.paths = kp.n;
        e.dt = cfg.dt;
        e.refined_value = kp.levels >= 1 ? level_stats(1).mean : w0.mean;
        e.bias_flag = kp.levels >= 1 && std::abs(e.refined_value - e.value) > 2.0 * e.std_error;
        return e;
    }
    throw NumericError("mean exit time: survival tail above 1e-3 after 3 horizon extensions");
}

std::shared_ptr<const KernelTable> shared_kernel_table(const LevyModel& m, double s_min, double s_max, double r_min,
                                                       double r_max, int per_decade) {
    using Key = std::tuple<std::string, std::string, int, std::map<std::string, double>, double, double, double, double,
                           int>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const KernelTable>> cache;
    Key key{m.name, m.family, m.d, m.params, s_min, s_max, r_min, r_max, per_decade};
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto tab = std::make_shared<const KernelTable>(m, s_min, s_max, r_min, r_max, per_decade);
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(key, tab);
    return tab;
}

namespace {

struct TableRange {
    double s_min, s_max, r_min, r_max;
};

// ranges snapped to powers of two so related runs share a table
TableRange table_range(const Domain& dom, double fine_step, double t_max, const std::vector<Point>& ys) {
    double dmin = std::numeric_limits<double>::infinity();
    for (auto& y : ys) dmin = std::min(dmin, dom.boundary_distance(y));
    auto snap_down = [](double v) { return std::exp2(std::floor(std::log2(v))); };
    auto snap_up = [](double v) { return std::exp2(std::ceil(std::log2(v))); };
    return {snap_down(0.5 * fine_step), snap_up(t_max), snap_down(std::max(1e-6, 0.5 * dmin)),
            snap_up(1e3 * std::max(1.0, dom.r2()))};
}

}  // namespace

std::vector<McEstimate> dirichlet_kernel_batch(const LevyModel& m, const Domain& dom, const Point& x,
                                               const std::vector<DirichletQuery>& queries, const McConfig& cfg,
                                               const DirichletOptions& opt) {
    if (queries.empty()) throw UsageError("Dirichlet kernel needs at least one (t, y) query");
    std::vector<Point> ys;
    double t_max = 0.0;
    for (auto& q : queries) {
        if (q.y.size() != dom.dim() || !dom.contains(q.y)) throw UsageError("Dirichlet kernel target y must be interior");
        if (!(q.t > 0.0)) throw UsageError("Dirichlet kernel needs t > 0");
        ys.push_back(q.y);
        t_max = std::max(t_max, q.t);
    }
    if (!dom.contains(x)) throw UsageError("Dirichlet kernel start x must be interior");
    McConfig c = cfg;
    c.horizon = std::max(t_max, cfg.dt);
    auto kp = run_killed(m, dom, x, c, c.horizon, true);
    auto rg = table_range(dom, kp.step.back(), t_max, ys);
    auto table = shared_kernel_table(m, rg.s_min, rg.s_max, rg.r_min, rg.r_max, opt.table_per_decade);
    ScaleKit kit(m.weight);
    int nl = std::min(kp.levels, 1) + 1;
    size_t nq = queries.size();
    long nb = block_count(cfg);
    // per block, per level, per query
    std::vector<Welford> acc(nb * nl * nq);
    std::vector<double> clipped(nb * nl * nq, 0.0);
    parallel_blocks(nb, effective_workers(cfg), [&](long b) {
        long lo = b * cfg.block_size, hi = std::min(cfg.paths, lo + cfg.block_size);
        for (int l = 0; l < nl; ++l) {
            double step = kp.step[l];
            for (size_t q = 0; q < nq; ++q) {
                auto& w = acc[(b * nl + l) * nq + q];
                double& cl = clipped[(b * nl + l) * nq + q];
                const auto& Q = queries[q];
                for (long i = lo; i < hi; ++i) {
                    auto k = kp.exit_step[l][i];
                    double tau = k * step;
                    double v = 0.0;
                    if (k >= 0 && tau < Q.t * (1.0 - 1e-12)) {
                        double s = Q.t - tau;
                        double r = (Q.y - kp.exit_point[l][i]).norm();
                        if (s <= step * (1.0 + 1e-9) && r < std::sqrt(step) * opt.clip_scale) {
                            double rr = std::max(r, 1e-12);
                            v = s * std::pow(rr, -m.d) * kit.K(rr);
                            cl += v;
                        } else {
                            v = (*table)(s, r);
                        }
                    }
                    w.add(v);
                }
            }
        }
    });
    std::vector<McEstimate> out;
    for (size_t q = 0; q < nq; ++q) {
        double a = (queries[q].y - x).norm();
        double free = free_density(m, queries[q].t, a).density;
        double vals[2] = {0.0, 0.0}, ses[2] = {0.0, 0.0}, clip[2] = {0.0, 0.0};
        for (int l = 0; l < nl; ++l) {
            Welford all;
            for (long b = 0; b < nb; ++b) {
                all.merge(acc[(b * nl + l) * nq + q]);
                clip[l] += clipped[(b * nl + l) * nq + q];
            }
            vals[l] = free - all.mean;
            ses[l] = all.std_error();
            clip[l] /= static_cast<double>(kp.n);
        }
        McEstimate e;
        e.raw_value = vals[0];
        e.value = std::max(0.0, vals[0]);
        e.std_error = ses[0];
        e.paths = kp.n;
        e.dt = cfg.dt;
        e.refined_value = nl > 1 ? vals[1] : vals[0];
        e.clipped_fraction = e.value > 0.0 ? clip[0] / e.value : (clip[0] > 0.0 ? 1.0 : 0.0);
        e.bias_flag = (nl > 1 && std::abs(vals[1] - vals[0]) > 2.0 * ses[0]) || e.clipped_fraction > 0.01;
        out.push_back(e);
    }
    return out;
}

McEstimate dirichlet_kernel(const LevyModel& m, const Domain& dom, double t, const Point& x, const Point& y,
                            const McConfig& cfg) {
    return dirichlet_kernel_batch(m, dom, x, {{t, y}}, cfg).front();
}

LargeTimeReport decay_rate(const LevyModel& m, const Domain& dom, const McConfig& cfg) {
    if (!dom.bounded()) throw UsageError("decay rate needs a bounded domain");
    auto kp = run_killed(m, dom, dom.x1(), cfg, cfg.horizon, false);
    std::vector<double> times;
    for (int k = 1; k <= 400; ++k) times.push_back(cfg.horizon * k / 400.0);
    auto p0 = survival_at(kp, 0, times);
    if (p0.back() == 0.0 && p0.front() == 0.0) throw NumericError("all paths died before the first fit time");
    auto f0 = fit_decay(times, p0, kp.n);
    LargeTimeReport rep;
    rep.domain = dom.describe();
    rep.lambda = f0.lambda;
    rep.lambda_std_error = f0.lambda_se;
    rep.r_squared = f0.r2;
    rep.t_lo = f0.t_lo;
    rep.t_hi = f0.t_hi;
    rep.onset = f0.t_lo;
    rep.lambda_refined = f0.lambda;
    if (kp.levels >= 1) {
        auto f1 = fit_decay(times, survival_at(kp, 1, times), kp.n);
        rep.lambda_refined = f1.lambda;
        rep.bias_flag = std::abs(f1.lambda - f0.lambda) > 2.0 * f0.lambda_se;
    }
    ScaleKit kit(m.weight);
    rep.h_r2 = kit.h(dom.r2());
    rep.h_r1_half = kit.h(dom.r1() / 2.0);
    return rep;
}

std::vector<GreenEstimate> green_function(const LevyModel& m, const Domain& dom, const Point& x,
                                          const std::vector<Point>& ys, const McConfig& cfg,
                                          const std::vector<double>& t_grid) {
    if (!dom.bounded()) throw UsageError("Green function needs a bounded domain");
    if (t_grid.size() < 3) throw UsageError("Green function needs at least three grid times");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) || !(t_grid.front() > 0.0))
        throw UsageError("Green time grid must be positive and increasing");
    double T = t_grid.back();
    if (T > cfg.horizon) throw UsageError("Green time grid extends past the horizon");
    for (auto& y : ys) {
        if (y.size() != dom.dim() || !dom.contains(y)) throw UsageError("Green target y must be interior");
        if ((y - x).norm() == 0.0) throw DomainError("Green function is infinite on the diagonal");
    }
    if (!dom.contains(x)) throw UsageError("Green start x must be interior");
    auto kp = run_killed(m, dom, x, cfg, cfg.horizon, true);
    // decay rate from the same paths
    std::vector<double> times;
    for (int k = 1; k <= 400; ++k) times.push_back(cfg.horizon * k / 400.0);
    auto fit = fit_decay(times, survival_at(kp, 0, times), kp.n);
    size_t nt = t_grid.size();
    std::vector<double> w(nt, 0.0);
    for (size_t j = 0; j + 1 < nt; ++j) {
        double h = t_grid[j + 1] - t_grid[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    double lam = fit.lambda;
    if (!(lam > 0.0)) throw NumericError("Green tail: nonpositive decay rate");
    w[nt - 1] += 1.0 / lam;  // exponential tail beyond T
    auto rg = table_range(dom, kp.step.back(), T, ys);
    auto table = shared_kernel_table(m, rg.s_min, rg.s_max, rg.r_min, rg.r_max, 24);
    int nl = std::min(kp.levels, 1) + 1;
    size_t ny = ys.size();
    long nb = block_count(cfg);
    std::vector<Welford> acc(nb * nl * ny), acc_tail(nb * ny);
    parallel_blocks(nb, effective_workers(cfg), [&](long b) {
        long lo = b * cfg.block_size, hi = std::min(cfg.paths, lo + cfg.block_size);
        for (int l = 0; l < nl; ++l) {
            double step = kp.step[l];
            for (size_t q = 0; q < ny; ++q) {
                for (long i = lo; i < hi; ++i) {
                    auto k = kp.exit_step[l][i];
                    double F = 0.0, ftail = 0.0;
                    if (k >= 0) {
                        double tau = k * step;
                        double r = (ys[q] - kp.exit_point[l][i]).norm();
                        for (size_t j = 0; j < nt; ++j) {
                            if (t_grid[j] <= tau * (1.0 + 1e-12)) continue;
                            double c = (*table)(t_grid[j] - tau, r);
                            F += w[j] * c;
                            if (j == nt - 1) ftail = c / lam;
                        }
                    }
                    acc[(b * nl + l) * ny + q].add(F);
                    if (l == 0) acc_tail[b * ny + q].add(ftail);
                }
            }
        }
    });
    std::vector<GreenEstimate> out;
    for (size_t q = 0; q < ny; ++q) {
        double a = (ys[q] - x).norm();
        double A = 0.5 * t_grid[0] * free_density(m, t_grid[0], a).density;
        std::vector<double> pf(nt);
        for (size_t j = 0; j < nt; ++j) {
            pf[j] = free_density(m, t_grid[j], a).density;
            A += w[j] * pf[j];
        }
        double vals[2] = {0, 0}, se0 = 0;
        for (int l = 0; l < nl; ++l) {
            Welford all;
            for (long b = 0; b < nb; ++b) all.merge(acc[(b * nl + l) * ny + q]);
            vals[l] = A - all.mean;
            if (l == 0) se0 = all.std_error();
        }
        Welford tl;
        for (long b = 0; b < nb; ++b) tl.merge(acc_tail[b * ny + q]);
        GreenEstimate g;
        g.lambda = lam;
        g.tail = pf[nt - 1] / lam - tl.mean;
        g.total.raw_value = vals[0];
        g.total.value = std::max(0.0, vals[0]);
        g.total.std_error = se0;
        g.total.paths = kp.n;
        g.total.dt = cfg.dt;
        g.total.refined_value = nl > 1 ? vals[1] : vals[0];
        g.total.bias_flag = nl > 1 && std::abs(vals[1] - vals[0]) > 2.0 * se0;
        out.push_back(g);
    }
    if (fit.r2 < 0.99) {
        throw NumericError("Green tail: decay fit R^2 below 0.99", out.empty() ? 0.0 : out.front().total.value);
    }
    return out;
}

}  // namespace levyhk
