#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "levyhk/free_kernel.hpp"
#include "levyhk/geometry.hpp"
#include "levyhk/models.hpp"

namespace levyhk {

using Rng = std::mt19937_64;

struct McConfig {
    long paths = 100000;
    double dt = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    int block_size = 1000;
    int refinement_levels = 1;  // simulate at dt / 2^levels, monitor every level
    int workers = 0;            // 0: hardware concurrency (capped by LEVYHK_THREADS)
};

void validate(const McConfig& cfg);
int effective_workers(const McConfig& cfg);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long paths = 0;
    double dt = 0.0;
    bool bias_flag = false;
    double refined_value = 0.0;  // same statistic one dt-halving finer
    double raw_value = 0.0;      // before clipping at zero
    double clipped_fraction = 0.0;
};

// streaming mean / variance with an order-fixed merge
struct Welford {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x);
    void merge(const Welford& o);
    double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double std_error() const { return n > 0 ? std::sqrt(variance() / n) : 0.0; }
};

// independent stream per block
Rng block_stream(std::uint64_t seed, std::uint64_t block);

double uniform_open(Rng& g);  // (0, 1)
double sample_log_gamma(Rng& g, double log_shape);
// log of a one-sided beta-stable variate with E exp(-l S) = exp(-l^beta)
double sample_log_positive_stable(Rng& g, double beta);

class IncrementSampler {
public:
    IncrementSampler(const LevyModel& m);
    // log of the subordinator increment over a time step
    double log_subordinator(Rng& g, double log_dt) const;
    void increment(Rng& g, double log_dt, Point& dx) const;
    int dim() const { return d_; }

private:
    SamplerDescriptor desc_;
    int d_;
    mutable std::normal_distribution<double> normal_;
};

struct PathSkeleton {
    std::vector<Point> points;  // at multiples of dt, starting with x0
    long exit_index = -1;       // first index outside the domain, -1 if none
    Point last_inside;
};

std::vector<PathSkeleton> simulate_paths(const LevyModel& m, const McConfig& cfg, const Point& x0,
                                         const Domain* domain = nullptr);

// first skeleton exits on every refinement level
struct KilledPaths {
    long n = 0;
    int levels = 1;             // levels + 1 monitored grids, level 0 is dt
    std::vector<double> step;   // step size per level
    std::vector<std::vector<std::int64_t>> exit_step;  // -1: alive at the horizon
    std::vector<std::vector<Point>> exit_point;
    double horizon = 0.0;
};

KilledPaths run_killed(const LevyModel& m, const Domain& dom, const Point& x0, const McConfig& cfg,
                       double horizon, bool keep_points);

struct SurvivalCurve {
    std::string domain;
    Point x;
    std::vector<double> times;
    std::vector<McEstimate> estimates;
};

SurvivalCurve survival_probability(const LevyModel& m, const Domain& dom, const Point& x,
                                   const std::vector<double>& times, const McConfig& cfg);

McEstimate mean_exit_time(const LevyModel& m, const Domain& dom, const Point& x, const McConfig& cfg);

struct DirichletQuery {
    double t;
    Point y;
};

struct DirichletOptions {
    double clip_scale = 0.1;
    int table_per_decade = 24;
};

std::vector<McEstimate> dirichlet_kernel_batch(const LevyModel& m, const Domain& dom, const Point& x,
                                               const std::vector<DirichletQuery>& queries, const McConfig& cfg,
                                               const DirichletOptions& opt = {});

McEstimate dirichlet_kernel(const LevyModel& m, const Domain& dom, double t, const Point& x, const Point& y,
                            const McConfig& cfg);

struct LargeTimeReport {
    std::string domain;
    double lambda = 0.0;
    double lambda_std_error = 0.0;
    double lambda_refined = 0.0;
    bool bias_flag = false;
    double t_lo = 0.0, t_hi = 0.0;
    double h_r2 = 0.0, h_r1_half = 0.0;
    double onset = 0.0;
    double r_squared = 0.0;
};

LargeTimeReport decay_rate(const LevyModel& m, const Domain& dom, const McConfig& cfg);

struct GreenEstimate {
    McEstimate total;
    double tail = 0.0;
    double lambda = 0.0;
};

// trapezoid of the Dirichlet kernel over t_grid plus an exponential tail past its end
std::vector<GreenEstimate> green_function(const LevyModel& m, const Domain& dom, const Point& x,
                                          const std::vector<Point>& ys, const McConfig& cfg,
                                          const std::vector<double>& t_grid);

// cached kernel table shared by estimators
std::shared_ptr<const KernelTable> shared_kernel_table(const LevyModel& m, double s_min, double s_max, double r_min,
                                                       double r_max, int per_decade);

}  // namespace levyhk
