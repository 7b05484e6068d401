#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "levyhk/scalekit.hpp"

namespace levyhk {

struct ConditionFlags {
    bool A = false, B = false, C = false, D = false;
    bool S1 = false, S2 = false, L1 = false, L2 = false;
};

std::string describe(const ConditionFlags& f);

// classification of p(t, 0) by the growth of Phi against log
enum class OnDiagonal { FiniteAll, DivergentAll, Mixed };

std::string to_string(OnDiagonal c);

struct SubordinatorStage {
    enum class Kind { Gamma, Stable } kind = Kind::Gamma;
    double beta = 1.0;  // stable index of a Stable stage
};

struct SamplerDescriptor {
    enum class Kind { SubordinateBrownian, DirectStable } kind = Kind::SubordinateBrownian;
    std::vector<SubordinatorStage> chain;  // outermost first: time enters chain[0]
};

// phi(lambda) of the chain, i.e. chain[0] o chain[1] o ...
double laplace_exponent(const SamplerDescriptor& s, double lambda);

struct LevyModel {
    std::string name;
    std::string family;
    int d = 1;
    std::map<std::string, double> params;
    std::function<double(double)> nu;
    std::function<double(double)> psi;
    WeightFunction weight;
    double kappa1 = 1.0, kappa2 = 1.0;
    ConditionFlags flags;
    OnDiagonal ondiag = OnDiagonal::FiniteAll;
    // lim psi(u) / log u, used for the divergence threshold of the mixed class
    double psi_log_rate = 0.0;
    std::optional<SamplerDescriptor> sampler;
};

LevyModel make_geometric_stable(int d, double alpha);
LevyModel make_iterated_geometric_stable(int d, double alpha, int iterations);
LevyModel make_logp_model(int d, double p, double beta);
LevyModel make_stable(int d, double alpha);

// stable radial density constant: nu(r) = C r^{-d-alpha}
double stable_nu_constant(int d, double alpha);

// radial Levy-Khintchine integral of nu; throws NumericError when the series stalls
double psi_from_nu(const LevyModel& m, double u);
double psi_from_nu(int d, const std::function<double(double)>& nu, double u);

// min / max of nu(r) r^d / l(1/r) over r in [1e-6, 1e3], 32 points per decade
std::pair<double, double> fit_kappas(const LevyModel& m);

// -nu'(r)/r nonincreasing up to slack; constant field holds the fitted c0
ScalingCheckResult check_condition_B(const LevyModel& m, const std::vector<double>& grid = {}, double slack = 1e-3);

// divergence threshold t*: p(t,0) = inf iff t <= t* (mixed class); 0 / inf for the other classes
double divergence_threshold(const LevyModel& m);
bool ondiag_divergent(const LevyModel& m, double t);

// numeric classifier from Phi(r)/log(1+r) between 1e8 and 1e32
OnDiagonal classify_on_diagonal(const ScaleKit& kit);

// catalog registry
std::vector<std::string> catalog_names();
const LevyModel& catalog_model(const std::string& name);
const ScaleKit& catalog_kit(const std::string& name);

}  // namespace levyhk
