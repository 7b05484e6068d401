#include "levyhk/harness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "levyhk/errors.hpp"

namespace levyhk {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ConstantFit fit_constant(const std::vector<double>& shape, const std::vector<double>& target) {
    if (shape.size() != target.size()) throw UsageError("fit_constant: length mismatch");
    if (shape.size() < 3) throw UsageError("fit_constant needs at least 3 pairs");
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (!(shape[i] > 0.0) || !(target[i] > 0.0) || !std::isfinite(shape[i]) || !std::isfinite(target[i]))
            throw UsageError("fit_constant needs positive finite values");
        double r = std::log(target[i]) - std::log(shape[i]);
        sum += r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {std::exp(sum / shape.size()), std::exp(hi - lo)};
}

double geometric_spread(const std::vector<double>& v) {
    if (v.empty()) throw UsageError("geometric spread of an empty set");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : v) {
        if (!(x > 0.0)) return std::numeric_limits<double>::infinity();
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi / lo;
}

RateFit fit_rate_one_sided(const std::vector<double>& y, const std::vector<double>& s, const std::vector<double>& z,
                           Side side, bool fit_b) {
    size_t n = y.size();
    if (n < 3 || s.size() != n || z.size() != n) throw UsageError("rate fit needs at least 3 aligned points");
    RateFit f;
    Eigen::VectorXd res(n);
    for (size_t i = 0; i < n; ++i) res(i) = y[i] - s[i];
    if (fit_b) {
        Eigen::MatrixXd A(n, 2);
        for (size_t i = 0; i < n; ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = -z[i];
        }
        Eigen::Vector2d coef = A.colPivHouseholderQr().solve(res);
        f.b = std::max(0.0, coef(1));
    }
    double lc = side == Side::Lower ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        double v = res(i) + f.b * z[i];
        lc = side == Side::Lower ? std::min(lc, v) : std::max(lc, v);
    }
    f.log_c = lc;
    return f;
}

void RatioReport::check(const std::string& name, double value, double limit, bool ok) {
    checks.push_back({name, value, limit, ok});
}

bool RatioReport::pass() const {
    if (unreliable || checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string RatioReport::csv() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << "\n";
    }
    return os.str();
}

SandwichResult run_sandwich(const SandwichInput& in, RatioReport& rep) {
    std::vector<double> yl, sl, zl, su, zu;
    int held = 0, flagged = 0;
    for (auto& p : in.points) {
        if (p.bias_flag) ++flagged;
        if (!p.calibration) {
            ++held;
            continue;
        }
        if (!(p.estimate > 0.0)) continue;
        yl.push_back(std::log(p.estimate));
        sl.push_back(p.log_shape_lower);
        zl.push_back(p.z_lower);
        su.push_back(p.log_shape_upper);
        zu.push_back(p.z_upper);
    }
    if (held < 1 || yl.size() < 3) throw UsageError("sandwich '" + in.id + "' needs >= 3 calibration and >= 1 held-out points");
    SandwichResult out;
    out.lower = fit_rate_one_sided(yl, sl, zl, Side::Lower, in.fit_rates);
    out.upper = fit_rate_one_sided(yl, su, zu, Side::Upper, in.fit_rates);
    out.held_out = held;
    out.flagged_fraction = in.points.empty() ? 0.0 : static_cast<double>(flagged) / in.points.size();
    rep.columns = in.coord_names;
    for (const char* c : {"estimate", "lower", "upper", "est_over_lower", "upper_over_est", "calibration", "bias_flag"})
        rep.columns.push_back(c);
    double spread = 0.0, mn = std::numeric_limits<double>::infinity();
    for (auto& p : in.points) {
        double lower = std::exp(out.lower.log_c + p.log_shape_lower - out.lower.b * p.z_lower);
        double upper = std::exp(out.upper.log_c + p.log_shape_upper - out.upper.b * p.z_upper);
        double rl = p.estimate / lower;
        double ru = p.estimate > 0.0 ? upper / p.estimate : std::numeric_limits<double>::infinity();
        if (!p.calibration) {
            spread = std::max({spread, rl, ru});
            mn = std::min({mn, rl, ru});
        }
        auto row = p.coords;
        for (double v : {p.estimate, lower, upper, rl, ru, p.calibration ? 1.0 : 0.0, p.bias_flag ? 1.0 : 0.0})
            row.push_back(v);
        rep.rows.push_back(row);
    }
    out.spread = spread;
    out.min_ratio = mn;
    rep.grid = in.grid;
    rep.constants.push_back({"lower_log_c", out.lower.log_c});
    rep.constants.push_back({"lower_b", out.lower.b});
    rep.constants.push_back({"upper_log_c", out.upper.log_c});
    rep.constants.push_back({"upper_b", out.upper.b});
    if (out.flagged_fraction > 0.2) {
        rep.unreliable = true;
        rep.note = "bias flag set on more than 20% of points";
    }
    return out;
}

double ConfigSection::num(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) {
        missing_.insert(k);
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw UsageError("[" + name + "] " + k + ": not a number: '" + it->second + "'");
    }
}

long ConfigSection::integer(const std::string& k) const {
    double v = num(k);
    if (std::isnan(v)) return 0;
    if (v != std::floor(v)) throw UsageError("[" + name + "] " + k + ": expected an integer");
    return static_cast<long>(v);
}

std::string ConfigSection::str(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) {
        missing_.insert(k);
        return "";
    }
    return it->second;
}

std::vector<double> ConfigSection::list(const std::string& k) const {
    std::string s = str(k);
    std::vector<double> out;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw UsageError("[" + name + "] " + k + ": bad list entry '" + tok + "'");
        }
    }
    if (out.empty() && has(k)) throw UsageError("[" + name + "] " + k + ": empty list");
    return out;
}

double ConfigSection::num_or(const std::string& k, double dflt) const { return has(k) ? num(k) : dflt; }

void ConfigSection::finish() const {
    if (missing_.empty()) return;
    std::string msg = "[" + name + "] missing config keys:";
    for (auto& k : missing_) msg += " " + k;
    throw UsageError(msg);
}

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config parse_config_text(const std::string& text) {
    Config cfg;
    cfg.global.name = "global";
    ConfigSection* cur = &cfg.global;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError("config line " + std::to_string(lineno) + ": bad section header");
            std::string sec = trim(line.substr(1, line.size() - 2));
            if (sec == "global") {
                cur = &cfg.global;
                continue;
            }
            const std::string pre = "experiment.";
            if (sec.rfind(pre, 0) != 0 || sec.size() == pre.size())
                throw UsageError("config line " + std::to_string(lineno) + ": unknown section '" + sec + "'");
            std::string id = sec.substr(pre.size());
            if (!seen.insert(id).second) throw UsageError("config: duplicate experiment '" + id + "'");
            cfg.experiments.push_back({});
            cfg.experiments.back().name = id;
            cur = &cfg.experiments.back();
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        cur->values[k] = v;
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::uint64_t experiment_seed(std::uint64_t seed, const std::string& id) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return seed ^ h;
}

SuiteSummary run_all(const Config& cfg, const RunContext& ctx, const std::string& only) {
    const auto& reg = experiment_registry();
    std::vector<const ConfigSection*> todo;
    for (auto& sec : cfg.experiments) {
        if (!reg.count(sec.name)) throw UsageError("unknown experiment '" + sec.name + "'");
        if (only.empty() || only == sec.name) todo.push_back(&sec);
    }
    if (!only.empty() && todo.empty()) throw UsageError("experiment '" + only + "' not in the config");
    if (todo.empty()) throw UsageError("config lists no experiments");
    namespace fs = std::filesystem;
    if (!ctx.out_dir.empty()) fs::create_directories(ctx.out_dir);
    SuiteSummary sum;
    for (auto* sec : todo) {
        RunContext c = ctx;
        c.seed = experiment_seed(ctx.seed, sec->name);
        auto t0 = std::chrono::steady_clock::now();
        RatioReport rep;
        try {
            rep = reg.at(sec->name)(*sec, c);
        } catch (const NumericError& e) {
            rep = RatioReport{};
            rep.check("numeric_error", e.partial, 0.0, false);
            rep.note = e.what();
        }
        rep.id = sec->name;
        rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!ctx.out_dir.empty()) {
            std::ofstream(fs::path(ctx.out_dir) / (sec->name + ".csv")) << rep.csv();
        }
        sum.reports.push_back(std::move(rep));
    }
    sum.pass = std::all_of(sum.reports.begin(), sum.reports.end(), [](const RatioReport& r) { return r.pass(); });
    if (!ctx.out_dir.empty()) {
        std::ofstream s(fs::path(ctx.out_dir) / "summary.csv");
        s << "experiment,pass,spread,unreliable,checks_passed,checks_total\n";
        std::ofstream k(fs::path(ctx.out_dir) / "checks.csv");
        k << "experiment,check,value,limit,pass\n";
        std::ofstream tm(fs::path(ctx.out_dir) / "timing.csv");
        tm << "experiment,runtime_s\n";
        for (auto& r : sum.reports) {
            long np = std::count_if(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
            s << r.id << "," << (r.pass() ? 1 : 0) << "," << fmt(r.spread) << "," << (r.unreliable ? 1 : 0) << "," << np
              << "," << r.checks.size() << "\n";
            for (auto& c : r.checks)
                k << r.id << "," << c.name << "," << fmt(c.value) << "," << fmt(c.limit) << "," << (c.pass ? 1 : 0)
                  << "\n";
            tm << r.id << "," << fmt(r.runtime) << "\n";
        }
    }
    return sum;
}

SuiteSummary run_all(const std::string& config_path, const RunContext& ctx, const std::string& only) {
    return run_all(load_config(config_path), ctx, only);
}

}  // namespace levyhk
