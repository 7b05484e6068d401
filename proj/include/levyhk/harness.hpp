#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace levyhk {

struct ConstantFit {
    double c = 1.0;
    double spread = 1.0;
};

// c = exp(mean(log target - log shape)), spread = exp(max - min residual)
ConstantFit fit_constant(const std::vector<double>& shape, const std::vector<double>& target);

// geometric spread max/min of positive values
double geometric_spread(const std::vector<double>& v);

// one-sided bound  log target >=< log c + log shape - b z  with b >= 0 fitted by least squares
struct RateFit {
    double log_c = 0.0;
    double b = 0.0;
};
enum class Side { Lower, Upper };
RateFit fit_rate_one_sided(const std::vector<double>& log_target, const std::vector<double>& log_shape,
                           const std::vector<double>& z, Side side, bool fit_b = true);

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct RatioReport {
    std::string id;
    std::string grid;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<Check> checks;
    double spread = 0.0;  // headline geometric spread
    double runtime = 0.0; // seconds, kept out of the deterministic files
    bool unreliable = false;
    std::string note;

    void check(const std::string& name, double value, double limit, bool pass);
    // value <= limit
    void check_le(const std::string& name, double value, double limit) { check(name, value, limit, value <= limit); }
    void check_ge(const std::string& name, double value, double limit) { check(name, value, limit, value >= limit); }
    bool pass() const;
    std::string csv() const;
};

// one point of a sandwich experiment
struct SandwichPoint {
    std::vector<double> coords;  // written to the report
    double estimate = 0.0;
    double log_shape_lower = 0.0, log_shape_upper = 0.0;
    double z_lower = 0.0, z_upper = 0.0;  // rate coordinate, e.g. t h(r)
    bool calibration = false;
    bool bias_flag = false;
};

struct SandwichInput {
    std::string id;
    std::string grid;
    std::vector<std::string> coord_names;
    std::vector<SandwichPoint> points;
    double cap = 10.0;
    double slack = 0.0;
    bool fit_rates = true;
};

struct SandwichResult {
    RateFit lower, upper;
    double spread = 0.0;  // max over held-out of est/lower and upper/est
    double min_ratio = 0.0;
    int held_out = 0;
    double flagged_fraction = 0.0;
};

// fits on the calibration points, reports on the rest
SandwichResult run_sandwich(const SandwichInput& in, RatioReport& rep);

// key = value config with [experiment.<id>] sections
class ConfigSection {
public:
    std::string name;
    std::map<std::string, std::string> values;

    bool has(const std::string& k) const { return values.count(k) > 0; }
    double num(const std::string& k) const;
    long integer(const std::string& k) const;
    std::string str(const std::string& k) const;
    std::vector<double> list(const std::string& k) const;
    double num_or(const std::string& k, double dflt) const;
    // throws UsageError listing every key read but absent
    void finish() const;

private:
    mutable std::set<std::string> missing_;
};

struct Config {
    ConfigSection global;
    std::vector<ConfigSection> experiments;  // in file order
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

struct RunContext {
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir;
};

using Experiment = std::function<RatioReport(const ConfigSection&, const RunContext&)>;

const std::map<std::string, Experiment>& experiment_registry();
std::uint64_t experiment_seed(std::uint64_t seed, const std::string& id);

struct SuiteSummary {
    std::vector<RatioReport> reports;
    bool pass = false;
};

// runs every experiment of the config (or only `only`), writes <id>.csv, checks.csv and summary.csv
SuiteSummary run_all(const Config& cfg, const RunContext& ctx, const std::string& only = "");
SuiteSummary run_all(const std::string& config_path, const RunContext& ctx, const std::string& only = "");

// shared number formatting of the reports
std::string fmt(double v);

}  // namespace levyhk
