// acceptance driver: runs the whole suite twice (1 and 4 workers) and prints one line per criterion
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "levyhk/harness.hpp"

namespace fs = std::filesystem;
using namespace levyhk;

namespace {

const std::vector<std::pair<std::string, std::string>> kCriteria{
    {"cauchy_oracle", "Cauchy oracle"},
    {"normalization", "normalization and semigroup"},
    {"scale_identities", "scale-function identities"},
    {"asym_sandwich", "psi(1/r)/h sandwich"},
    {"asym_lh", "h/L bounds on log models"},
    {"hkeb_sandwich", "free-kernel two-sided sandwich"},
    {"exit_times", "mean exit times"},
    {"survival_boundary", "survival boundary decay"},
    {"main1_sandwich", "small-time Dirichlet sandwich"},
    {"decay_bracket", "decay-rate bracket"},
    {"green_sandwich", "Green function sandwich"},
    {"logp_shapes", "log-type model shapes"},
    {"condition_checkers", "condition checkers"},
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string describe_failures(const RatioReport& r) {
    std::string s;
    for (auto& c : r.checks)
        if (!c.pass) s += " [" + c.name + " = " + fmt(c.value) + " vs " + fmt(c.limit) + "]";
    if (r.unreliable) s += " [unreliable: " + r.note + "]";
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <config> <out_dir>\n";
        return 3;
    }
    const std::string cfg_path = argv[1];
    const fs::path out = argv[2];
    int failed = 0;
    try {
        auto cfg = load_config(cfg_path);
        auto seed = static_cast<std::uint64_t>(cfg.global.integer("seed"));
        fs::remove_all(out);

        auto s1 = run_all(cfg, RunContext{seed, 1, (out / "run1").string()});
        std::map<std::string, const RatioReport*> by_id;
        for (auto& r : s1.reports) by_id[r.id] = &r;

        for (size_t i = 0; i < kCriteria.size(); ++i) {
            const auto& [id, label] = kCriteria[i];
            auto it = by_id.find(id);
            char line[512];
            if (it == by_id.end()) {
                std::snprintf(line, sizeof line, "criterion %2zu %-20s FAIL  not in config", i + 1, id.c_str());
                std::cout << line << "\n";
                ++failed;
                continue;
            }
            const RatioReport& r = *it->second;
            int passed = 0;
            for (auto& c : r.checks) passed += c.pass;
            bool ok = r.pass();
            failed += !ok;
            std::snprintf(line, sizeof line, "criterion %2zu %-20s %s  %s: checks %d/%zu, spread %s, %.1f s",
                          i + 1, id.c_str(), ok ? "PASS" : "FAIL", label.c_str(), passed, r.checks.size(),
                          fmt(r.spread).c_str(), r.runtime);
            std::cout << line << (ok ? "" : describe_failures(r)) << "\n";
            std::cout.flush();
        }

        // determinism: same seed, different worker count
        run_all(cfg, RunContext{seed, 4, (out / "run2").string()});
        std::vector<std::string> files{"summary.csv", "checks.csv"};
        for (auto& r : s1.reports) files.push_back(r.id + ".csv");
        std::vector<std::string> differ;
        for (auto& f : files) {
            auto a = out / "run1" / f, b = out / "run2" / f;
            if (!fs::exists(a) || !fs::exists(b) || slurp(a) != slurp(b)) differ.push_back(f);
        }
        bool ok = differ.empty();
        failed += !ok;
        std::cout << "criterion 14 determinism           " << (ok ? "PASS" : "FAIL") << "  " << files.size()
                  << " report files byte-identical across 1 and 4 workers";
        for (auto& f : differ) std::cout << " [differs: " << f << "]";
        std::cout << "\n";
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << "\n";
        return 2;
    }
    std::cout << (failed ? "ACCEPTANCE FAILED: " + std::to_string(failed) + " criteria" : "ACCEPTANCE PASSED")
              << "\n";
    return failed ? 1 : 0;
}
