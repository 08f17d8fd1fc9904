// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "slidenoise/app/experiments.hpp"
#include "slidenoise/verify/checks.hpp"

using namespace slidenoise;
using verify::CheckResult;
namespace fs = std::filesystem;

namespace {

// same default master seed as the CLI
constexpr std::uint64_t kSeed = 1;

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SLIDENOISE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

montecarlo::SimConfig planar_config(std::uint64_t paths) {
    montecarlo::SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_end = 1.0;
    cfg.n_paths = paths;
    cfg.master_seed = kSeed;
    cfg.threads = worker_count();
    return cfg;
}

const std::vector<std::array<double, 4>> kVarianceRows{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0},
                                                       {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 1, 1, 1}};

// Every experiment is rerun with the same seed at 1 and 4 threads; all CSV files must match byte for byte.
CheckResult check_reproducibility() {
    verify::Stopwatch sw;
    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / fmt::format("slidenoise_acceptance_{}", rd());
    fs::create_directories(dir);
    const fs::path cfg = dir / "repro.toml";
    std::ofstream(cfg) << R"([system]
a_left = 2.0
a_right = 1.0
b_left = 1.0
c_right = 0.5
epsilon = 0.01

[sim]
t_end = 0.05
n_paths = 20000
seed = 11

[moments]
t = 0.05

[variance]
t = 0.05

[relay]
t_end = 30.0
runs = 8
epsilons = [0.0, 1e-4, 1e-3]
dump_runs = true

[output]
dump_paths = true
path_stride = 50
)";
    const std::vector<std::string> subs{"density", "qss", "moments", "variance", "escape", "relay-det", "relay-noise"};
    auto run_set = [&](const std::string& tag, unsigned threads) -> bool {
        for (const auto& s : subs) {
            const auto args = fmt::format("--config {} --threads {} --out {} {}", cfg.string(), threads,
                                          (dir / tag).string(), s);
            if (run_cli(args) != 0) return false;
        }
        return true;
    };
    std::string detail;
    bool ok = run_set("t1a", 1) && run_set("t1b", 1) && run_set("t4a", 4) && run_set("t4b", 4);
    std::size_t files = 0;
    if (ok) {
        for (const auto& e : fs::directory_iterator(dir / "t1a")) {
            const auto name = e.path().filename();
            const std::string ref = slurp(e.path());
            ++files;
            for (const char* other : {"t1b", "t4a", "t4b"}) {
                if (slurp(dir / other / name) != ref) {
                    ok = false;
                    detail += fmt::format("{} differs in run {}; ", name.string(), other);
                }
            }
        }
    } else {
        detail = "a CLI run failed; ";
    }
    ok = ok && files >= subs.size();
    detail += fmt::format("{} CSV files compared across 4 runs (threads 1, 1, 4, 4)", files);
    fs::remove_all(dir);
    return {"reproducibility", ok, detail, sw.seconds()};
}

}  // namespace

int main() {
    std::vector<std::pair<int, std::function<CheckResult()>>> criteria;

    criteria.emplace_back(1, [] { return verify::check_flux_integrals(); });
    criteria.emplace_back(2, [] { return verify::check_q_function_oracle(); });

    // criteria 3 and 5 share one set of ensembles
    std::vector<app::VarianceRow> rows;
    auto variance_rows = [&]() -> const std::vector<app::VarianceRow>& {
        if (rows.empty()) {
            const auto base = make_piecewise_linear({2.0, 1.0, 1.0, 0.0}, 0.01);
            rows = app::run_variance_rows(base, kVarianceRows, planar_config(100000));
        }
        return rows;
    };
    criteria.emplace_back(3, [&] {
        verify::Stopwatch sw;
        auto r = verify::check_variance_rows(variance_rows(), 0.01);
        r.seconds = sw.seconds();
        return r;
    });
    criteria.emplace_back(4, [] {
        verify::Stopwatch sw;
        // dt = 1e-4 leaves a 1% step bias in Var(y) at t = 1
        const auto sys = make_piecewise_linear({1.0, 1.0, 1.0, 0.0}, 0.01);
        auto cfg = planar_config(100000);
        cfg.dt = 2.5e-5;
        auto r = verify::check_symmetric_variance(app::run_symmetric_variance(sys, {0.1, 1.0}, cfg));
        r.seconds = sw.seconds();
        return r;
    });
    criteria.emplace_back(5, [&] {
        verify::Stopwatch sw;
        auto r = verify::check_mean_y(variance_rows());
        r.seconds = sw.seconds();
        return r;
    });
    criteria.emplace_back(6, [] { return verify::check_transition_density(); });
    criteria.emplace_back(7, [] { return verify::check_escape_time(); });

    const auto rs = canonical_relay(-0.06);
    filippov::PeriodicOrbitResult orbit;
    criteria.emplace_back(8, [&] {
        auto c = verify::check_relay_orbit(rs, {0.1, 0.0, 0.0}, 500.0, 1e-9, 1e-10, 1e-12);
        orbit = c.orbit;
        return c.result;
    });
    criteria.emplace_back(9, [&] {
        verify::Stopwatch sw;
        if (orbit.period == 0.0) orbit = filippov::find_periodic_orbit(rs, {0.1, 0.0, 0.0}, 500.0, 1e-9);
        montecarlo::SimConfig cfg;
        cfg.dt = 1e-4;
        cfg.t_end = 100.0;
        cfg.n_paths = 200;
        cfg.master_seed = kSeed;
        cfg.threads = worker_count();
        const std::vector<double> eps{1e-5, 3.1622776601683795e-5, 1e-4, 3.1622776601683795e-4, 1e-3};
        auto r = verify::check_relay_noise(app::run_relay_noise(rs, eps, cfg, orbit.section_point, 50), orbit.period);
        r.seconds = sw.seconds();
        return r;
    });
    criteria.emplace_back(10, [] { return check_reproducibility(); });

    int failed = 0;
    for (const auto& [k, fn] : criteria) {
        CheckResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {"exception", false, e.what(), 0.0};
        }
        failed += !r.passed;
        fmt::print("{} [{}] {}: {} [{:.1f} s]\n", r.passed ? "PASS" : "FAIL", k, r.name, r.detail, r.seconds);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
