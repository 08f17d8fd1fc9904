// slidenoise command-line front end.

#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "slidenoise/app/commands.hpp"
#include "slidenoise/error.hpp"
#include "slidenoise/io/config.hpp"
#include "slidenoise/version.hpp"

using namespace slidenoise;

int main(int argc, char** argv) {
    CLI::App app{"Noisy sliding motion of Filippov systems: densities, moments, variance, relay and escape times"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir = ".";
    bool full_scale = false;
    app.add_option("--config", config_path, "TOML experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides [sim] seed)");
    app.add_option("--threads", threads, "worker threads for Monte Carlo")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--full-scale", full_scale, "use the full sample counts (n_paths_full, runs_full)");

    using Command = std::function<int(const io::ExperimentConfig&, const app::RunOptions&)>;
    std::map<CLI::App*, Command> commands;
    auto add = [&](const char* name, const char* help, Command fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands[sub] = std::move(fn);
        return sub;
    };

    add("density", "transition density slices", app::cmd_density);
    add("qss", "quasi-steady-state density and its expansions", app::cmd_qss);
    add("moments", "qss moments and mean of y against Monte Carlo", app::cmd_moments);
    add("variance", "Var(y) deviation table with confidence intervals", app::cmd_variance);
    add("escape", "exact and asymptotic mean escape times", app::cmd_escape);

    std::optional<double> zeta;
    std::optional<std::int64_t> debounce;
    auto* det = add("relay-det", "deterministic relay orbit", app::cmd_relay_det);
    det->add_option("--zeta", zeta, "plant parameter zeta");
    auto* noisy = add("relay-noise", "noisy relay oscillation-time quartiles", app::cmd_relay_noise);
    noisy->add_option("--zeta", zeta, "plant parameter zeta");
    noisy->add_option("--debounce", debounce, "steps a sign change must persist")->check(CLI::PositiveNumber);

    bool quick = false;
    auto* ver = add("verify", "run the check suite", app::cmd_verify);
    ver->add_flag("--quick", quick, "quadrature checks only");

    CLI11_PARSE(app, argc, argv);

    try {
        io::ExperimentConfig cfg = config_path.empty() ? io::ExperimentConfig{} : io::load_config(config_path);
        if (seed) cfg.sim.seed = *seed;
        if (zeta) cfg.relay.zeta = *zeta;
        if (debounce) cfg.relay.debounce = *debounce;
        cfg.full_scale = full_scale;
        io::validate(cfg);

        app::RunOptions opt;
        opt.out_dir = out_dir;
        opt.threads = threads;
        opt.quick = quick;
        for (const auto& [sub, fn] : commands) {
            if (sub->parsed()) return fn(cfg, opt);
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
