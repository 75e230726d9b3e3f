// bessellab command-line runner.
//
//   bessellab run <experiment> [flags]   run one experiment, write artifacts
//   bessellab list                       list experiments with defaults
//   bessellab dump-paths [flags]         simulate a batch, write a path dump
//
// Exit status: 0 = all checks passed; 1 = usage or configuration error;
// 2 = the experiment ran but a statistical check failed; 3 = numeric failure
// inside a run. Identical invocations produce byte-identical artifacts.
//
// SPDX-License-Identifier: MIT

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bessellab/experiments.hpp"
#include "bessellab/report_io.hpp"

namespace {

struct FlagValues {
    double mu = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t steps = 0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    double eps = 0.0;
    std::uint64_t workers = 0;
    bool as_printed = false;
    std::string out;
    std::string config_file;
};

// The shared numeric/output flag set; every subcommand that simulates takes
// the same names so config files apply uniformly.
void add_common_flags(CLI::App* cmd, FlagValues& v) {
    cmd->add_option("--mu", v.mu, "index in (0,1); dimension is 2(1-mu)");
    cmd->add_option("--paths", v.paths, "number of simulated paths");
    cmd->add_option("--steps", v.steps, "grid or walk steps per path");
    cmd->add_option("--horizon", v.horizon, "time horizon T");
    cmd->add_option("--seed", v.seed, "base seed for all random streams");
    cmd->add_option("--eps", v.eps, "occupation-estimator band half-width");
    cmd->add_option("--workers", v.workers,
                    "worker threads (never affects the numbers)");
    cmd->add_option("--out", v.out, "output directory (run) or file (dump-paths)");
    cmd->add_option("--config", v.config_file, "flat key=value configuration file");
    cmd->add_flag("--as-printed", v.as_printed,
                  "evaluate the alternative printed decomposition weights");
}

// Config file first, explicit flags second (flag wins).
void resolve_config(const CLI::App* cmd, const FlagValues& v,
                    bessellab::ExperimentConfig& cfg, std::string& out_location) {
    if (!v.config_file.empty()) {
        for (const auto& entry : bessellab::load_config_file(v.config_file)) {
            bessellab::apply_config_entry(cfg, &out_location, entry);
        }
    }
    if (cmd->count("--mu")) cfg.mu = v.mu;
    if (cmd->count("--paths")) cfg.n_paths = static_cast<std::size_t>(v.paths);
    if (cmd->count("--steps")) cfg.n_steps = static_cast<std::size_t>(v.steps);
    if (cmd->count("--horizon")) cfg.horizon = v.horizon;
    if (cmd->count("--seed")) cfg.seed = v.seed;
    if (cmd->count("--eps")) cfg.epsilon = v.eps;
    if (cmd->count("--workers")) cfg.workers = static_cast<std::size_t>(v.workers);
    if (cmd->count("--as-printed")) cfg.as_printed = v.as_printed;
    if (cmd->count("--out")) out_location = v.out;

    if (!(cfg.mu > 0.0 && cfg.mu < 1.0)) {
        throw std::invalid_argument("mu must lie strictly between 0 and 1");
    }
    if (cfg.n_paths == 0) throw std::invalid_argument("paths must be positive");
    if (cfg.n_steps == 0) throw std::invalid_argument("steps must be positive");
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("eps must be positive");
    if (cfg.workers == 0) cfg.workers = 1;
}

void print_report_line(const bessellab::StatReport& rep) {
    std::printf("%s %-32s", rep.pass ? "PASS" : "FAIL", rep.experiment_id.c_str());
    if (rep.ks_distance.has_value()) {
        std::printf(" distance=%.6g threshold=%.6g", *rep.ks_distance,
                    rep.ks_threshold.value_or(0.0));
    } else {
        std::printf(" estimate=%.6g target=%.6g se=%.6g", rep.estimate, rep.target,
                    rep.std_error);
    }
    std::printf(" n=%zu\n", rep.n_samples);
}

int cmd_run(const CLI::App* cmd, const FlagValues& v, const std::string& id) {
    const bessellab::ExperimentInfo* info = bessellab::find_experiment(id);
    if (info == nullptr) {
        std::string known;
        for (const auto& e : bessellab::experiment_registry()) {
            known += known.empty() ? e.id : ", " + e.id;
        }
        std::fprintf(stderr, "unknown experiment '%s'; valid ids: %s\n", id.c_str(),
                     known.c_str());
        return 1;
    }

    bessellab::ExperimentConfig cfg = info->defaults;
    std::string out_dir = ".";
    try {
        resolve_config(cmd, v, cfg, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    }

    bessellab::ExperimentResult res;
    try {
        res = bessellab::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric failure in experiment '%s': %s\n", id.c_str(),
                     e.what());
        return 3;
    }

    try {
        std::filesystem::create_directories(out_dir);
        const std::string base = out_dir + "/" + id;
        bessellab::write_text_file(base + ".json", bessellab::result_to_json_text(res));
        for (const auto& h : res.histograms) {
            bessellab::write_text_file(base + "-" + h.name + ".csv",
                                       bessellab::histogram_to_csv(h));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot write artifacts: %s\n", e.what());
        return 1;
    }

    for (const auto& rep : res.reports) print_report_line(rep);
    std::printf("%s %s (mu=%g, %zu checks) -> %s/%s.json\n",
                res.pass ? "RESULT PASS" : "RESULT FAIL", id.c_str(), cfg.mu,
                res.reports.size(), out_dir.c_str(), id.c_str());
    return res.pass ? 0 : 2;
}

int cmd_list() {
    for (const auto& info : bessellab::experiment_registry()) {
        std::printf("%-24s %s\n", info.id.c_str(), info.anchor.c_str());
        std::printf("%-24s   defaults: mu=%g paths=%zu steps=%zu horizon=%g eps=%g\n",
                    "", info.defaults.mu, info.defaults.n_paths, info.defaults.n_steps,
                    info.defaults.horizon, info.defaults.epsilon);
    }
    return 0;
}

int cmd_dump_paths(const CLI::App* cmd, const FlagValues& v,
                   const std::string& construction) {
    bessellab::ExperimentConfig cfg;
    cfg.experiment_id = "dump-paths";
    cfg.n_paths = 4;
    cfg.n_steps = 1000;
    std::string out_file = "paths.txt";
    try {
        resolve_config(cmd, v, cfg, out_file);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    }

    const auto params = bessellab::BesselParams::from_mu(cfg.mu);
    std::vector<bessellab::PathGrid> paths(cfg.n_paths);
    try {
        if (construction == "direct") {
            bessellab::SimConfig sim;
            sim.n_steps = cfg.n_steps;
            sim.horizon = cfg.horizon;
            sim.seed = cfg.seed;
            sim.epsilon = cfg.epsilon;
            for (std::size_t i = 0; i < cfg.n_paths; ++i) {
                bessellab::simulate_direct_into(params, sim, i, paths[i]);
            }
        } else {
            // Walk-clock budget sized for the requested real-time horizon.
            bessellab::SimConfig sim;
            sim.n_steps = cfg.n_steps;
            sim.horizon = bessellab::time_change_clock_budget(cfg.mu, cfg.horizon);
            sim.seed = cfg.seed;
            sim.epsilon = cfg.epsilon;
            for (std::size_t i = 0; i < cfg.n_paths; ++i) {
                bessellab::simulate_time_change_into(params, sim, cfg.horizon,
                                                     cfg.n_steps, i, paths[i]);
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric failure while dumping paths: %s\n", e.what());
        return 3;
    }

    try {
        const std::string text = bessellab::paths_to_dump(paths, cfg.seed);
        bessellab::write_text_file(out_file, text);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot write dump: %s\n", e.what());
        return 1;
    }
    std::printf("wrote %zu %s paths to %s\n", cfg.n_paths, construction.c_str(),
                out_file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bessellab: zero-set identities of Bessel processes, simulated "
                 "and checked against their closed forms"};
    app.require_subcommand(1);

    FlagValues run_flags;
    std::string run_id;
    CLI::App* run = app.add_subcommand("run", "run one experiment, write artifacts");
    run->add_option("experiment", run_id, "experiment id (see `list`)")->required();
    add_common_flags(run, run_flags);

    app.add_subcommand("list", "list experiments with anchors and defaults");

    FlagValues dump_flags;
    std::string construction = "direct";
    CLI::App* dump =
        app.add_subcommand("dump-paths", "simulate a batch, write a columnar dump");
    dump->add_option("--construction", construction, "direct or time-change")
        ->check(CLI::IsMember({"direct", "time-change"}));
    add_common_flags(dump, dump_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean; any parse error is usage
    }

    if (run->parsed()) return cmd_run(run, run_flags, run_id);
    if (dump->parsed()) return cmd_dump_paths(dump, dump_flags, construction);
    return cmd_list();
}
