// SPDX-License-Identifier: Apache-2.0
#include "slipt/bench.hpp"
#include "slipt/channel.hpp"
#include "slipt/errors.hpp"
#include "slipt/scenario.hpp"
#include "slipt/schemes.hpp"
#include "slipt/solver.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string config;
    std::string out;
    bool strict = false;
    slipt::SolverOptions solver;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config,
                    "scenario JSON file (default: the built-in reference setup)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", args.out, "output file (default: stdout)");
    cmd->add_flag("--strict", args.strict, "exit nonzero when any solve fails to converge");
    cmd->add_option("--tol", args.solver.convergence_tol, "outer-loop settling tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--rho", args.solver.penalty_rho, "initial rank-one penalty (negative)");
    cmd->add_option("--growth", args.solver.penalty_growth, "penalty growth factor");
    cmd->add_option("--rounds", args.solver.max_penalty_rounds, "penalty growth rounds");
    cmd->add_option("--max-iters", args.solver.max_iters, "outer iteration cap");
    cmd->add_option("--theta-min", args.solver.theta_min, "smallest admissible time split");
    cmd->add_option("--rank-tol", args.solver.rank_tol, "relative rank-one residual accepted");
    cmd->add_option("--seed", args.solver.seed, "random seed (kept for reproducibility records)");
}

slipt::Scenario load_or_default(const std::string& config) {
    if (config.empty()) return slipt::reference_sweep_scenario();
    return slipt::load_scenario(config);
}

void write_output(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out);
    if (!file) throw slipt::SolveError("cannot open " + out);
    file << text;
    if (!file.good()) throw slipt::SolveError("write failed on " + out);
}

json solution_to_json(const slipt::Solution& sol, bool with_trace) {
    json j;
    j["scheme"] = slipt::to_string(sol.scheme);
    j["status"] = slipt::to_string(sol.outcome);
    j["mmf_rate"] = sol.mmf_value;
    j["theta"] = sol.allocation.theta;
    j["iterations"] = sol.trace.size();
    j["penalty_residual"] = sol.penalty_residual;
    const Eigen::VectorXd totals = sol.allocation.totals();
    j["per_user_rate"] = std::vector<double>(totals.data(), totals.data() + totals.size());
    j["common_shares"] = std::vector<double>(
        sol.allocation.common_shares.data(),
        sol.allocation.common_shares.data() + sol.allocation.common_shares.size());
    j["ts_harvest"] =
        std::vector<double>(sol.ts_harvest.data(), sol.ts_harvest.data() + sol.ts_harvest.size());
    j["energy_satisfied"] = sol.energy_satisfied;
    j["constraints_satisfied"] = sol.validation.all_satisfied();
    if (!sol.message.empty()) j["message"] = sol.message;
    if (with_trace) {
        json trace = json::array();
        for (const slipt::IterationRecord& r : sol.trace)
            trace.push_back({{"iteration", r.iteration},
                             {"t", r.t},
                             {"penalized", r.penalized},
                             {"rho", r.rho},
                             {"residual", r.residual},
                             {"theta", r.theta},
                             {"newton_steps", r.newton_steps}});
        j["trace"] = trace;
    }
    return j;
}

int run_solve(const CommonArgs& args, const std::string& scheme_name,
              const std::vector<int>& noma_order, bool with_trace) {
    slipt::SchemeConfig cfg;
    cfg.kind = slipt::parse_scheme(scheme_name);
    cfg.noma_order = noma_order;
    const slipt::Scenario s = load_or_default(args.config);
    const slipt::Solution sol = slipt::solve_mmf(s, cfg, args.solver);
    write_output(args.out, solution_to_json(sol, with_trace).dump(2) + "\n");
    if (args.strict && sol.outcome != slipt::SolveOutcome::converged) return 1;
    return 0;
}

int run_sweep_cmd(const CommonArgs& args, const std::string& axis_name,
                  const std::vector<double>& grid, const std::vector<std::string>& scheme_names,
                  int jobs) {
    slipt::SweepSpec spec;
    spec.axis = slipt::parse_axis(axis_name);
    spec.base = load_or_default(args.config);
    spec.grid = grid.empty() ? slipt::default_grid(spec.axis, spec.base) : grid;
    if (!scheme_names.empty()) {
        spec.schemes.clear();
        for (const std::string& name : scheme_names)
            spec.schemes.push_back({slipt::parse_scheme(name), {}});
    }
    spec.solver = args.solver;
    spec.jobs = jobs;
    const slipt::SweepResult result = slipt::run_sweep(spec);
    write_output(args.out, slipt::sweep_to_csv(result));
    if (!args.strict) return 0;
    for (const slipt::SweepCell& c : result.cells) {
        // Grid points the scenario itself rules out are recorded states, not
        // solver failures.
        if (c.status == "infeasible" || c.status == "degenerate") continue;
        if (c.status != "converged") {
            std::fprintf(stderr, "sweep point %s/%g failed: %s\n",
                         slipt::to_string(c.scheme).c_str(), c.axis_value, c.status.c_str());
            return 1;
        }
    }
    return 0;
}

int run_oracle(const CommonArgs& args, const std::string& scheme_name, int resolution, int leds,
               int users) {
    slipt::SchemeConfig cfg;
    cfg.kind = slipt::parse_scheme(scheme_name);
    const slipt::Scenario s =
        args.config.empty() ? slipt::small_scenario(leds, users) : slipt::load_scenario(args.config);
    const double bound = slipt::oracle_grid(s, cfg, resolution);
    const slipt::Solution sol = slipt::solve_mmf(s, cfg, args.solver);
    json j;
    j["scheme"] = slipt::to_string(cfg.kind);
    j["resolution"] = resolution;
    j["leds"] = s.n_leds();
    j["users"] = s.n_users();
    j["oracle_bound"] = bound;
    j["solver_mmf"] = sol.mmf_value;
    j["solver_status"] = slipt::to_string(sol.outcome);
    j["margin"] = sol.mmf_value - bound;
    write_output(args.out, j.dump(2) + "\n");
    if (args.strict &&
        (sol.outcome != slipt::SolveOutcome::converged || sol.mmf_value < bound - 1e-3))
        return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"max-min-fair SLIPT beamforming: solver, sweeps, and oracle checks"};
    app.require_subcommand(1);

    CommonArgs solve_args;
    std::string solve_scheme = "rsma";
    std::vector<int> solve_order;
    bool solve_trace = false;
    CLI::App* solve = app.add_subcommand("solve", "solve one scenario and print JSON");
    add_common(solve, solve_args);
    solve->add_option("-s,--scheme", solve_scheme, "rsma | sdma | noma");
    solve->add_option("--noma-order", solve_order, "explicit decoding order (user indices)");
    solve->add_flag("--trace", solve_trace, "include the outer-iteration trace");

    CommonArgs sweep_args;
    std::string sweep_axis = "eth";
    std::vector<double> sweep_grid;
    std::vector<std::string> sweep_schemes;
    int sweep_jobs = 0;
    CLI::App* sweep = app.add_subcommand("sweep", "sweep an axis and emit CSV");
    add_common(sweep, sweep_args);
    sweep->add_option("-a,--axis", sweep_axis, "eth | snr | po");
    sweep->add_option("-g,--grid", sweep_grid, "axis values (default: built-in grid)");
    sweep->add_option("-S,--schemes", sweep_schemes, "schemes to compare (default: all three)");
    sweep->add_option("-j,--jobs", sweep_jobs, "worker threads (0 = bounded default)");

    CommonArgs oracle_args;
    std::string oracle_scheme = "rsma";
    int oracle_resolution = 9;
    int oracle_leds = 4;
    int oracle_users = 2;
    CLI::App* oracle =
        app.add_subcommand("oracle", "compare the solver against the brute-force bound");
    add_common(oracle, oracle_args);
    oracle->add_option("-s,--scheme", oracle_scheme, "rsma | sdma | noma");
    oracle->add_option("-r,--resolution", oracle_resolution, "grid points per dimension")
        ->check(CLI::Range(2, 64));
    oracle->add_option("--leds", oracle_leds, "built-in instance luminaire count");
    oracle->add_option("--users", oracle_users, "built-in instance user count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(solve_args, solve_scheme, solve_order, solve_trace);
        if (sweep->parsed())
            return run_sweep_cmd(sweep_args, sweep_axis, sweep_grid, sweep_schemes, sweep_jobs);
        if (oracle->parsed())
            return run_oracle(oracle_args, oracle_scheme, oracle_resolution, oracle_leds,
                              oracle_users);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }
    return 0;
}
