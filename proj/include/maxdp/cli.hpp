#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxdp/experiments.hpp"
#include "maxdp/fixtures.hpp"
#include "maxdp/gold_mining.hpp"
#include "maxdp/operators.hpp"
#include "maxdp/oracle.hpp"

namespace maxdp {

namespace detail {

inline GridLayout layout_from_spec(const std::string& spec) {
    if (spec == "default") return default_gold_layout();
    std::ifstream in(spec);
    if (!in) throw std::runtime_error("cannot open layout file: " + spec);
    return load_layout(in);
}

inline std::string action_string(const std::vector<int>& actions) {
    const char letters[] = {'U', 'D', 'L', 'R'};
    std::string s;
    for (int a : actions) s += (a >= 0 && a < 4) ? letters[a] : '?';
    return s;
}

/// Deterministic policy file: one action index per line, one line per state.
inline Policy read_policy_file(const std::string& path, int n_states) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    std::vector<int> actions;
    int a;
    while (in >> a) actions.push_back(a);
    if (static_cast<int>(actions.size()) != n_states)
        throw std::runtime_error("policy file: expected one action per state (" +
                                 std::to_string(n_states) + " states)");
    return Policy::deterministic(std::move(actions));
}

}  // namespace detail

/// Entry point behind the `maxdp` binary; takes argv[1:] and streams so it
/// can be exercised in-process. Returns the process exit status.
inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tabular dynamic programming and RL for best-single-reward objectives"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may appear after the subcommand
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Base RNG seed");

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a multi-seed training experiment");
    std::string config_path;
    run_cmd->add_option("config", config_path, "Experiment config file")->required();
    std::string out_dir_override;
    run_cmd->add_option("--out", out_dir_override, "Override the config's out_dir");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Iterate an operator to its fixed point");
    std::string mdp_path;
    solve_cmd->add_option("mdp", mdp_path, "MDP text file")->required();
    std::string operator_name;
    solve_cmd->add_option("--operator", operator_name, "max-eval, max-opt, std-eval or std-opt")
        ->required()
        ->check(CLI::IsMember({"max-eval", "max-opt", "std-eval", "std-opt"}));
    double tol = 1e-10;
    solve_cmd->add_option("--tol", tol, "Convergence tolerance (sup norm)");
    long max_iter = 100000;
    solve_cmd->add_option("--max-iter", max_iter, "Iteration cap");
    std::string policy_path;
    solve_cmd->add_option("--policy", policy_path,
                          "Deterministic policy file for evaluation operators "
                          "(default: uniform random policy)");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Enumerate all trajectories of a layout");
    std::string oracle_layout;
    oracle_cmd->add_option("layout", oracle_layout, "Layout file or `default`")->required();
    int horizon = 0;
    oracle_cmd->add_option("--horizon", horizon, "Steps per episode (default: layout horizon)");
    std::uint64_t budget = std::uint64_t(1) << 26;
    oracle_cmd->add_option("--budget", budget, "Max sequences to enumerate");
    double oracle_gamma = 0.99;
    oracle_cmd->add_option("--gamma", oracle_gamma, "Discount for the max-discounted criterion");

    // markovize
    auto* markov_cmd =
        app.add_subcommand("markovize", "Expand a layout into an exact MDP text file");
    std::string markov_layout;
    markov_cmd->add_option("layout", markov_layout, "Layout file or `default`")->required();
    std::string markov_out;
    markov_cmd->add_option("-o,--output", markov_out, "Output MDP file")->required();
    double markov_gamma = 0.99;
    markov_cmd->add_option("--gamma", markov_gamma, "Discount factor for the MDP");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        out << std::setprecision(17);
        if (*run_cmd) {
            ExperimentConfig config = load_experiment_config(config_path);
            config.seed_base = seed;
            if (!out_dir_override.empty()) config.out_dir = out_dir_override;
            RunSummary summary = run_experiment(config);
            write_experiment_files(config, summary);
            for (const auto& alg : summary.algorithms) {
                const CurvePoint& last = alg.curve.back();
                out << rule_name(alg.rule) << ": final bucket mean_return=" << last.mean_return
                    << " mean_max_reward=" << last.mean_max_reward << '\n';
                for (const auto& sr : alg.seeds)
                    out << "  seed " << sr.seed
                        << ": greedy return=" << sr.final_rollout.cumulative_return
                        << " max_reward=" << sr.final_rollout.max_reward << '\n';
            }
            out << "wrote " << config.out_dir << "/curves.csv and per-algorithm files\n";
        } else if (*solve_cmd) {
            std::ifstream in(mdp_path);
            if (!in) throw std::runtime_error("cannot open mdp file: " + mdp_path);
            TabularMdp mdp = read_mdp(in);
            Policy policy = policy_path.empty()
                                ? Policy::stochastic(
                                      mdp.n_states(), mdp.n_actions(),
                                      std::vector<double>(
                                          static_cast<std::size_t>(mdp.n_states()) *
                                              mdp.n_actions(),
                                          1.0 / mdp.n_actions()))
                                : detail::read_policy_file(policy_path, mdp.n_states());
            OperatorKind kind = operator_name == "max-eval"
                                    ? OperatorKind::max_evaluation(policy)
                                : operator_name == "max-opt" ? OperatorKind::max_optimality()
                                : operator_name == "std-eval"
                                    ? OperatorKind::standard_evaluation(policy)
                                    : OperatorKind::standard_optimality();
            FixedPointResult result = solve_fixed_point(kind, mdp, tol, max_iter);
            out << "iterations = " << result.iterations << '\n';
            out << "residual = " << result.residual << '\n';
            out << "converged = " << (result.converged ? "yes" : "no") << '\n';
            for (int s = 0; s < mdp.n_states(); ++s) {
                out << "Q(" << s << ") =";
                for (int a = 0; a < mdp.n_actions(); ++a) out << ' ' << result.q(s, a);
                out << '\n';
            }
            if (!result.converged) {
                err << "error: did not converge within " << max_iter << " iterations\n";
                return 2;
            }
        } else if (*oracle_cmd) {
            GridLayout layout = detail::layout_from_spec(oracle_layout);
            if (horizon == 0) horizon = layout.horizon;
            GoldMiningEnv env(layout);
            EnumerationOptions opts;
            opts.gamma = oracle_gamma;
            opts.budget = budget;
            TrajectoryStats stats = enumerate_deterministic(env, horizon, opts);
            out << "trajectories_examined = " << stats.trajectories_examined << '\n';
            out << "best_cumulative_return = " << stats.best_cumulative_return << " via "
                << detail::action_string(stats.best_cumulative_actions) << '\n';
            out << "best_max_discounted_reward = " << stats.best_max_discounted_reward << " via "
                << detail::action_string(stats.best_max_discounted_actions) << '\n';
            out << "best_max_raw_reward = " << stats.best_max_raw_reward << " via "
                << detail::action_string(stats.best_max_raw_actions) << '\n';
        } else if (*markov_cmd) {
            GridLayout layout = detail::layout_from_spec(markov_layout);
            TabularMdp mdp = markovize(layout, markov_gamma);
            std::ofstream file(markov_out);
            if (!file) throw std::runtime_error("cannot write mdp file: " + markov_out);
            write_mdp(file, mdp);
            out << "wrote " << markov_out << " (" << mdp.n_states() << " states, "
                << mdp.n_actions() << " actions)\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace maxdp
