#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maxdp/env.hpp"
#include "maxdp/mdp.hpp"

namespace maxdp {

/// Exact optima over all fixed-length action sequences of a deterministic
/// environment, one optimum per criterion.
struct TrajectoryStats {
    double best_cumulative_return = -std::numeric_limits<double>::infinity();
    double best_max_discounted_reward = -std::numeric_limits<double>::infinity();
    double best_max_raw_reward = -std::numeric_limits<double>::infinity();
    std::vector<int> best_cumulative_actions;
    std::vector<int> best_max_discounted_actions;
    std::vector<int> best_max_raw_actions;
    std::uint64_t trajectories_examined = 0;
};

struct EnumerationOptions {
    double gamma = 0.99;
    std::uint64_t budget = std::uint64_t(1) << 26;
    /// When set, only trajectories whose observation sequence passes the
    /// filter count toward the optima.
    std::function<bool(const std::vector<int>&)> visit_filter;
};

namespace detail {

template <Environment Env>
void enumerate_rec(const Env& env, int depth, int horizon, const EnumerationOptions& opts,
                   std::vector<int>& actions, std::vector<int>& observations,
                   double cumulative, double max_discounted, double max_raw, double discount,
                   TrajectoryStats& stats) {
    if (depth == horizon) {
        ++stats.trajectories_examined;
        if (opts.visit_filter && !opts.visit_filter(observations)) return;
        if (cumulative > stats.best_cumulative_return) {
            stats.best_cumulative_return = cumulative;
            stats.best_cumulative_actions = actions;
        }
        if (max_discounted > stats.best_max_discounted_reward) {
            stats.best_max_discounted_reward = max_discounted;
            stats.best_max_discounted_actions = actions;
        }
        if (max_raw > stats.best_max_raw_reward) {
            stats.best_max_raw_reward = max_raw;
            stats.best_max_raw_actions = actions;
        }
        return;
    }
    for (int a = 0; a < env.action_count(); ++a) {
        Env child = env;
        StepOutcome outcome = child.step(a);
        actions.push_back(a);
        observations.push_back(outcome.observation);
        enumerate_rec(child, depth + 1, horizon, opts, actions, observations,
                      cumulative + outcome.reward,
                      std::max(max_discounted, discount * outcome.reward),
                      std::max(max_raw, outcome.reward), discount * opts.gamma, stats);
        actions.pop_back();
        observations.pop_back();
    }
}

}  // namespace detail

/// Depth-first search over all action_count^horizon sequences.
/// The horizon counts action selections; rewards are indexed from t = 0.
template <Environment Env>
TrajectoryStats enumerate_deterministic(Env env, int horizon,
                                        const EnumerationOptions& opts = {}) {
    if (horizon < 1) throw std::invalid_argument("enumerate_deterministic: horizon must be >= 1");
    env.reset();
    int n_actions = env.action_count();
    long double sequences = 1.0L;
    for (int i = 0; i < horizon; ++i) sequences *= n_actions;
    if (sequences > static_cast<long double>(opts.budget))
        throw std::runtime_error(
            "enumerate_deterministic: action_count^horizon exceeds the enumeration budget; "
            "reduce the horizon or raise the budget");

    TrajectoryStats stats;
    std::vector<int> actions, observations;
    actions.reserve(static_cast<std::size_t>(horizon));
    observations.reserve(static_cast<std::size_t>(horizon));
    detail::enumerate_rec(env, 0, horizon, opts, actions, observations, 0.0,
                          -std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity(), 1.0, stats);
    return stats;
}

/// Replays an action sequence and reports (cumulative, max discounted, max raw).
template <Environment Env>
std::vector<double> replay(Env env, const std::vector<int>& actions, double gamma = 0.99) {
    env.reset();
    double cumulative = 0.0;
    double max_disc = -std::numeric_limits<double>::infinity();
    double max_raw = -std::numeric_limits<double>::infinity();
    double discount = 1.0;
    for (int a : actions) {
        StepOutcome outcome = env.step(a);
        cumulative += outcome.reward;
        max_disc = std::max(max_disc, discount * outcome.reward);
        max_raw = std::max(max_raw, outcome.reward);
        discount *= gamma;
    }
    return {cumulative, max_disc, max_raw};
}

/// Finite-horizon value tables for the best-single-discounted-reward
/// criterion: Q_1 = r and Q_{k+1} = max(r, gamma * E[max_a' Q_k]), the
/// horizon-truncated optimality backup (past the horizon the continuation
/// counts as -infinity, so the last level is the reward table itself).
/// Returned levels are indexed [0] = Q_1 ... [horizon-1] = Q_horizon.
inline std::vector<QTable> backward_induction_max(const TabularMdp& mdp, int horizon) {
    if (horizon < 1) throw std::invalid_argument("backward_induction_max: horizon must be >= 1");

    std::vector<QTable> levels;
    levels.reserve(static_cast<std::size_t>(horizon));

    QTable q(mdp.n_states(), mdp.n_actions());
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(); ++a) q.at(s, a) = mdp.reward(s, a);
    levels.push_back(q);

    std::vector<double> state_max(static_cast<std::size_t>(mdp.n_states()));
    for (int k = 1; k < horizon; ++k) {
        const QTable& prev = levels.back();
        for (int s = 0; s < mdp.n_states(); ++s)
            state_max[static_cast<std::size_t>(s)] = prev.max_over_actions(s);
        QTable next(mdp.n_states(), mdp.n_actions());
        for (int s = 0; s < mdp.n_states(); ++s) {
            for (int a = 0; a < mdp.n_actions(); ++a) {
                double expect = 0.0;
                for (const auto& e : mdp.row(s, a))
                    expect += e.prob * state_max[static_cast<std::size_t>(e.next_state)];
                next.at(s, a) = std::max(mdp.reward(s, a), mdp.gamma() * expect);
            }
        }
        levels.push_back(std::move(next));
    }
    return levels;
}

namespace detail {

inline double expected_max_rec(const TabularMdp& mdp, const Policy& policy, int state,
                               int steps_left, double running_max, double discount,
                               std::uint64_t& visited, std::uint64_t budget) {
    if (steps_left == 0) return running_max;
    if (++visited > budget)
        throw std::runtime_error("policy_expected_max: enumeration exceeds the budget");
    double value = 0.0;
    for (int a = 0; a < mdp.n_actions(); ++a) {
        double pa = policy.action_prob(state, a);
        if (pa == 0.0) continue;
        double m = std::max(running_max, discount * mdp.reward(state, a));
        for (const auto& e : mdp.row(state, a)) {
            value += pa * e.prob *
                     expected_max_rec(mdp, policy, e.next_state, steps_left - 1, m,
                                      discount * mdp.gamma(), visited, budget);
        }
    }
    return value;
}

}  // namespace detail

/// Exact E[max_t gamma^t r_t] under the policy, by enumerating every
/// (state, action) path with its probability up to the horizon.
inline double policy_expected_max(const TabularMdp& mdp, const Policy& policy, int horizon,
                                  int start, std::uint64_t budget = std::uint64_t(1) << 26) {
    if (horizon < 1) throw std::invalid_argument("policy_expected_max: horizon must be >= 1");
    if (start < 0 || start >= mdp.n_states())
        throw std::out_of_range("policy_expected_max: start state out of range");
    if (!policy.compatible(mdp.n_states(), mdp.n_actions()))
        throw std::invalid_argument("policy_expected_max: policy incompatible with MDP");
    std::uint64_t visited = 0;
    return detail::expected_max_rec(mdp, policy, start, horizon,
                                    -std::numeric_limits<double>::infinity(), 1.0, visited,
                                    budget);
}

}  // namespace maxdp
