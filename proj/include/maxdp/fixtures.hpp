#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "maxdp/mdp.hpp"

namespace maxdp {

/// Random MDP with Dirichlet-like rows (normalized uniform positives) and
/// rewards uniform in [-1, 1]. Same seed, same MDP.
inline TabularMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("random_mdp: dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);

    std::size_t n = static_cast<std::size_t>(n_states) * n_actions;
    std::vector<double> rewards(n);
    std::vector<std::vector<TransitionEntry>> rows(n);
    std::vector<double> weights(static_cast<std::size_t>(n_states));
    for (std::size_t i = 0; i < n; ++i) {
        rewards[i] = reward_dist(rng);
        double total = 0.0;
        for (int ns = 0; ns < n_states; ++ns) {
            // Bounded away from zero so every row normalizes cleanly.
            weights[static_cast<std::size_t>(ns)] = unit(rng) + 1e-3;
            total += weights[static_cast<std::size_t>(ns)];
        }
        rows[i].reserve(static_cast<std::size_t>(n_states));
        double sum = 0.0;
        for (int ns = 0; ns < n_states - 1; ++ns) {
            double p = weights[static_cast<std::size_t>(ns)] / total;
            rows[i].push_back({ns, p});
            sum += p;
        }
        rows[i].push_back({n_states - 1, 1.0 - sum});
    }
    return TabularMdp(n_states, n_actions, gamma, std::move(rewards), std::move(rows));
}

/// Deterministic left-to-right chain with a self-loop on the last state.
/// One action; rewards[i] is paid for the step taken from state i.
inline TabularMdp chain_mdp(int length, const std::vector<double>& rewards, double gamma) {
    if (length < 1) throw std::invalid_argument("chain_mdp: length must be >= 1");
    if (rewards.size() != static_cast<std::size_t>(length))
        throw std::invalid_argument("chain_mdp: need one reward per state");
    std::vector<double> r(rewards);
    std::vector<std::vector<TransitionEntry>> rows(static_cast<std::size_t>(length));
    for (int s = 0; s < length; ++s)
        rows[static_cast<std::size_t>(s)] = {{std::min(s + 1, length - 1), 1.0}};
    return TabularMdp(length, 1, gamma, std::move(r), std::move(rows));
}

/// Random row-stochastic policy compatible with an n_states x n_actions model.
inline Policy random_stochastic_policy(int n_states, int n_actions, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> probs(static_cast<std::size_t>(n_states) * n_actions);
    for (int s = 0; s < n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            double w = unit(rng) + 1e-3;
            probs[static_cast<std::size_t>(s) * n_actions + a] = w;
            total += w;
        }
        double sum = 0.0;
        for (int a = 0; a < n_actions - 1; ++a) {
            std::size_t i = static_cast<std::size_t>(s) * n_actions + a;
            probs[i] /= total;
            sum += probs[i];
        }
        probs[static_cast<std::size_t>(s) * n_actions + n_actions - 1] = 1.0 - sum;
    }
    return Policy::stochastic(n_states, n_actions, std::move(probs));
}

}  // namespace maxdp
