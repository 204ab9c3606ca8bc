#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "maxdp/env.hpp"
#include "maxdp/mdp.hpp"

namespace maxdp {

/// Per-episode value of a learning or exploration rate.
class Schedule {
public:
    enum class Kind { Constant, LinearDecay };

    static Schedule constant(double value) {
        Schedule s;
        s.kind_ = Kind::Constant;
        s.start_ = s.end_ = value;
        s.validate();
        return s;
    }

    /// Linear from start to end over `over_episodes`; flat at end afterwards.
    static Schedule linear_decay(double start, double end, long over_episodes) {
        Schedule s;
        s.kind_ = Kind::LinearDecay;
        s.start_ = start;
        s.end_ = end;
        s.over_ = over_episodes;
        s.validate();
        return s;
    }

    double value(long episode) const {
        if (kind_ == Kind::Constant) return start_;
        double t = std::min(1.0, static_cast<double>(episode) / static_cast<double>(over_));
        return start_ + (end_ - start_) * t;
    }

    Kind kind() const { return kind_; }

private:
    Schedule() = default;

    void validate() const {
        if (!(start_ >= 0.0 && start_ <= 1.0 && end_ >= 0.0 && end_ <= 1.0))
            throw std::invalid_argument("Schedule: values must lie in [0, 1]");
        if (kind_ == Kind::LinearDecay && over_ < 1)
            throw std::invalid_argument("Schedule: over_episodes must be >= 1");
    }

    Kind kind_ = Kind::Constant;
    double start_ = 0.0;
    double end_ = 0.0;
    long over_ = 1;
};

enum class UpdateRule { QLearning, MaxQ };

struct LearnerConfig {
    UpdateRule rule = UpdateRule::QLearning;
    double alpha = 0.001;
    double gamma = 0.99;
    Schedule epsilon_schedule = Schedule::constant(0.0);
    long episodes = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("LearnerConfig: alpha must lie in (0, 1]");
        if (!(gamma >= 0.0 && gamma < 1.0))
            throw std::invalid_argument("LearnerConfig: gamma must lie in [0, 1)");
        if (episodes < 1) throw std::invalid_argument("LearnerConfig: episodes must be >= 1");
    }
};

struct EpisodeLog {
    double cumulative_return = 0.0;
    double max_reward = 0.0;
    int steps = 0;

    friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

// --- one-step TD targets ---

inline double q_learning_target(double r, double gamma, double max_next, bool terminal) {
    return terminal ? r : r + gamma * max_next;
}

inline double max_q_target(double r, double gamma, double max_next, bool terminal) {
    return terminal ? r : std::max(r, gamma * max_next);
}

/// Max-form TD target with the clipped pair of target critics: the bootstrap
/// uses the smaller critic value, the outer max keeps the immediate reward as
/// a floor. Pure function, usable by any function-approximation stack.
inline double max_bellman_td_target(double r, double gamma, std::pair<double, double> critics,
                                    bool terminal) {
    if (terminal) return r;
    return std::max(r, gamma * std::min(critics.first, critics.second));
}

namespace detail {

inline void check_transition_indices(const QTable& q, int s, int a, int s_next) {
    if (s < 0 || s >= q.n_states() || s_next < 0 || s_next >= q.n_states())
        throw std::out_of_range("update: state index out of range");
    if (a < 0 || a >= q.n_actions())
        throw std::out_of_range("update: action index out of range");
}

inline void apply_update_inplace(QTable& q, UpdateRule rule, int s, int a, double r, int s_next,
                                 double alpha, double gamma, bool terminal) {
    double max_next = q.max_over_actions(s_next);
    double target = rule == UpdateRule::QLearning ? q_learning_target(r, gamma, max_next, terminal)
                                                  : max_q_target(r, gamma, max_next, terminal);
    q.at(s, a) += alpha * (target - q(s, a));
}

}  // namespace detail

inline QTable q_learning_update(const QTable& q, int s, int a, double r, int s_next, double alpha,
                                double gamma, bool terminal) {
    detail::check_transition_indices(q, s, a, s_next);
    QTable out = q;
    detail::apply_update_inplace(out, UpdateRule::QLearning, s, a, r, s_next, alpha, gamma,
                                 terminal);
    return out;
}

inline QTable max_q_update(const QTable& q, int s, int a, double r, int s_next, double alpha,
                           double gamma, bool terminal) {
    detail::check_transition_indices(q, s, a, s_next);
    QTable out = q;
    detail::apply_update_inplace(out, UpdateRule::MaxQ, s, a, r, s_next, alpha, gamma, terminal);
    return out;
}

struct TrainResult {
    QTable q;
    std::vector<EpisodeLog> episodes;
};

/// Runs `episodes` episodes of epsilon-greedy interaction, applying the
/// configured one-step update after every transition. Exploration draws:
/// with probability epsilon the action is uniform over all actions
/// (including the greedy one); greedy ties go to the lowest action index.
/// Fully deterministic given the seed.
template <Environment Env>
TrainResult train(Env env, const LearnerConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> uniform_action(0, env.action_count() - 1);

    QTable q(env.observation_count(), env.action_count(), 0.0);
    std::vector<EpisodeLog> logs;
    logs.reserve(static_cast<std::size_t>(config.episodes));

    for (long episode = 0; episode < config.episodes; ++episode) {
        double epsilon = config.epsilon_schedule.value(episode);
        int obs = env.reset();
        EpisodeLog log;
        log.max_reward = -std::numeric_limits<double>::infinity();
        while (!env.done()) {
            if (obs < 0 || obs >= q.n_states())
                throw std::out_of_range("train: observation out of Q-table range");
            int action = (epsilon > 0.0 && unit(rng) < epsilon) ? uniform_action(rng)
                                                                : q.argmax_action(obs);
            StepOutcome outcome = env.step(action);
            detail::apply_update_inplace(q, config.rule, obs, action, outcome.reward,
                                         outcome.observation, config.alpha, config.gamma,
                                         outcome.done);
            obs = outcome.observation;
            log.cumulative_return += outcome.reward;
            log.max_reward = std::max(log.max_reward, outcome.reward);
            ++log.steps;
        }
        logs.push_back(log);
    }
    return {std::move(q), std::move(logs)};
}

struct RolloutResult {
    double cumulative_return = 0.0;
    double max_reward = 0.0;
    std::vector<int> actions;
    std::vector<int> observations;
};

/// One greedy episode under a frozen table (no exploration, no updates).
template <Environment Env>
RolloutResult greedy_rollout(Env env, const QTable& q) {
    RolloutResult result;
    result.max_reward = -std::numeric_limits<double>::infinity();
    int obs = env.reset();
    result.observations.push_back(obs);
    while (!env.done()) {
        int action = q.argmax_action(obs);
        StepOutcome outcome = env.step(action);
        result.actions.push_back(action);
        result.observations.push_back(outcome.observation);
        result.cumulative_return += outcome.reward;
        result.max_reward = std::max(result.max_reward, outcome.reward);
        obs = outcome.observation;
    }
    return result;
}

}  // namespace maxdp
