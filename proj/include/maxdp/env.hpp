#pragma once

#include <concepts>

namespace maxdp {

/// Result of one environment step.
struct StepOutcome {
    int observation = 0;
    double reward = 0.0;
    bool done = false;
};

/// Episodic environment with integer observations, addressable by a Q-table.
template <class E>
concept Environment = std::copyable<E> && requires(E env, const E cenv, int action) {
    { env.reset() } -> std::convertible_to<int>;
    { env.step(action) } -> std::convertible_to<StepOutcome>;
    { cenv.action_count() } -> std::convertible_to<int>;
    { cenv.observation_count() } -> std::convertible_to<int>;
    { cenv.done() } -> std::convertible_to<bool>;
};

}  // namespace maxdp
