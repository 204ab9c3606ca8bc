#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "maxdp/mdp.hpp"

namespace maxdp {

/// The four Bellman-style backup operators on Q-tables.
///
/// Max-form backups replace the sum `r + gamma * continuation` with
/// `max(r, gamma * continuation)`, so the fixed point tracks the best
/// single discounted reward ahead instead of the discounted sum.
/// Evaluation kinds take the continuation through a fixed policy,
/// optimality kinds through a max over next actions.
class OperatorKind {
public:
    enum class Type { MaxEvaluation, MaxOptimality, StandardEvaluation, StandardOptimality };

    static OperatorKind max_evaluation(Policy policy) {
        return OperatorKind(Type::MaxEvaluation, std::move(policy));
    }
    static OperatorKind max_optimality() { return OperatorKind(Type::MaxOptimality, std::nullopt); }
    static OperatorKind standard_evaluation(Policy policy) {
        return OperatorKind(Type::StandardEvaluation, std::move(policy));
    }
    static OperatorKind standard_optimality() {
        return OperatorKind(Type::StandardOptimality, std::nullopt);
    }

    Type type() const { return type_; }
    bool max_form() const { return type_ == Type::MaxEvaluation || type_ == Type::MaxOptimality; }
    bool evaluation() const {
        return type_ == Type::MaxEvaluation || type_ == Type::StandardEvaluation;
    }
    const Policy& policy() const { return *policy_; }

private:
    OperatorKind(Type type, std::optional<Policy> policy)
        : type_(type), policy_(std::move(policy)) {}

    Type type_;
    std::optional<Policy> policy_;
};

namespace detail {

// Synchronous backup: reads the full previous table, returns a new one.
inline QTable apply_backup(const OperatorKind& kind, const QTable& q, const TabularMdp& mdp) {
    if (q.n_states() != mdp.n_states() || q.n_actions() != mdp.n_actions())
        throw std::invalid_argument("operator: Q-table shape does not match MDP");
    if (kind.evaluation() && !kind.policy().compatible(mdp.n_states(), mdp.n_actions()))
        throw std::invalid_argument("operator: policy incompatible with MDP");

    // Continuation value per next state, shared by all (s, a) backups.
    std::vector<double> cont(static_cast<std::size_t>(mdp.n_states()));
    for (int s = 0; s < mdp.n_states(); ++s)
        cont[static_cast<std::size_t>(s)] =
            kind.evaluation() ? kind.policy().expected_value(q, s) : q.max_over_actions(s);

    QTable out(mdp.n_states(), mdp.n_actions());
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) {
            double expect = 0.0;
            for (const auto& e : mdp.row(s, a))
                expect += e.prob * cont[static_cast<std::size_t>(e.next_state)];
            double r = mdp.reward(s, a);
            double boot = mdp.gamma() * expect;
            out.at(s, a) = kind.max_form() ? std::max(r, boot) : r + boot;
        }
    }
    return out;
}

}  // namespace detail

inline QTable apply_operator(const OperatorKind& kind, const QTable& q, const TabularMdp& mdp) {
    return detail::apply_backup(kind, q, mdp);
}

inline QTable apply_max_eval(const QTable& q, const Policy& policy, const TabularMdp& mdp) {
    return detail::apply_backup(OperatorKind::max_evaluation(policy), q, mdp);
}

inline QTable apply_max_optimality(const QTable& q, const TabularMdp& mdp) {
    return detail::apply_backup(OperatorKind::max_optimality(), q, mdp);
}

inline QTable apply_standard_eval(const QTable& q, const Policy& policy, const TabularMdp& mdp) {
    return detail::apply_backup(OperatorKind::standard_evaluation(policy), q, mdp);
}

inline QTable apply_standard_optimality(const QTable& q, const TabularMdp& mdp) {
    return detail::apply_backup(OperatorKind::standard_optimality(), q, mdp);
}

struct FixedPointResult {
    QTable q;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
};

/// Iterates the operator until the sup-norm change drops below tol.
/// Convergence is geometric with ratio gamma; a run that exhausts
/// max_iter is reported, not silently returned.
inline FixedPointResult solve_fixed_point(const OperatorKind& kind, const TabularMdp& mdp,
                                          const QTable& q0, double tol = 1e-10,
                                          long max_iter = 100000) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("solve_fixed_point: max_iter must be >= 1");

    FixedPointResult result{q0, 0, 0.0, false, {}};
    for (long it = 1; it <= max_iter; ++it) {
        QTable next = detail::apply_backup(kind, result.q, mdp);
        double residual = sup_norm_distance(next, result.q);
        result.q = std::move(next);
        result.iterations = it;
        result.residual = residual;
        result.residual_history.push_back(residual);
        if (residual < tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

inline FixedPointResult solve_fixed_point(const OperatorKind& kind, const TabularMdp& mdp,
                                          double tol = 1e-10, long max_iter = 100000) {
    return solve_fixed_point(kind, mdp, QTable(mdp.n_states(), mdp.n_actions(), 0.0), tol,
                             max_iter);
}

}  // namespace maxdp
