#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maxdp {

/// State-action value table, shape n_states x n_actions, row-major.
class QTable {
public:
    QTable() = default;

    QTable(int n_states, int n_actions, double init = 0.0)
        : n_states_(n_states), n_actions_(n_actions),
          values_(static_cast<std::size_t>(n_states) * n_actions, init) {
        if (n_states < 1 || n_actions < 1)
            throw std::invalid_argument("QTable: dimensions must be positive");
    }

    QTable(int n_states, int n_actions, std::vector<double> values)
        : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
        if (n_states < 1 || n_actions < 1)
            throw std::invalid_argument("QTable: dimensions must be positive");
        if (values_.size() != static_cast<std::size_t>(n_states) * n_actions)
            throw std::invalid_argument("QTable: value count does not match shape");
    }

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    double operator()(int s, int a) const { return values_[index(s, a)]; }
    double& at(int s, int a) { return values_[index(s, a)]; }

    std::span<const double> values() const { return values_; }

    bool same_shape(const QTable& other) const {
        return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
    }

    double max_over_actions(int s) const {
        double best = values_[index(s, 0)];
        for (int a = 1; a < n_actions_; ++a) best = std::max(best, values_[index(s, a)]);
        return best;
    }

    /// Ties broken by lowest action index.
    int argmax_action(int s) const {
        int best = 0;
        double best_v = values_[index(s, 0)];
        for (int a = 1; a < n_actions_; ++a) {
            double v = values_[index(s, a)];
            if (v > best_v) {
                best_v = v;
                best = a;
            }
        }
        return best;
    }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const QTable& a, const QTable& b) {
        return a.n_states_ == b.n_states_ && a.n_actions_ == b.n_actions_ &&
               a.values_ == b.values_;
    }

private:
    std::size_t index(int s, int a) const {
        if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
            throw std::out_of_range("QTable: state or action index out of range");
        return static_cast<std::size_t>(s) * n_actions_ + a;
    }

    int n_states_ = 0;
    int n_actions_ = 0;
    std::vector<double> values_;
};

/// Max absolute entry-wise difference; the metric of the contraction argument.
inline double sup_norm_distance(const QTable& q1, const QTable& q2) {
    if (!q1.same_shape(q2))
        throw std::invalid_argument("sup_norm_distance: shape mismatch");
    double d = 0.0;
    auto v1 = q1.values();
    auto v2 = q2.values();
    for (std::size_t i = 0; i < v1.size(); ++i) d = std::max(d, std::abs(v1[i] - v2[i]));
    return d;
}

struct TransitionEntry {
    int next_state;
    double prob;
};

/// Finite MDP with sparse row-stochastic transitions and rewards r(s, a).
/// Immutable after construction; construction validates all invariants.
/// Transition rows live in one flat array (CSR style); when every row has
/// exactly one successor the offsets are implicit, which keeps large
/// deterministic expansions compact.
class TabularMdp {
public:
    TabularMdp(int n_states, int n_actions, double gamma, std::vector<double> rewards,
               std::vector<std::vector<TransitionEntry>> rows)
        : n_states_(n_states), n_actions_(n_actions), gamma_(gamma),
          rewards_(std::move(rewards)) {
        std::size_t n = check_shape(rows.size());
        bool single = std::all_of(rows.begin(), rows.end(),
                                  [](const auto& r) { return r.size() == 1; });
        if (!single) {
            offsets_.reserve(n + 1);
            offsets_.push_back(0);
        }
        std::size_t total = 0;
        for (const auto& r : rows) total += r.size();
        entries_.reserve(total);
        for (const auto& r : rows) {
            entries_.insert(entries_.end(), r.begin(), r.end());
            if (!single) offsets_.push_back(entries_.size());
        }
        validate_rows();
    }

    /// Flat deterministic construction: `entries` holds one successor per
    /// (state, action) row in row order.
    static TabularMdp from_deterministic_transitions(int n_states, int n_actions, double gamma,
                                                     std::vector<double> rewards,
                                                     std::vector<TransitionEntry> entries) {
        TabularMdp mdp;
        mdp.n_states_ = n_states;
        mdp.n_actions_ = n_actions;
        mdp.gamma_ = gamma;
        mdp.rewards_ = std::move(rewards);
        mdp.entries_ = std::move(entries);
        mdp.check_shape(mdp.entries_.size());
        mdp.validate_rows();
        return mdp;
    }

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double gamma() const { return gamma_; }

    double reward(int s, int a) const { return rewards_[index(s, a)]; }

    std::span<const TransitionEntry> row(int s, int a) const {
        std::size_t i = index(s, a);
        if (offsets_.empty()) return {entries_.data() + i, 1};
        return {entries_.data() + offsets_[i],
                static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
    }

    /// True when every transition row has a single next state.
    bool deterministic() const {
        return offsets_.empty() ||
               entries_.size() == static_cast<std::size_t>(n_states_) * n_actions_;
    }

private:
    TabularMdp() = default;

    std::size_t check_shape(std::size_t row_count) {
        if (n_states_ < 1 || n_actions_ < 1)
            throw std::invalid_argument("TabularMdp: dimensions must be positive");
        if (!(gamma_ >= 0.0 && gamma_ < 1.0))
            throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
        std::size_t n = static_cast<std::size_t>(n_states_) * n_actions_;
        if (rewards_.size() != n)
            throw std::invalid_argument("TabularMdp: reward table has wrong size");
        if (row_count != n)
            throw std::invalid_argument("TabularMdp: transition table has wrong size");
        return n;
    }

    void validate_rows() {
        for (double r : rewards_)
            if (!std::isfinite(r)) throw std::invalid_argument("TabularMdp: non-finite reward");
        for (int s = 0; s < n_states_; ++s) {
            for (int a = 0; a < n_actions_; ++a) {
                double sum = 0.0;
                for (const auto& e : row(s, a)) {
                    if (e.next_state < 0 || e.next_state >= n_states_)
                        throw std::invalid_argument(
                            "TabularMdp: transition target out of range");
                    if (!(e.prob >= 0.0))
                        throw std::invalid_argument(
                            "TabularMdp: negative transition probability");
                    sum += e.prob;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
            }
        }
    }

    std::size_t index(int s, int a) const {
        if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
            throw std::out_of_range("TabularMdp: state or action index out of range");
        return static_cast<std::size_t>(s) * n_actions_ + a;
    }

    int n_states_;
    int n_actions_;
    double gamma_;
    std::vector<double> rewards_;
    std::vector<TransitionEntry> entries_;
    std::vector<std::uint64_t> offsets_;  // empty: exactly one entry per row
};

/// Deterministic, stochastic, or epsilon-greedy (over a base table) policy.
class Policy {
public:
    enum class Kind { Deterministic, Stochastic, EpsilonGreedy };

    static Policy deterministic(std::vector<int> actions) {
        Policy p;
        p.kind_ = Kind::Deterministic;
        p.actions_ = std::move(actions);
        if (p.actions_.empty())
            throw std::invalid_argument("Policy: empty action map");
        return p;
    }

    static Policy stochastic(int n_states, int n_actions, std::vector<double> probs) {
        Policy p;
        p.kind_ = Kind::Stochastic;
        p.n_states_ = n_states;
        p.n_actions_ = n_actions;
        p.probs_ = std::move(probs);
        if (n_states < 1 || n_actions < 1)
            throw std::invalid_argument("Policy: dimensions must be positive");
        if (p.probs_.size() != static_cast<std::size_t>(n_states) * n_actions)
            throw std::invalid_argument("Policy: probability table has wrong size");
        for (int s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                double v = p.probs_[static_cast<std::size_t>(s) * n_actions + a];
                if (!(v >= 0.0)) throw std::invalid_argument("Policy: negative probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("Policy: action distribution does not sum to 1");
        }
        return p;
    }

    static Policy epsilon_greedy(QTable base, double epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw std::invalid_argument("Policy: epsilon must lie in [0, 1]");
        Policy p;
        p.kind_ = Kind::EpsilonGreedy;
        p.base_ = std::move(base);
        p.epsilon_ = epsilon;
        return p;
    }

    Kind kind() const { return kind_; }

    /// Checks the policy addresses every state/action of an owning model.
    bool compatible(int n_states, int n_actions) const {
        switch (kind_) {
            case Kind::Deterministic:
                if (static_cast<int>(actions_.size()) != n_states) return false;
                return std::all_of(actions_.begin(), actions_.end(),
                                   [&](int a) { return a >= 0 && a < n_actions; });
            case Kind::Stochastic:
                return n_states_ == n_states && n_actions_ == n_actions;
            case Kind::EpsilonGreedy:
                return base_.n_states() == n_states && base_.n_actions() == n_actions;
        }
        return false;
    }

    double action_prob(int s, int a) const {
        switch (kind_) {
            case Kind::Deterministic:
                return actions_[static_cast<std::size_t>(s)] == a ? 1.0 : 0.0;
            case Kind::Stochastic:
                return probs_[static_cast<std::size_t>(s) * n_actions_ + a];
            case Kind::EpsilonGreedy: {
                int greedy = base_.argmax_action(s);
                double uniform = epsilon_ / base_.n_actions();
                return uniform + (a == greedy ? 1.0 - epsilon_ : 0.0);
            }
        }
        return 0.0;
    }

    /// E_{a ~ pi(.|s)} [ q(s, a) ].
    double expected_value(const QTable& q, int s) const {
        switch (kind_) {
            case Kind::Deterministic:
                return q(s, actions_[static_cast<std::size_t>(s)]);
            case Kind::Stochastic: {
                double v = 0.0;
                for (int a = 0; a < n_actions_; ++a) {
                    double p = probs_[static_cast<std::size_t>(s) * n_actions_ + a];
                    if (p > 0.0) v += p * q(s, a);
                }
                return v;
            }
            case Kind::EpsilonGreedy: {
                double mean = 0.0;
                for (int a = 0; a < q.n_actions(); ++a) mean += q(s, a);
                mean /= q.n_actions();
                return epsilon_ * mean + (1.0 - epsilon_) * q(s, base_.argmax_action(s));
            }
        }
        return 0.0;
    }

    int deterministic_action(int s) const {
        if (kind_ != Kind::Deterministic)
            throw std::logic_error("Policy: not a deterministic policy");
        return actions_[static_cast<std::size_t>(s)];
    }

private:
    Policy() = default;

    Kind kind_ = Kind::Deterministic;
    std::vector<int> actions_;           // Deterministic
    int n_states_ = 0, n_actions_ = 0;   // Stochastic
    std::vector<double> probs_;          // Stochastic
    QTable base_;                        // EpsilonGreedy
    double epsilon_ = 0.0;               // EpsilonGreedy
};

/// Deterministic argmax policy; ties broken by lowest action index.
inline Policy greedy_policy(const QTable& q) {
    std::vector<int> actions(static_cast<std::size_t>(q.n_states()));
    for (int s = 0; s < q.n_states(); ++s) actions[static_cast<std::size_t>(s)] = q.argmax_action(s);
    return Policy::deterministic(std::move(actions));
}

// --- plain-text MDP serialization ---
// Header `mdp <n_states> <n_actions> <gamma>`, then one line per (s, a):
// `s a r p_0 p_1 ... p_{n_states-1}`.

inline void write_mdp(std::ostream& out, const TabularMdp& mdp) {
    out << std::setprecision(17);
    out << "mdp " << mdp.n_states() << ' ' << mdp.n_actions() << ' ' << mdp.gamma() << '\n';
    std::vector<double> dense(static_cast<std::size_t>(mdp.n_states()));
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) {
            std::fill(dense.begin(), dense.end(), 0.0);
            for (const auto& e : mdp.row(s, a)) dense[static_cast<std::size_t>(e.next_state)] += e.prob;
            out << s << ' ' << a << ' ' << mdp.reward(s, a);
            for (double p : dense) out << ' ' << p;
            out << '\n';
        }
    }
}

inline TabularMdp read_mdp(std::istream& in) {
    auto fail = [](int line, const std::string& what) {
        std::ostringstream msg;
        msg << "mdp parse error at line " << line << ": " << what;
        throw std::runtime_error(msg.str());
    };

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) fail(1, "missing header");
    ++line_no;
    std::istringstream header(line);
    std::string tag;
    int n_states = 0, n_actions = 0;
    double gamma = 0.0;
    if (!(header >> tag >> n_states >> n_actions >> gamma) || tag != "mdp")
        fail(line_no, "expected `mdp <n_states> <n_actions> <gamma>`");

    std::size_t n = static_cast<std::size_t>(n_states) * n_actions;
    std::vector<double> rewards(n, 0.0);
    std::vector<std::vector<TransitionEntry>> rows(n);
    std::vector<bool> seen(n, false);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int s = 0, a = 0;
        double r = 0.0;
        if (!(ls >> s >> a >> r)) fail(line_no, "expected `s a r p_0 ... p_{n-1}`");
        if (s < 0 || s >= n_states || a < 0 || a >= n_actions)
            fail(line_no, "state or action index out of range");
        std::size_t idx = static_cast<std::size_t>(s) * n_actions + a;
        if (seen[idx]) fail(line_no, "duplicate (state, action) row");
        seen[idx] = true;
        rewards[idx] = r;
        for (int ns = 0; ns < n_states; ++ns) {
            double p = 0.0;
            if (!(ls >> p)) fail(line_no, "transition row has too few probabilities");
            if (p != 0.0) rows[idx].push_back({ns, p});
        }
        double extra;
        if (ls >> extra) fail(line_no, "transition row has too many probabilities");
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) fail(line_no, "missing (state, action) rows");
    return TabularMdp(n_states, n_actions, gamma, std::move(rewards), std::move(rows));
}

}  // namespace maxdp
