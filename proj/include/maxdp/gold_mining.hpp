#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "maxdp/env.hpp"
#include "maxdp/mdp.hpp"

namespace maxdp {

enum class GridAction : int { Up = 0, Down = 1, Left = 2, Right = 3 };

/// Rectangular grid of one-shot goldmines. Row 0 is the top row; the agent
/// starts at `start` and every episode lasts exactly `horizon` steps.
struct GridLayout {
    int rows = 0;
    int cols = 0;
    std::vector<double> cell_rewards;  // row-major; 0 marks a non-goldmine cell
    int start_row = 0;
    int start_col = 0;
    int horizon = 0;
    double step_penalty = -1.0;

    int cell_index(int r, int c) const { return r * cols + c; }
    double cell_reward(int r, int c) const {
        return cell_rewards[static_cast<std::size_t>(cell_index(r, c))];
    }
    bool mine_at(int r, int c) const { return cell_reward(r, c) != 0.0; }

    int mine_count() const {
        int n = 0;
        for (double v : cell_rewards) n += (v != 0.0);
        return n;
    }

    void validate() const {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("GridLayout: grid dimensions must be positive");
        if (cell_rewards.size() != static_cast<std::size_t>(rows) * cols)
            throw std::invalid_argument("GridLayout: cell reward count does not match shape");
        if (start_row < 0 || start_row >= rows || start_col < 0 || start_col >= cols)
            throw std::invalid_argument("GridLayout: start cell out of bounds");
        if (horizon < 1) throw std::invalid_argument("GridLayout: horizon must be >= 1");
        if (mine_count() < 1)
            throw std::invalid_argument("GridLayout: at least one goldmine cell required");
        for (double v : cell_rewards)
            if (!std::isfinite(v))
                throw std::invalid_argument("GridLayout: non-finite cell reward");
        if (!std::isfinite(step_penalty))
            throw std::invalid_argument("GridLayout: non-finite step penalty");
    }

    friend bool operator==(const GridLayout& a, const GridLayout& b) {
        return a.rows == b.rows && a.cols == b.cols && a.cell_rewards == b.cell_rewards &&
               a.start_row == b.start_row && a.start_col == b.start_col &&
               a.horizon == b.horizon && a.step_penalty == b.step_penalty;
    }
};

/// Deterministic gridworld with depleting goldmines. The observation is the
/// agent's cell index alone, so mined-out cells make the process
/// non-Markovian from the learner's point of view.
class GoldMiningEnv {
public:
    explicit GoldMiningEnv(GridLayout layout) : layout_(std::move(layout)) {
        layout_.validate();
        mined_.assign(layout_.cell_rewards.size(), 0);
        reset();
    }

    int reset() {
        row_ = layout_.start_row;
        col_ = layout_.start_col;
        steps_taken_ = 0;
        std::fill(mined_.begin(), mined_.end(), 0);
        return observation();
    }

    StepOutcome step(GridAction action) { return step(static_cast<int>(action)); }

    StepOutcome step(int action) {
        if (done()) throw std::logic_error("GoldMiningEnv: step on a finished episode");
        if (action < 0 || action > 3)
            throw std::out_of_range("GoldMiningEnv: action index out of range");

        int nr = row_, nc = col_;
        switch (static_cast<GridAction>(action)) {
            case GridAction::Up: --nr; break;
            case GridAction::Down: ++nr; break;
            case GridAction::Left: --nc; break;
            case GridAction::Right: ++nc; break;
        }
        // Moves off the grid are blocked; the agent stays in place and the
        // stay counts as entering its own cell.
        if (nr < 0 || nr >= layout_.rows || nc < 0 || nc >= layout_.cols) {
            nr = row_;
            nc = col_;
        }

        double reward = layout_.step_penalty;
        std::size_t cell = static_cast<std::size_t>(layout_.cell_index(nr, nc));
        if (layout_.cell_rewards[cell] != 0.0 && !mined_[cell]) {
            reward = layout_.cell_rewards[cell];
            mined_[cell] = 1;
        }
        row_ = nr;
        col_ = nc;
        ++steps_taken_;
        return {observation(), reward, done()};
    }

    bool done() const { return steps_taken_ >= layout_.horizon; }

    int action_count() const { return 4; }
    int observation_count() const { return layout_.rows * layout_.cols; }

    int observation() const { return layout_.cell_index(row_, col_); }
    int row() const { return row_; }
    int col() const { return col_; }
    int steps_taken() const { return steps_taken_; }
    bool mined(int r, int c) const {
        return mined_[static_cast<std::size_t>(layout_.cell_index(r, c))] != 0;
    }
    const GridLayout& layout() const { return layout_; }

private:
    GridLayout layout_;
    int row_ = 0;
    int col_ = 0;
    int steps_taken_ = 0;
    std::vector<std::uint8_t> mined_;
};

// --- layout text format ---
// First line: `grid <rows> <cols> <start_row> <start_col> <horizon> <step_penalty>`,
// then <rows> lines of <cols> whitespace-separated reals (0 = no mine).
// The first reward line is the top row; the bottom row is the last line.

inline GridLayout load_layout(std::istream& in) {
    auto fail = [](int line, const std::string& what) {
        std::ostringstream msg;
        msg << "layout parse error at line " << line << ": " << what;
        throw std::runtime_error(msg.str());
    };

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) fail(1, "missing header");
    ++line_no;
    std::istringstream header(line);
    std::string tag;
    GridLayout layout;
    if (!(header >> tag >> layout.rows >> layout.cols >> layout.start_row >> layout.start_col >>
          layout.horizon >> layout.step_penalty) ||
        tag != "grid")
        fail(line_no,
             "expected `grid <rows> <cols> <start_row> <start_col> <horizon> <step_penalty>`");
    if (layout.rows < 1 || layout.cols < 1) fail(line_no, "grid dimensions must be positive");

    layout.cell_rewards.reserve(static_cast<std::size_t>(layout.rows) * layout.cols);
    int rows_read = 0;
    while (rows_read < layout.rows) {
        if (!std::getline(in, line)) fail(line_no + 1, "missing grid row");
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        for (int c = 0; c < layout.cols; ++c) {
            double v = 0.0;
            if (!(ls >> v)) fail(line_no, "grid row has too few values");
            layout.cell_rewards.push_back(v);
        }
        double extra;
        if (ls >> extra) fail(line_no, "grid row has too many values");
        ++rows_read;
    }
    try {
        layout.validate();
    } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
    }
    return layout;
}

inline GridLayout load_layout(const std::string& text) {
    std::istringstream in(text);
    return load_layout(in);
}

inline void write_layout(std::ostream& out, const GridLayout& layout) {
    out << std::setprecision(17);
    out << "grid " << layout.rows << ' ' << layout.cols << ' ' << layout.start_row << ' '
        << layout.start_col << ' ' << layout.horizon << ' ' << layout.step_penalty << '\n';
    for (int r = 0; r < layout.rows; ++r) {
        for (int c = 0; c < layout.cols; ++c) {
            if (c) out << ' ';
            out << layout.cell_reward(r, c);
        }
        out << '\n';
    }
}

/// The built-in 3x12 instance. Start at the bottom-left corner, 11 steps,
/// -1 step penalty. Two parallel mine runs: the top row ends on the unique
/// +9 and pays 26.8 over a full episode entered from the left; the bottom
/// row pays 27.5. The bottom values mirror the top values shifted one
/// column right, so every monotone up-hook that collects the bottom prefix
/// and finishes on the +9 at the final step also pays exactly 26.8.
inline GridLayout default_gold_layout() {
    GridLayout layout;
    layout.rows = 3;
    layout.cols = 12;
    layout.start_row = 2;
    layout.start_col = 0;
    layout.horizon = 11;
    layout.step_penalty = -1.0;
    layout.cell_rewards = {
        // top row
        0.0, 0.0, 3.0, 3.0, 3.0, 3.0, 3.0, 2.9, 2.9, 9.0, 0.0, 0.0,
        // middle row
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        // bottom row
        0.0, 0.0, 0.0, 3.0, 3.0, 3.0, 3.0, 3.0, 2.9, 2.9, 4.35, 4.35,
    };
    layout.validate();
    return layout;
}

/// Filter for enumerate_deterministic: keeps trajectories that enter the
/// given grid row at least once.
inline std::function<bool(const std::vector<int>&)> visits_row_filter(const GridLayout& layout,
                                                                      int row) {
    int cols = layout.cols;
    return [cols, row](const std::vector<int>& observations) {
        for (int obs : observations)
            if (obs / cols == row) return true;
        return false;
    };
}

// --- exact Markov expansion ---

/// Markov state index over (position, mined bitmask):
/// index = mask * (rows*cols) + position.
inline int markov_state_count(const GridLayout& layout) {
    return (1 << layout.mine_count()) * layout.rows * layout.cols;
}

inline int markov_start_state(const GridLayout& layout) {
    return layout.cell_index(layout.start_row, layout.start_col);
}

/// Expands the gridworld into an exact TabularMdp over (position, mined
/// bitmask) with deterministic transitions. The expansion is exact for
/// episodes of any length; horizons are applied by the caller (backward
/// induction level or environment step counter).
inline TabularMdp markovize(const GridLayout& layout, double gamma = 0.99) {
    layout.validate();
    int mines = layout.mine_count();
    if (mines > 20)
        throw std::invalid_argument("markovize: more than 20 goldmine cells");

    int n_cells = layout.rows * layout.cols;
    // mine_slot[cell] = bit position of the cell's mine, or -1.
    std::vector<int> mine_slot(static_cast<std::size_t>(n_cells), -1);
    int slot = 0;
    for (int cell = 0; cell < n_cells; ++cell)
        if (layout.cell_rewards[static_cast<std::size_t>(cell)] != 0.0) mine_slot[cell] = slot++;

    int n_masks = 1 << mines;
    int n_states = n_masks * n_cells;
    std::size_t n_rows = static_cast<std::size_t>(n_states) * 4;
    std::vector<double> rewards(n_rows, 0.0);
    std::vector<TransitionEntry> entries(n_rows);  // deterministic: one per row

    for (int mask = 0; mask < n_masks; ++mask) {
        for (int cell = 0; cell < n_cells; ++cell) {
            int r = cell / layout.cols;
            int c = cell % layout.cols;
            int state = mask * n_cells + cell;
            for (int a = 0; a < 4; ++a) {
                int nr = r, nc = c;
                switch (static_cast<GridAction>(a)) {
                    case GridAction::Up: --nr; break;
                    case GridAction::Down: ++nr; break;
                    case GridAction::Left: --nc; break;
                    case GridAction::Right: ++nc; break;
                }
                if (nr < 0 || nr >= layout.rows || nc < 0 || nc >= layout.cols) {
                    nr = r;
                    nc = c;
                }
                int ncell = layout.cell_index(nr, nc);
                double reward = layout.step_penalty;
                int nmask = mask;
                int ms = mine_slot[static_cast<std::size_t>(ncell)];
                if (ms >= 0 && !(mask & (1 << ms))) {
                    reward = layout.cell_rewards[static_cast<std::size_t>(ncell)];
                    nmask = mask | (1 << ms);
                }
                std::size_t idx = static_cast<std::size_t>(state) * 4 + a;
                rewards[idx] = reward;
                entries[idx] = {nmask * n_cells + ncell, 1.0};
            }
        }
    }
    return TabularMdp::from_deterministic_transitions(n_states, 4, gamma, std::move(rewards),
                                                      std::move(entries));
}

}  // namespace maxdp
