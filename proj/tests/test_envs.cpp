#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "maxdp/fixtures.hpp"
#include "maxdp/gold_mining.hpp"
#include "maxdp/oracle.hpp"

using namespace maxdp;

TEST_CASE("blocked moves keep the agent in place at the step penalty") {
    GoldMiningEnv env(default_gold_layout());
    env.reset();
    StepOutcome out = env.step(GridAction::Left);  // bottom-left corner
    CHECK(out.reward == -1.0);
    CHECK(env.row() == 2);
    CHECK(env.col() == 0);
    StepOutcome down = env.step(GridAction::Down);
    CHECK(down.reward == -1.0);
    CHECK(env.row() == 2);
}

TEST_CASE("goldmines pay once and then deplete") {
    GridLayout layout;
    layout.rows = 1;
    layout.cols = 3;
    layout.start_row = 0;
    layout.start_col = 0;
    layout.horizon = 10;
    layout.step_penalty = -1.0;
    layout.cell_rewards = {0.0, 4.0, 0.0};
    GoldMiningEnv env(layout);
    env.reset();
    CHECK(env.step(GridAction::Right).reward == 4.0);  // first entry pays
    CHECK(env.mined(0, 1));
    CHECK(env.step(GridAction::Right).reward == -1.0);
    CHECK(env.step(GridAction::Left).reward == -1.0);  // re-entry is a penalty
    env.reset();
    CHECK_FALSE(env.mined(0, 1));
    CHECK(env.step(GridAction::Right).reward == 4.0);  // reset restores the mine
}

TEST_CASE("episodes end exactly at the horizon") {
    GoldMiningEnv env(default_gold_layout());
    env.reset();
    for (int i = 0; i < 11; ++i) {
        CHECK_FALSE(env.done());
        StepOutcome out = env.step(GridAction::Right);
        CHECK(out.done == (i == 10));
    }
    CHECK(env.done());
    CHECK_THROWS_AS(env.step(GridAction::Right), std::logic_error);
}

TEST_CASE("observation is the flat cell index") {
    GoldMiningEnv env(default_gold_layout());
    int obs = env.reset();
    CHECK(obs == 2 * 12 + 0);
    CHECK(env.step(GridAction::Up).observation == 1 * 12 + 0);
    CHECK(env.step(GridAction::Right).observation == 1 * 12 + 1);
}

TEST_CASE("layout text parses and round-trips") {
    std::string text =
        "grid 2 3 1 0 5 -1\n"
        "0 9 0\n"
        "0 0 2.5\n";
    GridLayout layout = load_layout(text);
    CHECK(layout.rows == 2);
    CHECK(layout.cols == 3);
    CHECK(layout.cell_reward(0, 1) == 9.0);  // top row
    CHECK(layout.cell_reward(1, 2) == 2.5);
    CHECK(layout.horizon == 5);

    std::stringstream buffer;
    write_layout(buffer, layout);
    CHECK(load_layout(buffer) == layout);
}

TEST_CASE("layout parse errors carry line numbers") {
    CHECK_THROWS_WITH(load_layout(std::string("gird 1 1 0 0 1 -1\n0\n")),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(load_layout(std::string("grid 2 2 0 0 3 -1\n1 0\n0\n")),
                      Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(load_layout(std::string("grid 1 2 0 0 3 -1\n0 0\n")),
                      Catch::Matchers::ContainsSubstring("goldmine"));
}

TEST_CASE("shipped default layout file matches the builtin") {
    std::ifstream in(std::string(MAXDP_SOURCE_DIR) + "/data/gold_default.layout");
    REQUIRE(in);
    CHECK(load_layout(in) == default_gold_layout());
}

TEST_CASE("default layout satisfies its oracle-verified constraints") {
    GridLayout layout = default_gold_layout();
    REQUIRE(layout.rows == 3);
    REQUIRE(layout.cols == 12);
    REQUIRE(layout.horizon == 11);
    REQUIRE(layout.step_penalty == -1.0);
    REQUIRE(layout.start_row == 2);
    REQUIRE(layout.start_col == 0);

    GoldMiningEnv env(layout);
    EnumerationOptions opts;
    opts.gamma = 0.99;

    // (a) global best over all 4^11 trajectories, attained on the bottom row
    TrajectoryStats stats = enumerate_deterministic(env, 11, opts);
    CHECK(stats.best_cumulative_return == 27.5);
    {
        // replay to confirm the argmax trajectory never leaves the bottom row
        GoldMiningEnv probe(layout);
        probe.reset();
        for (int a : stats.best_cumulative_actions) {
            StepOutcome out = probe.step(a);
            CHECK(out.observation / layout.cols == 2);
        }
    }

    // (d) the global best single raw reward is the 9
    CHECK(stats.best_max_raw_reward == 9.0);

    // (b) best cumulative return among trajectories visiting the top row
    EnumerationOptions top_opts = opts;
    top_opts.visit_filter = visits_row_filter(layout, 0);
    TrajectoryStats top_stats = enumerate_deterministic(env, 11, top_opts);
    CHECK(top_stats.best_cumulative_return == Catch::Approx(26.8).margin(1e-12));
    {
        // the top-row optimum collects the +9
        GoldMiningEnv probe(layout);
        auto replayed = replay(probe, top_stats.best_cumulative_actions, opts.gamma);
        CHECK(replayed[2] == 9.0);
    }

    // (c) the maximum cell reward is 9, unique, in the top row
    int nines = 0;
    for (int r = 0; r < layout.rows; ++r)
        for (int c = 0; c < layout.cols; ++c) {
            double v = layout.cell_reward(r, c);
            if (v == 9.0) {
                ++nines;
                CHECK(r == 0);
            } else {
                CHECK(v < 9.0);
            }
        }
    CHECK(nines == 1);
}

TEST_CASE("markovize expands a one-mine 1x2 grid into 4 states") {
    GridLayout layout;
    layout.rows = 1;
    layout.cols = 2;
    layout.start_row = 0;
    layout.start_col = 0;
    layout.horizon = 3;
    layout.step_penalty = -1.0;
    layout.cell_rewards = {0.0, 1.5};
    TabularMdp mdp = markovize(layout, 0.9);
    CHECK(mdp.n_states() == 4);  // 2 positions x 2 mined flags
    CHECK(mdp.n_actions() == 4);
    CHECK(mdp.deterministic());
    int start = markov_start_state(layout);
    CHECK(start == 0);
    // Right from the fresh start collects the mine and sets the mask bit.
    CHECK(mdp.reward(start, static_cast<int>(GridAction::Right)) == 1.5);
    CHECK(mdp.row(start, static_cast<int>(GridAction::Right))[0].next_state == 1 * 2 + 1);
    // Same move with the mine already mined pays the step penalty.
    CHECK(mdp.reward(1 * 2 + 0, static_cast<int>(GridAction::Right)) == -1.0);
}

TEST_CASE("markovize rejects layouts with too many mines") {
    GridLayout layout;
    layout.rows = 3;
    layout.cols = 8;
    layout.start_row = 0;
    layout.start_col = 0;
    layout.horizon = 5;
    layout.step_penalty = -1.0;
    layout.cell_rewards.assign(24, 1.0);  // 24 mines
    CHECK_THROWS_AS(markovize(layout), std::invalid_argument);
}

TEST_CASE("markovized MDP reproduces environment rewards step for step") {
    GridLayout layout = default_gold_layout();
    TabularMdp mdp = markovize(layout, 0.99);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        GoldMiningEnv env(layout);
        env.reset();
        int state = markov_start_state(layout);
        for (int t = 0; t < layout.horizon; ++t) {
            int a = static_cast<int>(rng() % 4);
            StepOutcome out = env.step(a);
            REQUIRE(mdp.reward(state, a) == out.reward);
            state = mdp.row(state, a)[0].next_state;
            REQUIRE(state % (layout.rows * layout.cols) == out.observation);
        }
    }
}

TEST_CASE("markovized backward induction agrees with trajectory enumeration") {
    GridLayout layout = default_gold_layout();
    double gamma = 0.99;
    TabularMdp mdp = markovize(layout, gamma);
    auto levels = backward_induction_max(mdp, layout.horizon);
    double dp_value = levels.back().max_over_actions(markov_start_state(layout));

    EnumerationOptions opts;
    opts.gamma = gamma;
    TrajectoryStats stats = enumerate_deterministic(GoldMiningEnv(layout), layout.horizon, opts);
    CHECK(dp_value == Catch::Approx(stats.best_max_discounted_reward).margin(1e-12));
    // The +9 is first reachable at the final step, so the optimum is 9 * g^10.
    CHECK(dp_value == Catch::Approx(9.0 * std::pow(gamma, 10)).margin(1e-12));
}

TEST_CASE("episode reward accounting") {
    GridLayout layout = default_gold_layout();
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        GoldMiningEnv env(layout);
        env.reset();
        double total = 0.0;
        double collected = 0.0;
        int collections = 0;
        int steps = 0;
        while (!env.done()) {
            int before_mines = 0;
            for (int r = 0; r < layout.rows; ++r)
                for (int c = 0; c < layout.cols; ++c) before_mines += env.mined(r, c);
            StepOutcome out = env.step(static_cast<int>(rng() % 4));
            int after_mines = 0;
            for (int r = 0; r < layout.rows; ++r)
                for (int c = 0; c < layout.cols; ++c) after_mines += env.mined(r, c);
            CHECK(after_mines >= before_mines);  // depletion only grows
            if (after_mines > before_mines) {
                collected += out.reward;
                ++collections;
            }
            total += out.reward;
            ++steps;
        }
        CHECK(total ==
              Catch::Approx(collected + layout.step_penalty * (steps - collections))
                  .margin(1e-12));
    }
}

TEST_CASE("random_mdp rows are stochastic and seed-deterministic") {
    TabularMdp a = random_mdp(12, 4, 0.9, 7);
    TabularMdp b = random_mdp(12, 4, 0.9, 7);
    for (int s = 0; s < 12; ++s)
        for (int act = 0; act < 4; ++act) {
            double sum = 0.0;
            auto row = a.row(s, act);
            auto row_b = b.row(s, act);
            REQUIRE(row.size() == row_b.size());
            for (std::size_t i = 0; i < row.size(); ++i) {
                CHECK(row[i].prob == row_b[i].prob);
                CHECK(row[i].prob >= 0.0);
                sum += row[i].prob;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            CHECK(a.reward(s, act) == b.reward(s, act));
        }
}

TEST_CASE("chain_mdp matches the hand-built operators fixture") {
    TabularMdp chain = chain_mdp(2, {0.0, 2.0}, 0.5);
    CHECK(chain.n_states() == 2);
    CHECK(chain.n_actions() == 1);
    CHECK(chain.reward(0, 0) == 0.0);
    CHECK(chain.reward(1, 0) == 2.0);
    CHECK(chain.row(0, 0)[0].next_state == 1);
    CHECK(chain.row(1, 0)[0].next_state == 1);  // terminal self-loop
    CHECK(chain.gamma() == 0.5);
}
