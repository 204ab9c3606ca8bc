#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "maxdp/gold_mining.hpp"
#include "maxdp/learners.hpp"

namespace maxdp {

inline std::string rule_name(UpdateRule rule) {
    return rule == UpdateRule::QLearning ? "qlearning" : "maxq";
}

inline UpdateRule rule_from_name(const std::string& name) {
    if (name == "qlearning") return UpdateRule::QLearning;
    if (name == "maxq") return UpdateRule::MaxQ;
    throw std::invalid_argument("unknown learner rule `" + name +
                                "` (expected qlearning or maxq)");
}

/// Multi-seed experiment description, parsed from flat key=value text.
struct ExperimentConfig {
    std::string layout_spec = "default";  // "default" or a layout file path
    std::vector<UpdateRule> rules = {UpdateRule::QLearning, UpdateRule::MaxQ};
    double alpha = 0.001;
    double gamma = 0.99;
    Schedule epsilon_schedule = Schedule::linear_decay(0.2, 0.0, 50000);
    long episodes = 100000;
    int n_seeds = 10;
    long cadence = 500;
    std::string out_dir = "out";
    std::uint64_t seed_base = 0;

    void validate() const {
        if (rules.empty()) throw std::invalid_argument("ExperimentConfig: no learner rules");
        if (n_seeds < 1) throw std::invalid_argument("ExperimentConfig: seeds must be >= 1");
        if (cadence < 1 || episodes % cadence != 0)
            throw std::invalid_argument(
                "ExperimentConfig: cadence must be >= 1 and divide episodes");
        LearnerConfig probe{rules.front(), alpha, gamma, epsilon_schedule, episodes, 0};
        probe.validate();
        if (layout_spec != "default" && !std::filesystem::exists(layout_spec))
            throw std::invalid_argument("ExperimentConfig: layout file not found: " +
                                        layout_spec);
    }

    GridLayout layout() const {
        if (layout_spec == "default") return default_gold_layout();
        std::ifstream in(layout_spec);
        if (!in) throw std::runtime_error("cannot open layout file: " + layout_spec);
        return load_layout(in);
    }
};

/// Parses `key = value` lines; `#` starts a comment. Keys:
/// env.layout, learner.rule (comma list), learner.alpha, learner.gamma,
/// schedule.start, schedule.end, schedule.over, episodes, seeds, cadence,
/// out_dir.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig config;
    double sched_start = 0.2, sched_end = 0.0;
    long sched_over = 50000;
    bool sched_constant = false;

    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << "config parse error at line " << line_no << ": " << what;
        throw std::runtime_error(msg.str());
    };
    auto trim = [](std::string s) {
        auto issp = [](unsigned char c) { return std::isspace(c); };
        while (!s.empty() && issp(s.front())) s.erase(s.begin());
        while (!s.empty() && issp(s.back())) s.pop_back();
        return s;
    };

    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected `key = value`");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail("empty value for key `" + key + "`");

        try {
            if (key == "env.layout") {
                config.layout_spec = value;
            } else if (key == "learner.rule") {
                config.rules.clear();
                std::istringstream vs(value);
                std::string name;
                while (std::getline(vs, name, ','))
                    config.rules.push_back(rule_from_name(trim(name)));
            } else if (key == "learner.alpha") {
                config.alpha = std::stod(value);
            } else if (key == "learner.gamma") {
                config.gamma = std::stod(value);
            } else if (key == "schedule.start") {
                sched_start = std::stod(value);
            } else if (key == "schedule.end") {
                sched_end = std::stod(value);
            } else if (key == "schedule.over") {
                sched_over = std::stol(value);
                sched_constant = sched_over == 0;
            } else if (key == "episodes") {
                config.episodes = std::stol(value);
            } else if (key == "seeds") {
                config.n_seeds = std::stoi(value);
            } else if (key == "cadence") {
                config.cadence = std::stol(value);
            } else if (key == "out_dir") {
                config.out_dir = value;
            } else {
                fail("unknown key `" + key + "`");
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    config.epsilon_schedule = sched_constant
                                  ? Schedule::constant(sched_end)
                                  : Schedule::linear_decay(sched_start, sched_end, sched_over);
    return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_experiment_config(in);
}

struct CurvePoint {
    long episode = 0;  // last episode of the bucket, 1-based
    double mean_return = 0.0;
    double std_return = 0.0;
    double mean_max_reward = 0.0;
    double std_max_reward = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<EpisodeLog> episodes;
    QTable final_q;
    RolloutResult final_rollout;
};

struct AlgorithmSummary {
    UpdateRule rule = UpdateRule::QLearning;
    std::vector<CurvePoint> curve;
    std::vector<SeedResult> seeds;  // ordered by seed index
};

struct RunSummary {
    std::vector<AlgorithmSummary> algorithms;
};

namespace detail {

inline int experiment_thread_cap() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("MAXDP_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Mean/std across seeds of per-seed bucket means. Population std, so a
// single seed yields exactly 0.
inline CurvePoint aggregate_bucket(const std::vector<SeedResult>& seeds, long bucket_start,
                                   long bucket_len) {
    CurvePoint point;
    point.episode = bucket_start + bucket_len;
    std::vector<double> returns, maxes;
    returns.reserve(seeds.size());
    maxes.reserve(seeds.size());
    for (const auto& seed : seeds) {
        double sum_r = 0.0, sum_m = 0.0;
        for (long e = bucket_start; e < bucket_start + bucket_len; ++e) {
            const auto& log = seed.episodes[static_cast<std::size_t>(e)];
            sum_r += log.cumulative_return;
            sum_m += log.max_reward;
        }
        returns.push_back(sum_r / static_cast<double>(bucket_len));
        maxes.push_back(sum_m / static_cast<double>(bucket_len));
    }
    auto mean_of = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        return m / static_cast<double>(xs.size());
    };
    auto std_of = [&](const std::vector<double>& xs, double mean) {
        double v = 0.0;
        for (double x : xs) v += (x - mean) * (x - mean);
        return std::sqrt(v / static_cast<double>(xs.size()));
    };
    point.mean_return = mean_of(returns);
    point.std_return = std_of(returns, point.mean_return);
    point.mean_max_reward = mean_of(maxes);
    point.std_max_reward = std_of(maxes, point.mean_max_reward);
    return point;
}

inline void check_finite_curve(const std::vector<CurvePoint>& curve, const std::string& alg) {
    for (const auto& p : curve) {
        if (!std::isfinite(p.mean_return) || !std::isfinite(p.std_return) ||
            !std::isfinite(p.mean_max_reward) || !std::isfinite(p.std_max_reward))
            throw std::runtime_error("run_experiment: non-finite statistic for " + alg +
                                     " at episode " + std::to_string(p.episode));
    }
}

}  // namespace detail

/// Trains every (rule, seed) pair and aggregates learning curves. Seeds fan
/// out across threads (capped by MAXDP_THREADS); aggregation is a
/// deterministic reduction ordered by seed index, so results do not depend
/// on scheduling.
inline RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    GridLayout layout = config.layout();
    GoldMiningEnv proto(layout);

    struct Task {
        std::size_t alg;
        int seed_index;
    };
    std::vector<Task> tasks;
    RunSummary summary;
    summary.algorithms.resize(config.rules.size());
    for (std::size_t i = 0; i < config.rules.size(); ++i) {
        summary.algorithms[i].rule = config.rules[i];
        summary.algorithms[i].seeds.resize(static_cast<std::size_t>(config.n_seeds));
        for (int s = 0; s < config.n_seeds; ++s) tasks.push_back({i, s});
    }

    std::mutex task_mutex;
    std::size_t next_task = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t mine;
            {
                std::lock_guard<std::mutex> lock(task_mutex);
                if (next_task >= tasks.size()) return;
                mine = next_task++;
            }
            const Task& task = tasks[mine];
            LearnerConfig lc;
            lc.rule = config.rules[task.alg];
            lc.alpha = config.alpha;
            lc.gamma = config.gamma;
            lc.epsilon_schedule = config.epsilon_schedule;
            lc.episodes = config.episodes;
            lc.seed = config.seed_base + static_cast<std::uint64_t>(task.seed_index);
            TrainResult trained = train(proto, lc);
            SeedResult& slot = summary.algorithms[task.alg].seeds[static_cast<std::size_t>(
                task.seed_index)];
            slot.seed = lc.seed;
            slot.final_rollout = greedy_rollout(proto, trained.q);
            slot.final_q = std::move(trained.q);
            slot.episodes = std::move(trained.episodes);
        }
    };

    int n_threads = std::min<int>(detail::experiment_thread_cap(),
                                  static_cast<int>(tasks.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    long buckets = config.episodes / config.cadence;
    for (auto& alg : summary.algorithms) {
        alg.curve.reserve(static_cast<std::size_t>(buckets));
        for (long b = 0; b < buckets; ++b)
            alg.curve.push_back(
                detail::aggregate_bucket(alg.seeds, b * config.cadence, config.cadence));
        detail::check_finite_curve(alg.curve, rule_name(alg.rule));
    }
    return summary;
}

// --- file emission ---

inline void write_curves_csv(std::ostream& out, const RunSummary& summary) {
    out << std::setprecision(17);
    out << "algorithm,episode,mean_return,std_return,mean_max_reward,std_max_reward\n";
    for (const auto& alg : summary.algorithms)
        for (const auto& p : alg.curve)
            out << rule_name(alg.rule) << ',' << p.episode << ',' << p.mean_return << ','
                << p.std_return << ',' << p.mean_max_reward << ',' << p.std_max_reward << '\n';
}

inline std::vector<std::pair<std::string, CurvePoint>> read_curves_csv(std::istream& in) {
    std::vector<std::pair<std::string, CurvePoint>> rows;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("curves csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw std::runtime_error("curves csv: malformed row");
        CurvePoint p;
        p.episode = std::stol(fields[1]);
        p.mean_return = std::strtod(fields[2].c_str(), nullptr);
        p.std_return = std::strtod(fields[3].c_str(), nullptr);
        p.mean_max_reward = std::strtod(fields[4].c_str(), nullptr);
        p.std_max_reward = std::strtod(fields[5].c_str(), nullptr);
        rows.emplace_back(fields[0], p);
    }
    return rows;
}

inline void write_policy_trace(std::ostream& out, const GridLayout& layout,
                               const AlgorithmSummary& alg) {
    const char action_letters[] = {'U', 'D', 'L', 'R'};
    out << std::setprecision(17);
    out << "# greedy rollout per seed: actions, visited cells (row,col), return, max reward\n";
    for (const auto& seed : alg.seeds) {
        out << "seed " << seed.seed << " actions=";
        for (int a : seed.final_rollout.actions) out << action_letters[a];
        out << " cells=";
        for (std::size_t i = 0; i < seed.final_rollout.observations.size(); ++i) {
            int obs = seed.final_rollout.observations[i];
            if (i) out << "->";
            out << '(' << obs / layout.cols << ',' << obs % layout.cols << ')';
        }
        out << " return=" << seed.final_rollout.cumulative_return
            << " max_reward=" << seed.final_rollout.max_reward << '\n';
    }
}

inline void write_qtable_csv(std::ostream& out, const QTable& q) {
    out << std::setprecision(17);
    out << "state";
    for (int a = 0; a < q.n_actions(); ++a) out << ",action" << a;
    out << '\n';
    for (int s = 0; s < q.n_states(); ++s) {
        out << s;
        for (int a = 0; a < q.n_actions(); ++a) out << ',' << q(s, a);
        out << '\n';
    }
}

/// Writes curves.csv, policy_<alg>.txt, and qtable_<alg>.csv under out_dir.
inline void write_experiment_files(const ExperimentConfig& config, const RunSummary& summary) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + config.out_dir + ": " +
                                 ec.message());
    auto open = [&](const std::string& name) {
        fs::path path = fs::path(config.out_dir) / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        return out;
    };

    {
        auto out = open("curves.csv");
        write_curves_csv(out, summary);
    }
    GridLayout layout = config.layout();
    for (const auto& alg : summary.algorithms) {
        {
            auto out = open("policy_" + rule_name(alg.rule) + ".txt");
            write_policy_trace(out, layout, alg);
        }
        {
            auto out = open("qtable_" + rule_name(alg.rule) + ".csv");
            write_qtable_csv(out, alg.seeds.front().final_q);
        }
    }
}

}  // namespace maxdp
