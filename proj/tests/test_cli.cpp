#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "maxdp/cli.hpp"

using namespace maxdp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status;
    std::string out;
    std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int status = cli_main(std::move(args), out, err);
    return {status, out.str(), err.str()};
}

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("cli oracle on the default layout") {
    CliRun r = run_cli({"oracle", "default", "--horizon", "11"});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("best_cumulative_return = 27.5") != std::string::npos);
    CHECK(r.out.find("best_max_raw_reward = 9") != std::string::npos);
}

TEST_CASE("cli solve on the chain fixture") {
    fs::path mdp = write_temp("maxdp_chain2.mdp",
                              "mdp 2 1 0.5\n"
                              "0 0 0 0 1\n"
                              "1 0 2 0 1\n");
    CliRun r = run_cli({"solve", mdp.string(), "--operator", "max-opt"});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("converged = yes") != std::string::npos);
    CHECK(r.out.find("Q(0) = 1") != std::string::npos);
    CHECK(r.out.find("Q(1) = 2") != std::string::npos);
}

TEST_CASE("cli solve evaluation operator with a policy file") {
    fs::path mdp = write_temp("maxdp_chain2b.mdp",
                              "mdp 2 1 0.5\n"
                              "0 0 0 0 1\n"
                              "1 0 2 0 1\n");
    fs::path pol = write_temp("maxdp_chain2b.policy", "0\n0\n");
    CliRun r = run_cli({"solve", mdp.string(), "--operator", "max-eval", "--policy",
                        pol.string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("Q(0) = 1") != std::string::npos);
}

TEST_CASE("cli markovize writes a loadable mdp file") {
    fs::path layout = write_temp("maxdp_tiny.layout",
                                 "grid 1 2 0 0 3 -1\n"
                                 "0 1.5\n");
    fs::path out_mdp = fs::temp_directory_path() / "maxdp_tiny.mdp";
    CliRun r = run_cli({"markovize", layout.string(), "-o", out_mdp.string()});
    REQUIRE(r.status == 0);
    std::ifstream in(out_mdp);
    REQUIRE(in);
    TabularMdp mdp = read_mdp(in);
    CHECK(mdp.n_states() == 4);
    CHECK(mdp.n_actions() == 4);
}

TEST_CASE("cli run executes a small experiment") {
    fs::path out_dir = fs::temp_directory_path() / "maxdp_cli_run";
    fs::remove_all(out_dir);
    fs::path config = write_temp("maxdp_small.cfg",
                                 "env.layout = default\n"
                                 "learner.rule = qlearning\n"
                                 "learner.alpha = 0.01\n"
                                 "learner.gamma = 0.99\n"
                                 "schedule.start = 0.2\n"
                                 "schedule.end = 0.0\n"
                                 "schedule.over = 100\n"
                                 "episodes = 200\n"
                                 "seeds = 2\n"
                                 "cadence = 100\n"
                                 "out_dir = " + out_dir.string() + "\n");
    CliRun r = run_cli({"run", config.string(), "--seed", "3"});
    REQUIRE(r.status == 0);
    CHECK(fs::exists(out_dir / "curves.csv"));
    CHECK(r.out.find("qlearning") != std::string::npos);
    fs::remove_all(out_dir);
}

TEST_CASE("cli errors exit nonzero with a message") {
    CliRun missing = run_cli({"run", "missing.cfg"});
    CHECK(missing.status != 0);
    CHECK(missing.err.find("missing.cfg") != std::string::npos);

    CliRun unknown_flag = run_cli({"oracle", "default", "--frobnicate"});
    CHECK(unknown_flag.status != 0);
    CHECK_FALSE(unknown_flag.err.empty());

    CliRun no_sub = run_cli({});
    CHECK(no_sub.status != 0);

    CliRun bad_operator = run_cli({"solve", "x.mdp", "--operator", "bogus"});
    CHECK(bad_operator.status != 0);
}

TEST_CASE("cli help exits zero") {
    CliRun r = run_cli({"--help"});
    CHECK(r.status == 0);
    CHECK(r.out.find("oracle") != std::string::npos);
}
