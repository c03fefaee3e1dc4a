#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "osdrl/experiments.hpp"

using namespace osdrl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("osdrl_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = InstabilityConfig::from_json(json::parse(R"({"seed": 4, "grid": [0, 1, 2], "search_budget": 7})"));
    CHECK(c.seed == 4);
    CHECK(c.grid == std::vector<double>{0, 1, 2});
    CHECK(c.search_budget == 7);
    CHECK(c.iterations == 200);

    Overrides o;
    o.seed = 9;
    o.steps = 150;
    o.out = "elsewhere";
    const auto d = InstabilityConfig::from_json(json::parse(R"({"seed": 4, "out": "x"})"), o);
    CHECK(d.seed == 9);
    CHECK(d.iterations == 150);
    CHECK(d.out == fs::path("elsewhere"));

    CHECK(InstabilityConfig::from_json(json(nullptr)).grid == std::vector<double>{0.0, 1.9, 2.1, 10.0});

    auto field_of = [](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of([] { InstabilityConfig::from_json(json::parse(R"({"gird": [0, 1]})")); }) == "gird");
    CHECK(field_of([] { InstabilityConfig::from_json(json::parse(R"({"grid": [1, 0]})")); }) == "grid");
    CHECK(field_of([] { InstabilityConfig::from_json(json::parse(R"({"search_budget": 1001})")); }) == "search_budget");
    CHECK(field_of([] { InstabilityConfig::from_json(json::parse(R"({"iterations": 50})")); }) == "iterations");
    CHECK(field_of([] { InstabilityConfig::from_json(json::parse(R"({"tie_break": "coin"})")); }) == "tie_break");
    CHECK(field_of([] { FrozenLakeConfig::from_json(json::parse(R"({"alpha": 0})")); }) == "alpha");
    CHECK(field_of([] { FrozenLakeConfig::from_json(json::parse(R"({"discount": 1.0})")); }) == "discount");
    CHECK(field_of([] { FrozenLakeConfig::from_json(json::parse(R"({"tracked": [[16, 0]]})")); }) == "tracked");
    CHECK(field_of([] { HistogramsConfig::from_json(json::parse(R"({"bins": 0})")); }) == "bins");
    CHECK(field_of([] { VerifyConfig::from_json(json::parse(R"({"bench_reps": 0})")); }) == "bench_reps");

    const auto h = HistogramsConfig::from_json(json::object(), Overrides{.steps = 6});
    CHECK(h.iterations == std::vector<std::size_t>{0, 3, 6});

    const auto f = FrozenLakeConfig::from_json(json::parse(R"({"epsilon": {"start": 1.0, "end": 0.25, "rate": 0.001}})"));
    CHECK(f.exploration.rate == 0.001);
    CHECK(f.goal_reward == 20.0);
    CHECK(f.alpha == 0.6);
}

TEST_CASE("run_experiment exit codes") {
    std::ostringstream log;
    CHECK(run_experiment("nonsense", json::object(), {}, log) == kExitConfig);
    CHECK(run_experiment("verify", json::parse(R"({"experiment": "frozenlake"})"), {}, log) == kExitConfig);
    CHECK(run_experiment("instability", json::parse(R"({"rewards": {"to_absorbing": 1, "to_self": 1}})"),
                         {.out = scratch("bad_rewards")}, log) == kExitConfig);

    json bad = json::parse(R"({"extra_mdps": [
        {"n_states": 1, "n_actions": 1, "kernel": [1.0], "reward": [0.0], "discount": 1.0}]})");
    log.str("");
    CHECK(run_experiment("verify", bad, {.out = scratch("bad_mdp")}, log) == kExitConfig);
    CHECK(log.str().find("extra_mdps[0]") != std::string::npos);
}

TEST_CASE("instability command") {
    const fs::path out = scratch("instability");
    std::ostringstream log;
    auto config = InstabilityConfig::from_json(json::object(), {.out = out});
    const auto result = cmd_instability(config, log);
    CHECK(result.exit_code == kExitOk);
    CHECK(result.one_step_converged);
    CHECK(result.one_step_report.converged);
    REQUIRE(result.one_step_x1a1.size() == 4);
    CHECK(result.one_step_x1a1[0] == 0.0);
    CHECK(result.one_step_x1a1[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(result.one_step_x1a1[2] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(result.one_step_x1a1[3] == 0.0);
    REQUIRE(result.trigger.has_value());
    CHECK(result.trigger->report.non_convergent);
    CHECK(result.attempts.front().attempt == 0);

    const fs::path dir = out / "instability";
    for (const char* name : {"one_step_probs.csv", "one_step_distances.csv", "one_step_q.csv", "cdrl_probs.csv",
                             "cdrl_distances.csv", "cdrl_q.csv", "search.csv", "summary.json"}) {
        CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary.at("one_step").at("converged") == true);
    CHECK(summary.at("cdrl_trigger").is_object());
    // 201 iterations x 4 entries x 4 grid points plus a header
    CHECK(line_count(dir / "one_step_probs.csv") == 201 * 16 + 1);

    const std::string first = slurp(dir / "cdrl_probs.csv");
    cmd_instability(config, log);
    CHECK(slurp(dir / "cdrl_probs.csv") == first);

    config.search_budget = 0;
    CHECK(cmd_instability(config, log).exit_code == kExitInconclusive);
}

TEST_CASE("histograms command") {
    const fs::path out = scratch("histograms");
    std::ostringstream log;
    const auto result = cmd_histograms(HistogramsConfig::from_json(json::object(), {.out = out}), log);
    CHECK(result.exit_code == kExitOk);
    REQUIRE(result.counts.size() == 5);
    CHECK(result.one_step_bounded);
    CHECK(result.full_non_decreasing);
    CHECK(result.counts[4].full_max > result.counts[4].one_step_max);
    CHECK(fs::exists(out / "histograms" / "counts.csv"));
    CHECK(fs::exists(out / "histograms" / "histograms.csv"));
    CHECK(line_count(out / "histograms" / "counts.csv") == 6);

    HistogramsConfig capped;
    capped.out = out;
    capped.atom_cap = 5;
    const auto tripped = cmd_histograms(capped, log);
    CHECK(tripped.cap_exceeded_at.has_value());
    CHECK(tripped.exit_code == kExitFailure);
}

TEST_CASE("frozenlake command on a short run") {
    const fs::path out = scratch("frozenlake");
    std::ostringstream log;
    auto config = FrozenLakeConfig::from_json(
        json::parse(R"({"seeds": 3, "steps": 2000, "stride": 100, "early_step": 500, "smoothing_window": 300})"),
        {.out = out});
    const auto result = cmd_frozenlake(config, log);
    CHECK(result.exit_code == kExitOk);
    CHECK(result.rows_per_pair == 3 * 21);
    CHECK(result.steps.size() == 21);
    CHECK(result.max_normalization_error < 1e-9);
    const fs::path dir = out / "frozenlake";
    for (const char* name : {"learning.csv", "probs_x5_a3.csv", "probs_x11_a1.csv", "q_error.csv", "summary.json"}) {
        CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    CHECK(line_count(dir / "probs_x5_a3.csv") == 3 * 21 + 1);
    const std::string first = slurp(dir / "learning.csv");
    cmd_frozenlake(config, log);
    CHECK(slurp(dir / "learning.csv") == first);
}

TEST_CASE("verify command writes a report") {
    const fs::path out = scratch("verify");
    std::ostringstream log;
    const auto config = VerifyConfig::from_json(json::parse(R"({"contraction_cases": 20, "lemma_cases": 50,
        "mean_cases": 50, "tracking_steps": 200, "fixed_point_mdps": 2, "fixed_point_policies": 1,
        "benchmark": false})"),
                                                {.out = out});
    const auto result = cmd_verify(config, log);
    CHECK(result.exit_code == kExitOk);
    const auto report = json::parse(slurp(out / "verify" / "report.json"));
    CHECK(report.at("passed") == true);
    CHECK(report.at("properties").size() == result.properties.size());
}
