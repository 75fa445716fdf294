#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "soarl/errors.hpp"
#include "soarl/harness.hpp"

using namespace soarl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("soarl_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

MetricsRow row(int episode, std::uint64_t samples, bool success,
               std::uint64_t violations = 0) {
  MetricsRow r;
  r.episode = episode;
  r.samples = samples;
  r.success = success;
  r.violations = violations;
  return r;
}

ExperimentConfig small(const fs::path& out, int episodes) {
  ExperimentConfig c;
  c.output = out.string();
  c.episodes = episodes;
  c.map = std::string(SOARL_TEST_DATA_DIR) + "/maps/office_world_a.txt";
  return c;
}

}  // namespace

TEST_CASE("config layering: defaults, file, environment, overrides") {
  const auto dir = fresh_dir("layering");
  const auto file = dir / "config.json";
  std::ofstream(file) << R"({"episodes": 10, "learning": {"alpha": 0.3, "gamma": 0.8},
                            "constraint": {"text": "from file"}})";
  const std::map<std::string, std::string> env{
      {"SOARL_LEARNING_GAMMA", "0.7"},
      {"SOARL_CONSTRAINT_TEXT", "from env"},
      {"SOARL_SEEDS", "[4, 5]"}};
  const auto c = load_config(file, env, {{"learning", {{"gamma", 0.6}}}});
  CHECK(c.episodes == 10);
  CHECK(c.alpha == 0.3);
  CHECK(c.gamma == 0.6);
  CHECK(c.constraint == "from env");
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.psi == ExperimentConfig{}.psi);

  CHECK(config_from_json(config_to_json(c)).gamma == c.gamma);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(load_config({}, {}, {{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {}, {{"learning", {{"alhpa", 0.1}}}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {}, {{"episodes", "many"}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {}, {{"task", 4}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {}, {{"protocol", "sideways"}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {}, {{"protocol", "transfer"}}), ConfigError);
  CHECK_THROWS_AS(load_config({}, {{"SOARL_EPISODES", "lots"}}, {}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", {}, {}), ConfigError);
}

TEST_CASE("invalid task id leaves no output") {
  const auto dir = fs::temp_directory_path() / "soarl_harness_task4";
  fs::remove_all(dir);
  auto c = small(dir, 10);
  c.task = 4;
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("metrics rows round-trip through CSV") {
  const auto dir = fresh_dir("csv");
  MetricsRow r = row(3, 120, true, 2);
  r.episode_return = 0.93;
  r.plan_length = 2;
  r.library_size = 1;
  r.option_sr = "o1:1.000;o2:0.500";
  r.violation_step = 17;
  std::ofstream(dir / "metrics.csv") << metrics_header() << "\n" << to_csv_line(r) << "\n";
  const auto rows = read_metrics(dir / "metrics.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].samples == 120);
  CHECK(rows[0].success);
  CHECK(rows[0].violations == 2);
  CHECK(rows[0].option_sr == r.option_sr);
  CHECK(rows[0].violation_step == 17);
  CHECK(rows[0].episode_return == doctest::Approx(0.93));

  std::ofstream(dir / "bad.csv") << metrics_header() << "\n1,2,oops\n";
  CHECK_THROWS_AS(read_metrics(dir / "bad.csv"), IoError);
}

TEST_CASE("samples_to_criterion") {
  std::vector<MetricsRow> rows;
  std::vector<bool> outcomes;
  for (int i = 0; i < 200; ++i) outcomes.push_back(i >= 60 || i % 2 == 0);
  for (int i = 0; i < 200; ++i) rows.push_back(row(i + 1, 10u * (i + 1), outcomes[i]));

  // Oracle: slide a 50-wide window by hand.
  std::optional<std::uint64_t> expected;
  for (std::size_t end = 50; end <= rows.size() && !expected; ++end) {
    int hits = 0;
    for (std::size_t j = end - 50; j < end; ++j) hits += outcomes[j];
    if (hits >= 48) expected = rows[end - 1].samples;  // 47.5 rounds up
  }
  CHECK(samples_to_criterion(rows) == expected);

  std::vector<MetricsRow> never(40, row(1, 1, true));
  CHECK_FALSE(samples_to_criterion(never));
}

TEST_CASE("check_cumulative") {
  CHECK_NOTHROW(check_cumulative({row(1, 10, true), row(2, 20, true, 1)}));
  CHECK_THROWS_AS(check_cumulative({row(1, 10, true), row(2, 9, true)}), std::runtime_error);
  CHECK_THROWS_AS(check_cumulative({row(1, 10, true, 2), row(2, 20, true, 1)}),
                  std::runtime_error);
}

TEST_CASE("identical config and seed give identical metrics") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  auto c = small(a, 150);
  c.task = 3;
  run_experiment(c);
  c.output = b.string();
  run_experiment(c);
  const auto ma = slurp(a / "seed_0" / "stage1_task3" / "metrics.csv");
  CHECK_FALSE(ma.empty());
  CHECK(ma == slurp(b / "seed_0" / "stage1_task3" / "metrics.csv"));
  CHECK(fs::exists(a / "config.json"));
  CHECK(fs::exists(a / "seed_0" / "stage1_task3" / "checkpoint.json"));
  CHECK(fs::exists(a / "seed_0" / "library.json"));
  CHECK_NOTHROW(check_cumulative(read_metrics(a / "seed_0" / "stage1_task3" / "metrics.csv")));

  // The echoed config reloads to the same settings.
  const auto echoed = load_config(a / "config.json", {}, {});
  c.output = a.string();
  CHECK(config_to_json(echoed) == config_to_json(c));
}

TEST_CASE("sequential protocol shares the library across stages") {
  const auto dir = fresh_dir("sequential");
  auto c = small(dir, 1500);
  c.protocol = "sequential";
  c.tasks = {1, 2};
  const auto results = run_experiment(c);
  REQUIRE(results.size() == 1);
  REQUIRE(results[0].stages.size() == 2);
  CHECK(results[0].stages[0].library_size_at_start == 0);
  CHECK(results[0].stages[1].library_size_at_start > 0);
  CHECK(fs::exists(dir / "seed_0" / "stage2_task2" / "metrics.csv"));
}

TEST_CASE("transfer loads a library from another world") {
  const auto dir = fresh_dir("transfer");
  auto a = small(dir / "a", 1500);
  a.library_out = (dir / "lib_{seed}.json").string();
  run_experiment(a);
  REQUIRE(fs::exists(dir / "lib_0.json"));

  auto b = small(dir / "b", 20);
  b.map = std::string(SOARL_TEST_DATA_DIR) + "/maps/office_world_b.txt";
  b.protocol = "transfer";
  b.library_in = (dir / "lib_{seed}.json").string();
  const auto results = run_experiment(b);
  CHECK(results[0].stages[0].library_size_at_start > 0);
  CHECK(results[0].stages[0].rows.front().library_size > 0);
}

TEST_CASE("several seeds need a {seed} placeholder") {
  const auto dir = fresh_dir("placeholder");
  auto c = small(dir, 5);
  c.seeds = {1, 2};
  c.library_out = (dir / "lib.json").string();
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("summarize") {
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
  const auto empty = fresh_dir("summary_empty");
  CHECK_THROWS_AS(summarize({empty}), std::invalid_argument);

  const auto dir = fresh_dir("summary");
  const auto stage = dir / "seed_0" / "stage1_task1";
  fs::create_directories(stage);
  {
    std::ofstream out(stage / "metrics.csv");
    out << metrics_header() << "\n";
    for (int i = 1; i <= 60; ++i) {
      MetricsRow r = row(i, 7u * i, true, 3);
      r.episode_return = i > 10 ? 0.5 : 0.0;
      out << to_csv_line(r) << "\n";
    }
  }
  const auto rows = summarize({dir});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 1);
  CHECK(rows[0].reached == 1);
  CHECK(rows[0].samples_mean == 350.0);
  CHECK(rows[0].samples_stddev == 0.0);
  CHECK(rows[0].violations_mean == 3.0);
  CHECK(rows[0].final_return_mean == doctest::Approx(0.5));
  CHECK(summary_table(rows).find("stage1_task1") != std::string::npos);
  CHECK(summary_csv(rows).find("samples_mean") != std::string::npos);

  // A decreasing cumulative column is rejected.
  std::ofstream(stage / "metrics.csv", std::ios::app) << to_csv_line(row(61, 1, true, 3)) << "\n";
  CHECK_THROWS(summarize({dir}));
}
