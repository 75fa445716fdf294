/**
 * harness.hpp
 *
 * Experiment configuration, the scratch / sequential / transfer protocols,
 * per-episode metrics and the run summary.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soarl/meta_controller.hpp"
#include "soarl/skills.hpp"

namespace soarl {

struct AnnotatorConfig {
  std::string backend = "mock";  // mock | http
  std::string endpoint;
  std::string model;
  int timeout_ms = 10000;
  int max_retries = 2;
  std::string rules;       // mock rule table; empty = bundled
  std::string prompt_dir;  // empty = bundled templates
  double fault_rate = 0.0; // fraction of label answers replaced by prose
};

struct ExperimentConfig {
  std::string map;  // defaults to the bundled world A
  std::string world_id;  // defaults to the map file stem
  std::string protocol = "scratch";  // scratch | sequential | transfer
  int task = 1;
  std::vector<int> tasks = {1, 2, 3};  // stages of the sequential protocol
  int episodes = 3000;
  int max_episode_steps = 500;
  std::vector<std::uint64_t> seeds = {0};
  std::string output = "runs/out";
  std::string library_in;   // `{seed}` is replaced by the seed
  std::string library_out;  // idem
  int threads = 1;

  std::string constraint;
  double penalty = -1.0;
  double lambda = 0.1;

  double step_cost = -0.01;
  double task_reward = 1.0;

  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;
  int option_step_budget = 100;
  double psi = 100.0;
  int success_window = 50;
  int replay_capacity = 20000;
  bool greedy_when_validated = true;
  bool effect_keys = false;

  double exploration_c = 1.0;
  int exploration_count_threshold = 20;
  double sr_threshold = 0.95;
  int max_plan_length = 12;
  std::string goal = "task";  // task (terminal propositions) | auto

  double tau = 0.95;
  bool freeze_reused = false;

  AnnotatorConfig annotator;

  /// Throws ConfigError.
  void validate() const;
  std::string resolved_world_id() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Unknown keys and wrong types throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Defaults, then `file` (if non-empty), then SOARL_<SECTION>_<KEY>
/// environment variables, then `overrides`; last wins. The result is
/// validated.
ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::map<std::string, std::string>& env,
                             const nlohmann::json& overrides);
/// Current process environment restricted to SOARL_ variables.
std::map<std::string, std::string> soarl_environment();

ControllerConfig controller_config(const ExperimentConfig& config);
Annotator make_annotator(const ExperimentConfig& config, std::uint64_t seed);

struct MetricsRow {
  int episode = 0;
  std::uint64_t samples = 0;      // cumulative
  double episode_return = 0.0;    // extrinsic only
  bool success = false;
  std::uint64_t violations = 0;   // cumulative
  std::size_t plan_length = 0;
  std::size_t library_size = 0;
  std::string option_sr;          // id:sr;id:sr
  long violation_step = -1;       // this episode, -1 if none
};

std::string metrics_header();
std::string to_csv_line(const MetricsRow& row);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& csv);

/// First cumulative sample count at which the trailing `window` episodes
/// reach `threshold` success; nothing if never.
std::optional<std::uint64_t> samples_to_criterion(
    const std::vector<MetricsRow>& rows, std::size_t window = 50,
    double threshold = 0.95);

/// Throws std::runtime_error if a cumulative column ever decreases.
void check_cumulative(const std::vector<MetricsRow>& rows);

struct StageResult {
  int task = 0;
  std::vector<MetricsRow> rows;
  std::vector<ControllerEvent> events;
  std::optional<std::uint64_t> samples_to_criterion;
  std::uint64_t total_violations = 0;
  std::size_t library_size_at_start = 0;
  std::string checkpoint;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<StageResult> stages;
  SkillLibrary library;
};

/// Runs every stage of the protocol for one seed. With a non-empty
/// `out_dir`, writes metrics.csv, events.log and checkpoint.json per stage
/// and library.json for the seed.
SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                    const std::filesystem::path& out_dir = {});

/// Validates, echoes the effective config into the output directory and
/// runs all seeds (in parallel up to config.threads).
std::vector<SeedResult> run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::string group;
  std::size_t runs = 0;
  std::size_t reached = 0;
  double samples_mean = 0.0;
  double samples_stddev = 0.0;
  double violations_mean = 0.0;
  double violations_stddev = 0.0;
  double final_return_mean = 0.0;
  double final_return_stddev = 0.0;
};

/// Collects every metrics.csv under the given directories, grouped by
/// directory argument and stage. Throws std::invalid_argument on an empty
/// list or when no metrics are found.
std::vector<SummaryRow> summarize(const std::vector<std::filesystem::path>& dirs);
std::string summary_table(const std::vector<SummaryRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace soarl
