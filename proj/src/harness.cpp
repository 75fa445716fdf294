#include "soarl/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "soarl/bundled_data.hpp"
#include "soarl/errors.hpp"

extern char** environ;

namespace soarl {

using nlohmann::json;

namespace {

// One place lists every config field with its JSON pointer; serialization,
// parsing and environment overrides all walk this list.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("/map", c.map);
  f("/world_id", c.world_id);
  f("/protocol", c.protocol);
  f("/task", c.task);
  f("/tasks", c.tasks);
  f("/episodes", c.episodes);
  f("/max_episode_steps", c.max_episode_steps);
  f("/seeds", c.seeds);
  f("/output", c.output);
  f("/library_in", c.library_in);
  f("/library_out", c.library_out);
  f("/threads", c.threads);
  f("/constraint/text", c.constraint);
  f("/constraint/penalty", c.penalty);
  f("/constraint/lambda", c.lambda);
  f("/env/step_cost", c.step_cost);
  f("/env/task_reward", c.task_reward);
  f("/learning/alpha", c.alpha);
  f("/learning/gamma", c.gamma);
  f("/learning/epsilon_start", c.epsilon_start);
  f("/learning/epsilon_end", c.epsilon_end);
  f("/learning/epsilon_decay_fraction", c.epsilon_decay_fraction);
  f("/learning/option_step_budget", c.option_step_budget);
  f("/learning/psi", c.psi);
  f("/learning/success_window", c.success_window);
  f("/learning/replay_capacity", c.replay_capacity);
  f("/learning/greedy_when_validated", c.greedy_when_validated);
  f("/learning/effect_keys", c.effect_keys);
  f("/meta/exploration_c", c.exploration_c);
  f("/meta/exploration_count_threshold", c.exploration_count_threshold);
  f("/meta/sr_threshold", c.sr_threshold);
  f("/meta/max_plan_length", c.max_plan_length);
  f("/meta/goal", c.goal);
  f("/skills/tau", c.tau);
  f("/skills/freeze_reused", c.freeze_reused);
  f("/annotator/backend", c.annotator.backend);
  f("/annotator/endpoint", c.annotator.endpoint);
  f("/annotator/model", c.annotator.model);
  f("/annotator/timeout_ms", c.annotator.timeout_ms);
  f("/annotator/max_retries", c.annotator.max_retries);
  f("/annotator/rules", c.annotator.rules);
  f("/annotator/prompt_dir", c.annotator.prompt_dir);
  f("/annotator/fault_rate", c.annotator.fault_rate);
}

void check_keys(const json& j, const json& schema, const std::string& at) {
  if (!j.is_object()) {
    throw ConfigError("config " + (at.empty() ? "root" : at) +
                      " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    const std::string path = at + "/" + key;
    if (!schema.contains(key)) throw ConfigError("unknown config key " + path);
    if (schema.at(key).is_object()) check_keys(value, schema.at(key), path);
  }
}

std::string env_name(std::string_view pointer) {
  std::string name = "SOARL_";
  for (char c : pointer.substr(1)) {
    name += c == '/' ? '_' : static_cast<char>(std::toupper(
                                 static_cast<unsigned char>(c)));
  }
  return name;
}

std::string expand_seed(const std::string& path, std::uint64_t seed) {
  std::string out = path;
  const std::string tag = "{seed}";
  for (auto pos = out.find(tag); pos != std::string::npos;
       pos = out.find(tag, pos)) {
    out.replace(pos, tag.size(), std::to_string(seed));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fmt_double(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

json config_to_json(const ExperimentConfig& config) {
  json j = json::object();
  ExperimentConfig copy = config;
  visit_fields(copy, [&](const char* pointer, auto& value) {
    j[json::json_pointer(pointer)] = value;
  });
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, config_to_json(ExperimentConfig{}), "");
  ExperimentConfig c;
  visit_fields(c, [&](const char* pointer, auto& value) {
    const json::json_pointer ptr(pointer);
    if (!j.contains(ptr)) return;
    const auto& v = j.at(ptr);
    using T = std::decay_t<decltype(value)>;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(std::string(pointer) + ": expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(std::string(pointer) + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(std::string(pointer) + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(std::string(pointer) + ": expected a number");
    } else {
      if (!v.is_array()) throw ConfigError(std::string(pointer) + ": expected an array");
    }
    try {
      value = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string(pointer) + ": " + e.what());
    }
  });
  return c;
}

std::map<std::string, std::string> soarl_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with("SOARL_")) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(entry.substr(0, eq)),
                std::string(entry.substr(eq + 1)));
  }
  return env;
}

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::map<std::string, std::string>& env,
                             const json& overrides) {
  json merged = config_to_json(ExperimentConfig{});
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    json from_file;
    try {
      from_file = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file " + file.string() + ": " + e.what());
    }
    check_keys(from_file, merged, "");
    merged.merge_patch(from_file);
  }

  ExperimentConfig probe;
  visit_fields(probe, [&](const char* pointer, auto& value) {
    auto it = env.find(env_name(pointer));
    if (it == env.end()) return;
    using T = std::decay_t<decltype(value)>;
    const json::json_pointer ptr(pointer);
    if constexpr (std::is_same_v<T, std::string>) {
      merged[ptr] = it->second;
    } else {
      try {
        merged[ptr] = json::parse(it->second);
      } catch (const json::exception&) {
        throw ConfigError(it->first + ": cannot parse '" + it->second + "'");
      }
    }
  });

  if (!overrides.is_null()) {
    check_keys(overrides, merged, "");
    merged.merge_patch(overrides);
  }
  auto config = config_from_json(merged);
  config.validate();
  return config;
}

void ExperimentConfig::validate() const {
  auto valid_task = [](int t) { return t >= 1 && t <= 3; };
  if (protocol != "scratch" && protocol != "sequential" &&
      protocol != "transfer") {
    throw ConfigError("protocol must be scratch, sequential or transfer, got '" +
                      protocol + "'");
  }
  if (!valid_task(task)) {
    throw ConfigError("task must be 1, 2 or 3, got " + std::to_string(task));
  }
  if (protocol == "sequential") {
    if (tasks.empty()) throw ConfigError("sequential protocol needs tasks");
    for (int t : tasks) {
      if (!valid_task(t)) {
        throw ConfigError("task must be 1, 2 or 3, got " + std::to_string(t));
      }
    }
  }
  if (protocol == "transfer" && library_in.empty()) {
    throw ConfigError("transfer protocol needs library_in");
  }
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  if (max_episode_steps <= 0) throw ConfigError("max_episode_steps must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (threads <= 0) throw ConfigError("threads must be positive");
  if (penalty > 0) throw ConfigError("constraint.penalty must not be positive");
  if (lambda < 0) throw ConfigError("constraint.lambda must not be negative");
  if (epsilon_decay_fraction <= 0 || epsilon_decay_fraction > 1) {
    throw ConfigError("learning.epsilon_decay_fraction must be in (0, 1]");
  }
  if (option_step_budget <= 0 || success_window <= 0 || replay_capacity <= 0 ||
      max_plan_length < 0 || exploration_count_threshold < 0) {
    throw ConfigError("budgets and windows must be positive");
  }
  if (sr_threshold < 0 || sr_threshold > 1 || tau < 0 || tau > 1) {
    throw ConfigError("thresholds must be in [0, 1]");
  }
  if (goal != "auto" && goal != "task") {
    throw ConfigError("meta.goal must be auto or task");
  }
  if (annotator.backend != "mock" && annotator.backend != "http") {
    throw ConfigError("annotator.backend must be mock or http");
  }
  if (annotator.backend == "http" && annotator.endpoint.empty()) {
    throw ConfigError("annotator.endpoint is required for the http backend");
  }
  if (annotator.fault_rate < 0 || annotator.fault_rate > 1) {
    throw ConfigError("annotator.fault_rate must be in [0, 1]");
  }
  try {
    QParams q{alpha, gamma, epsilon_start, epsilon_end, 1};
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!map.empty() && !std::filesystem::exists(map)) {
    throw ConfigError("map file " + map + " does not exist");
  }
}

std::string ExperimentConfig::resolved_world_id() const {
  if (!world_id.empty()) return world_id;
  if (map.empty()) return "office_world_a";
  return std::filesystem::path(map).stem().string();
}

ControllerConfig controller_config(const ExperimentConfig& c) {
  ControllerConfig cc;
  cc.q.alpha = c.alpha;
  cc.q.gamma = c.gamma;
  cc.q.epsilon_start = c.epsilon_start;
  cc.q.epsilon_end = c.epsilon_end;
  cc.q.epsilon_decay_episodes = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(c.epsilon_decay_fraction * c.episodes)));
  cc.psi = c.psi;
  cc.option_step_budget = static_cast<std::size_t>(c.option_step_budget);
  cc.success_window = static_cast<std::size_t>(c.success_window);
  cc.replay_capacity = static_cast<std::size_t>(c.replay_capacity);
  cc.exploration_c = c.exploration_c;
  cc.exploration_count_threshold =
      static_cast<std::size_t>(c.exploration_count_threshold);
  cc.sr_threshold = c.sr_threshold;
  cc.max_plan_length = static_cast<std::size_t>(c.max_plan_length);
  cc.max_episode_steps = static_cast<std::size_t>(c.max_episode_steps);
  cc.penalty = c.penalty;
  cc.lambda = c.lambda;
  cc.greedy_when_validated = c.greedy_when_validated;
  cc.effect_keys = c.effect_keys;
  cc.freeze_reused = c.freeze_reused;
  cc.world_id = c.resolved_world_id();
  return cc;
}

Annotator make_annotator(const ExperimentConfig& c, std::uint64_t seed) {
  Annotator a;
  a.world_id = c.resolved_world_id();
  a.max_retries = c.annotator.max_retries;
  if (!c.annotator.prompt_dir.empty()) {
    a.templates = PromptTemplates::load(c.annotator.prompt_dir);
  }
  if (c.annotator.backend == "http") {
    HttpBackendConfig hc;
    hc.endpoint = c.annotator.endpoint;
    hc.model = c.annotator.model;
    hc.timeout_ms = c.annotator.timeout_ms;
    hc.max_retries = c.annotator.max_retries;
    a.backend = std::make_shared<HttpBackend>(hc);
  } else {
    auto rules = c.annotator.rules.empty() ? MockRules::defaults()
                                           : MockRules::load(c.annotator.rules);
    a.backend = std::make_shared<MockBackend>(std::move(rules));
  }
  if (c.annotator.fault_rate > 0) {
    a.backend = std::make_shared<FaultInjectingBackend>(
        a.backend, c.annotator.fault_rate, seed ^ 0x5bd1e995ULL);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Metrics

std::string metrics_header() {
  return "episode,samples,return,success,violations,plan_length,library_size,"
         "option_sr,violation_step";
}

std::string to_csv_line(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", r.episode, r.samples,
                     fmt_double(r.episode_return), r.success ? 1 : 0,
                     r.violations, r.plan_length, r.library_size, r.option_sr,
                     r.violation_step);
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read " + csv.string());
  std::string line;
  std::getline(in, line);
  if (line != metrics_header()) {
    throw IoError(csv.string() + ": unexpected header");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 8) f.emplace_back();  // trailing empty field
    if (f.size() != 9) {
      throw IoError(fmt::format("{}:{}: expected 9 fields", csv.string(), lineno));
    }
    try {
      MetricsRow r;
      r.episode = std::stoi(f[0]);
      r.samples = std::stoull(f[1]);
      r.episode_return = std::stod(f[2]);
      r.success = f[3] == "1";
      r.violations = std::stoull(f[4]);
      r.plan_length = std::stoull(f[5]);
      r.library_size = std::stoull(f[6]);
      r.option_sr = f[7];
      r.violation_step = std::stol(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(fmt::format("{}:{}: {}", csv.string(), lineno, e.what()));
    }
  }
  return rows;
}

std::optional<std::uint64_t> samples_to_criterion(
    const std::vector<MetricsRow>& rows, std::size_t window, double threshold) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  std::size_t successes = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    successes += rows[i].success ? 1 : 0;
    if (i >= window) successes -= rows[i - window].success ? 1 : 0;
    if (i + 1 >= window &&
        static_cast<double>(successes) / static_cast<double>(window) >=
            threshold) {
      return rows[i].samples;
    }
  }
  return std::nullopt;
}

void check_cumulative(const std::vector<MetricsRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].samples < rows[i - 1].samples ||
        rows[i].violations < rows[i - 1].violations) {
      throw std::runtime_error(fmt::format(
          "cumulative column decreases at episode {}", rows[i].episode));
    }
  }
}

// ---------------------------------------------------------------------------
// Protocols

namespace {

std::string option_sr_snapshot(const std::map<std::string, double>& sr) {
  std::string out;
  for (const auto& [id, rate] : sr) {
    if (!out.empty()) out += ';';
    out += fmt::format("{}:{:.3f}", id, rate);
  }
  return out;
}

std::string events_jsonl(const std::vector<ControllerEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += json{{"episode", e.episode}, {"kind", e.kind}, {"detail", e.detail}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string map_path(const ExperimentConfig& c) {
  if (!c.map.empty()) return c.map;
  return std::string(bundled::kDataDir) + "/maps/office_world_a.txt";
}

StageResult run_stage(const ExperimentConfig& config, int task_id,
                      std::uint64_t seed, const GridMap& map,
                      SkillLibrary& library, const Annotator& annotator,
                      const LimitationSet& limitation) {
  ControllerConfig cc = controller_config(config);
  const TaskSpec task =
      TaskSpec::office(task_id, config.step_cost, config.task_reward);
  if (config.goal == "task") cc.goal = task.goal();

  StageResult stage;
  stage.task = task_id;
  stage.library_size_at_start = library.size();
  MetaController controller(cc, map, task, limitation, annotator, &library,
                            seed * 1000003ULL + static_cast<std::uint64_t>(task_id));

  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  stage.rows.reserve(static_cast<std::size_t>(config.episodes));
  for (int e = 0; e < config.episodes; ++e) {
    auto trace = controller.run_episode();
    samples += trace.steps.size();
    if (trace.violation_step) ++violations;
    MetricsRow row;
    row.episode = trace.episode;
    row.samples = samples;
    row.episode_return = trace.extrinsic_return;
    row.success = trace.success;
    row.violations = violations;
    row.plan_length = trace.plan.size();
    row.library_size = trace.library_size;
    row.option_sr = option_sr_snapshot(trace.option_sr);
    row.violation_step =
        trace.violation_step ? static_cast<long>(*trace.violation_step) : -1;
    stage.rows.push_back(std::move(row));
    for (auto& ev : trace.events) stage.events.push_back(std::move(ev));
  }
  stage.samples_to_criterion = samples_to_criterion(stage.rows);
  stage.total_violations = violations;
  stage.checkpoint = controller.checkpoint_json();
  return stage;
}

}  // namespace

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                    const std::filesystem::path& out_dir) {
  const GridMap map = load_map_file(map_path(config));
  const Annotator annotator = make_annotator(config, seed);
  const LimitationSet limitation =
      build_limitation_set(config.constraint, annotator, office_registry());

  SeedResult result;
  result.seed = seed;
  result.library = SkillLibrary(config.tau);
  if (!config.library_in.empty()) {
    result.library = load_library(expand_seed(config.library_in, seed));
  }

  std::vector<int> tasks = {config.task};
  if (config.protocol == "sequential") tasks = config.tasks;

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    spdlog::info("seed {} stage {} task {}", seed, i + 1, tasks[i]);
    auto stage = run_stage(config, tasks[i], seed, map, result.library,
                           annotator, limitation);
    if (!out_dir.empty()) {
      const auto dir =
          out_dir / fmt::format("stage{}_task{}", i + 1, tasks[i]);
      std::filesystem::create_directories(dir);
      std::string csv = metrics_header() + "\n";
      for (const auto& r : stage.rows) csv += to_csv_line(r) + "\n";
      write_file(dir / "metrics.csv", csv);
      write_file(dir / "events.log", events_jsonl(stage.events));
      write_file(dir / "checkpoint.json", stage.checkpoint);
    }
    result.stages.push_back(std::move(stage));
  }

  if (!out_dir.empty()) save_library(result.library, out_dir / "library.json");
  if (!config.library_out.empty()) {
    const std::filesystem::path path = expand_seed(config.library_out, seed);
    if (path.has_parent_path()) {
      std::filesystem::create_directories(path.parent_path());
    }
    save_library(result.library, path);
  }
  return result;
}

std::vector<SeedResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.seeds.size() > 1 && !config.library_out.empty() &&
      config.library_out.find("{seed}") == std::string::npos) {
    throw ConfigError("library_out needs a {seed} placeholder with several seeds");
  }
  const std::filesystem::path out(config.output);
  std::filesystem::create_directories(out);
  write_file(out / "config.json", config_to_json(config).dump(2) + "\n");

  std::vector<SeedResult> results(config.seeds.size());
  std::vector<std::string> failures;
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= config.seeds.size()) return;
        i = next++;
      }
      const auto seed = config.seeds[i];
      try {
        results[i] =
            run_seed(config, seed, out / fmt::format("seed_{}", seed));
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failures.push_back(fmt::format("seed {}: {}", seed, e.what()));
        write_file(out / fmt::format("seed_{}.FAILED", seed),
                   std::string(e.what()) + "\n");
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(
      static_cast<std::size_t>(config.threads), config.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!failures.empty()) {
    std::string msg = "run incomplete:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Summary

namespace {

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

std::vector<SummaryRow> summarize(
    const std::vector<std::filesystem::path>& dirs) {
  if (dirs.empty()) throw std::invalid_argument("no run directories given");
  std::vector<SummaryRow> out;
  for (const auto& dir : dirs) {
    if (!std::filesystem::is_directory(dir)) {
      throw std::invalid_argument(dir.string() + " is not a directory");
    }
    // Stage directory name -> metrics of every seed.
    std::map<std::string, std::vector<std::vector<MetricsRow>>> groups;
    std::vector<std::filesystem::path> files;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto rows = read_metrics(f);
      check_cumulative(rows);
      groups[f.parent_path().filename().string()].push_back(std::move(rows));
    }
    if (groups.empty()) {
      throw std::invalid_argument("no metrics.csv under " + dir.string());
    }
    for (const auto& [stage, runs] : groups) {
      SummaryRow row;
      row.group = dir.filename().string() + "/" + stage;
      if (dir.filename().empty()) {
        row.group = dir.parent_path().filename().string() + "/" + stage;
      }
      row.runs = runs.size();
      std::vector<double> samples, violations, finals;
      for (const auto& rows : runs) {
        if (auto s = samples_to_criterion(rows)) {
          samples.push_back(static_cast<double>(*s));
        }
        violations.push_back(
            rows.empty() ? 0.0 : static_cast<double>(rows.back().violations));
        // Mean return of the trailing 50 episodes.
        const std::size_t k = std::min<std::size_t>(50, rows.size());
        double sum = 0.0;
        for (std::size_t i = rows.size() - k; i < rows.size(); ++i) {
          sum += rows[i].episode_return;
        }
        finals.push_back(k == 0 ? 0.0 : sum / static_cast<double>(k));
      }
      row.reached = samples.size();
      std::tie(row.samples_mean, row.samples_stddev) = mean_stddev(samples);
      std::tie(row.violations_mean, row.violations_stddev) =
          mean_stddev(violations);
      std::tie(row.final_return_mean, row.final_return_stddev) =
          mean_stddev(finals);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::string out = fmt::format("{:<32} {:>5} {:>8} {:>24} {:>20} {:>20}\n",
                                "group", "runs", "reached",
                                "samples-to-criterion", "violations",
                                "final return");
  for (const auto& r : rows) {
    const std::string samples =
        r.reached == 0 ? "n/a"
                       : fmt::format("{:.0f} ± {:.0f}", r.samples_mean,
                                     r.samples_stddev);
    out += fmt::format(
        "{:<32} {:>5} {:>8} {:>24} {:>20} {:>20}\n", r.group, r.runs,
        r.reached, samples,
        fmt::format("{:.1f} ± {:.1f}", r.violations_mean, r.violations_stddev),
        fmt::format("{:.3f} ± {:.3f}", r.final_return_mean,
                    r.final_return_stddev));
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "group,runs,reached,samples_mean,samples_stddev,violations_mean,"
      "violations_stddev,final_return_mean,final_return_stddev\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.3f},{:.3f},{:.3f},{:.3f},{:.6f},{:.6f}\n",
                       r.group, r.runs, r.reached, r.samples_mean,
                       r.samples_stddev, r.violations_mean,
                       r.violations_stddev, r.final_return_mean,
                       r.final_return_stddev);
  }
  return out;
}

}  // namespace soarl
