// soarl: run experiments, summarize runs, and debug the planner.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "soarl/errors.hpp"
#include "soarl/harness.hpp"
#include "soarl/planner.hpp"

namespace {

soarl::SymbolicState parse_state_list(const std::string& text) {
  soarl::PropositionSet props;
  // Split on commas outside parentheses.
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!cur.empty()) props.insert(soarl::parse_proposition(cur));
      cur.clear();
      continue;
    }
    if (c != ' ') cur += c;
  }
  if (!cur.empty()) props.insert(soarl::parse_proposition(cur));
  return soarl::SymbolicState(std::move(props));
}

int cmd_plan(const std::string& domain_file, const std::string& init,
             const std::string& goal, const std::vector<std::string>& weights,
             std::size_t max_length) {
  std::ifstream in(domain_file);
  if (!in) throw soarl::IoError("cannot read " + domain_file);
  std::stringstream buf;
  buf << in.rdbuf();

  soarl::PlanningProblem problem{soarl::parse_domain(buf.str()),
                                 parse_state_list(init),
                                 parse_state_list(goal),
                                 {}};
  for (const auto& w : weights) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("weight must be name=value, got '" + w + "'");
    }
    problem.weights[w.substr(0, eq)] = std::stod(w.substr(eq + 1));
  }
  const auto plan = soarl::solve(problem, std::nullopt, {max_length});
  if (!plan) {
    std::cout << "no plan\n";
    return 2;
  }
  for (std::size_t i = 0; i < plan->steps.size(); ++i) {
    std::cout << i + 1 << ". " << plan->steps[i] << "\n";
  }
  std::cout << "quality " << plan->quality << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic options with semantic skill reuse and constraint monitoring"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment");
  std::string config_file;
  std::optional<std::string> map, constraint, protocol, library_in, library_out,
      output, annotator_backend;
  std::optional<int> task, episodes, threads;
  std::vector<std::uint64_t> seeds;
  run->add_option("--config", config_file, "JSON config file");
  run->add_option("--map", map, "Map file");
  run->add_option("--task", task, "Task id (1 coffee, 2 mail, 3 both)");
  run->add_option("--constraint", constraint, "Natural-language constraint");
  run->add_option("--protocol", protocol, "scratch | sequential | transfer");
  run->add_option("--library-in", library_in, "Skill library to load");
  run->add_option("--library-out", library_out, "Where to save the skill library");
  run->add_option("--seeds", seeds, "Seeds")->expected(1, -1);
  run->add_option("--episodes", episodes, "Episodes per task");
  run->add_option("--output", output, "Output directory");
  run->add_option("--threads", threads, "Seeds run in parallel");
  run->add_option("--annotator", annotator_backend, "mock | http");

  // summarize
  auto* sum = app.add_subcommand("summarize", "Summarize finished runs");
  std::vector<std::string> dirs;
  std::string csv_out;
  sum->add_option("dirs", dirs, "Run directories");
  sum->add_option("--csv", csv_out, "Also write the summary as CSV");

  // plan
  auto* plan = app.add_subcommand("plan", "Plan over a domain file");
  std::string domain_file, init, goal;
  std::vector<std::string> weights;
  std::size_t max_length = 12;
  plan->add_option("--domain", domain_file, "Domain file")->required();
  plan->add_option("--init", init, "Initial propositions, comma separated");
  plan->add_option("--goal", goal, "Goal propositions, comma separated")->required();
  plan->add_option("--weight", weights, "Action weight, name=value");
  plan->add_option("--max-length", max_length, "Maximum plan length");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run) {
      nlohmann::json overrides = nlohmann::json::object();
      if (map) overrides["map"] = *map;
      if (task) overrides["task"] = *task;
      if (constraint) overrides["constraint"]["text"] = *constraint;
      if (protocol) overrides["protocol"] = *protocol;
      if (library_in) overrides["library_in"] = *library_in;
      if (library_out) overrides["library_out"] = *library_out;
      if (!seeds.empty()) overrides["seeds"] = seeds;
      if (episodes) overrides["episodes"] = *episodes;
      if (output) overrides["output"] = *output;
      if (threads) overrides["threads"] = *threads;
      if (annotator_backend) overrides["annotator"]["backend"] = *annotator_backend;
      const auto config =
          soarl::load_config(config_file, soarl::soarl_environment(), overrides);
      const auto results = soarl::run_experiment(config);
      for (const auto& r : results) {
        for (std::size_t i = 0; i < r.stages.size(); ++i) {
          const auto& s = r.stages[i];
          std::cout << "seed " << r.seed << " stage " << i + 1 << " task "
                    << s.task << ": samples-to-criterion "
                    << (s.samples_to_criterion
                            ? std::to_string(*s.samples_to_criterion)
                            : std::string("not reached"))
                    << ", violations " << s.total_violations << "\n";
        }
      }
      std::cout << "output in " << config.output << "\n";
      return 0;
    }
    if (*sum) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      const auto rows = soarl::summarize(paths);
      std::cout << soarl::summary_table(rows);
      if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        out << soarl::summary_csv(rows);
      }
      return 0;
    }
    if (*plan) return cmd_plan(domain_file, init, goal, weights, max_length);
  } catch (const soarl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
