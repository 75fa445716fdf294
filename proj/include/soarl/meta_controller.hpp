/**
 * meta_controller.hpp
 *
 * The outer loop: induce action models from observed symbolic transitions,
 * keep the reward dictionary, weight models by mean reward plus an
 * exploration bonus, plan over the learned domain, run the mapped options,
 * and fall back to random exploration when the plan is exhausted or fails.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soarl/annotator.hpp"
#include "soarl/constraints.hpp"
#include "soarl/office_world.hpp"
#include "soarl/options.hpp"
#include "soarl/planner.hpp"
#include "soarl/skills.hpp"
#include "soarl/symbolic.hpp"

namespace soarl {

using StatePair = std::pair<SymbolicState, SymbolicState>;

class RewardDictionary {
 public:
  /// Throws std::invalid_argument when pair.first == pair.second.
  void append(const StatePair& pair, double reward);
  bool contains(const StatePair& pair) const { return entries_.contains(pair); }
  /// Throws MissingPair.
  const std::vector<double>& rewards(const StatePair& pair) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<StatePair, std::vector<double>>& entries() const {
    return entries_;
  }

  friend bool operator==(const RewardDictionary&,
                         const RewardDictionary&) = default;

 private:
  std::map<StatePair, std::vector<double>> entries_;
};

struct ActionModelStats {
  ActionModel model;
  double sr = 0.0;
  std::size_t executions = 0;
  bool under_exploration = true;
  double weight = 0.0;
};

/// executions < count_threshold OR sr < sr_threshold.
bool is_under_exploration(std::size_t executions, double sr,
                          std::size_t count_threshold, double sr_threshold);

/// Action name -> option id.
using OptionMapping = std::map<std::string, std::string>;

/// Single-transition induction: eff+ = after − before, eff− = before − after,
/// pre+ = before, pre− = vocabulary − before.
ActionModel learn_action_model(const SymbolicTransition& transition,
                               const PropositionSet& vocabulary,
                               std::string name = "act1");

/// Models keyed by effect signature. A transition with a known signature
/// refines that model by intersecting its preconditions with the new
/// evidence; an unknown signature creates `act<k>`.
class ActionModelLearner {
 public:
  struct Observation {
    std::string name;
    bool created = false;
    bool refined = false;  // preconditions shrank
  };

  Observation observe(const SymbolicTransition& transition,
                      const PropositionSet& vocabulary);

  const std::map<std::string, ActionModel>& models() const { return models_; }
  /// Distinct symbolic pairs each model was induced from, in first-seen
  /// order.
  const std::map<std::string, std::vector<StatePair>>& provenance() const {
    return provenance_;
  }
  std::size_t size() const { return models_.size(); }

 private:
  std::map<std::pair<PropositionSet, PropositionSet>, std::string> by_effects_;
  std::map<std::string, ActionModel> models_;
  std::map<std::string, std::vector<StatePair>> provenance_;
  std::size_t next_id_ = 1;
};

/// ρ = mean(R[pair]) + r_e with r_e = c·(1 − sr) while under exploration.
/// Throws MissingPair when the pair has not been observed.
double reward_weight(const RewardDictionary& dict, const StatePair& pair,
                     const ActionModelStats& stats, double c);
/// Same with the mean taken over the concatenated reward lists of `pairs`.
double reward_weight(const RewardDictionary& dict,
                     std::span<const StatePair> pairs,
                     const ActionModelStats& stats, double c);

/// Options for each plan step, in plan order. Throws UnmappedAction.
std::vector<SymbolicOption*> map_actions_to_options(
    const Plan& plan, const OptionMapping& mapping,
    std::map<std::string, SymbolicOption>& options);

/// The configured goal when given; otherwise the state reachable from
/// `initial` through the learned models with the largest summed weight.
SymbolicState update_goal(const Domain& domain,
                          const std::map<std::string, double>& weights,
                          const SymbolicState& initial,
                          const std::optional<SymbolicState>& config_goal,
                          std::size_t max_length = 12);

struct ControllerConfig {
  QParams q;
  double psi = 100.0;
  std::size_t option_step_budget = 100;
  std::size_t success_window = 50;
  std::size_t replay_capacity = 20000;
  double exploration_c = 1.0;
  std::size_t exploration_count_threshold = 20;
  double sr_threshold = 0.95;
  std::size_t max_plan_length = 12;
  std::size_t max_episode_steps = 500;
  double penalty = -1.0;
  double lambda = 0.1;
  /// Validated options (not under exploration) act greedily.
  bool greedy_when_validated = true;
  /// Key option Q-tables on the option's effect propositions only instead
  /// of all task flags.
  bool effect_keys = false;
  /// Reused policies are never updated (diagnostic).
  bool freeze_reused = false;
  /// Propositions the controller plans over; contact propositions are seen
  /// only by the constraint monitor.
  PropositionSet planning_vocabulary = task_vocabulary();
  /// Overrides the dynamic goal.
  std::optional<SymbolicState> goal;
  std::string world_id = "office";
};

struct StepRecord {
  RawState state;
  Action action;
  StepOutcome outcome;
};

struct Segment {
  enum class Kind { kOption, kGlobal };
  Kind kind = Kind::kGlobal;
  std::string option_id;  // empty for the global option
  std::string action;     // model the option realises
  SymbolicState before;
  SymbolicState after;
  bool success = false;
  std::size_t steps = 0;
  double reward = 0.0;
};

struct ControllerEvent {
  int episode = 0;
  std::string kind;  // new_model, refined_model, reuse, library_add, ...
  std::string detail;
};

struct EpisodeTrace {
  int episode = 0;
  std::vector<StepRecord> steps;
  std::vector<Segment> segments;
  std::vector<std::string> plan;
  bool plan_reused = false;  // best previous plan re-executed
  bool exploratory_goal = false;  // planned towards the dynamic goal
  std::map<std::string, double> weights;
  std::vector<ActionModelStats> stats;
  DoneReason done_reason = DoneReason::kRunning;
  double extrinsic_return = 0.0;
  bool success = false;
  std::optional<std::size_t> violation_step;  // 1-based step index
  std::map<std::string, double> option_sr;
  std::size_t library_size = 0;
  std::vector<ControllerEvent> events;
};

class MetaController {
 public:
  /// `library` may be null (no skill reuse); it must outlive the controller.
  MetaController(ControllerConfig config, const GridMap& map, TaskSpec task,
                 LimitationSet limitation, Annotator annotator,
                 SkillLibrary* library, std::uint64_t seed);

  EpisodeTrace run_episode();

  const Domain& domain() const { return domain_; }
  const RewardDictionary& reward_dictionary() const { return dict_; }
  const ActionModelLearner& learner() const { return learner_; }
  const OptionMapping& mapping() const { return mapping_; }
  const std::map<std::string, SymbolicOption>& options() const {
    return options_;
  }
  std::map<std::string, SymbolicOption>& options() { return options_; }
  const std::map<std::string, SemanticLabel>& labels() const { return labels_; }
  const ControllerConfig& config() const { return config_; }
  int episodes_run() const { return episode_; }

  /// Current stats (weights included) for every model.
  std::vector<ActionModelStats> model_stats() const;

  const std::optional<Plan>& best_plan() const { return best_plan_; }
  std::optional<double> best_measured_quality() const {
    return best_measured_quality_;
  }

  /// Domain, mapping, stats and reward dictionary.
  std::string checkpoint_json() const;

  SymbolicState abstract(const RawState& s) const;

 private:
  struct OptionRun {
    SymbolicState before;
    SymbolicState after;
    bool success = false;
    double reward = 0.0;
    std::size_t steps = 0;
    bool env_done = false;
    RawState final_state;
  };

  OptionRun run_option(SymbolicOption& option, const RawState& start,
                       const StepFn& env_step);
  void observe(const SymbolicTransition& t, bool from_global,
               std::optional<SemanticLabel>& last_label, EpisodeTrace& trace);
  void update_library(EpisodeTrace& trace);
  bool under_exploration(const SymbolicOption& option) const;

  ControllerConfig config_;
  const GridMap& map_;
  TaskSpec task_;
  LimitationSet limitation_;
  Annotator annotator_;
  SkillLibrary* library_;
  Rng rng_;
  GlobalOption global_;

  Domain domain_;
  ActionModelLearner learner_;
  RewardDictionary dict_;
  std::map<std::string, SymbolicOption> options_;
  OptionMapping mapping_;
  std::map<std::string, SemanticLabel> labels_;  // by option id
  ExperienceIndex experience_;

  std::optional<Plan> best_plan_;
  std::optional<double> best_measured_quality_;
  int episode_ = 0;
};

}  // namespace soarl
