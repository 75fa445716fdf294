#include "soarl/meta_controller.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "soarl/errors.hpp"

namespace soarl {

void RewardDictionary::append(const StatePair& pair, double reward) {
  if (pair.first == pair.second) {
    throw std::invalid_argument("reward dictionary pair must change state");
  }
  entries_[pair].push_back(reward);
}

const std::vector<double>& RewardDictionary::rewards(
    const StatePair& pair) const {
  auto it = entries_.find(pair);
  if (it == entries_.end()) {
    throw MissingPair("no rewards for " + pair.first.str() + " -> " +
                      pair.second.str());
  }
  return it->second;
}

bool is_under_exploration(std::size_t executions, double sr,
                          std::size_t count_threshold, double sr_threshold) {
  return executions < count_threshold || sr < sr_threshold;
}

ActionModel learn_action_model(const SymbolicTransition& transition,
                               const PropositionSet& vocabulary,
                               std::string name) {
  const auto& before = transition.before.holds();
  const auto& after = transition.after.holds();
  ActionModel m;
  m.name = std::move(name);
  m.pre_pos = before;
  m.pre_neg = set_difference(vocabulary, before);
  m.eff_pos = set_difference(after, before);
  m.eff_neg = set_difference(before, after);
  m.validate();
  return m;
}

ActionModelLearner::Observation ActionModelLearner::observe(
    const SymbolicTransition& t, const PropositionSet& vocabulary) {
  const auto& before = t.before.holds();
  const auto& after = t.after.holds();
  const auto signature = std::make_pair(set_difference(after, before),
                                        set_difference(before, after));
  const StatePair pair{t.before, t.after};

  Observation obs;
  auto it = by_effects_.find(signature);
  if (it == by_effects_.end()) {
    obs.name = "act" + std::to_string(next_id_++);
    obs.created = true;
    by_effects_.emplace(signature, obs.name);
    models_.emplace(obs.name, learn_action_model(t, vocabulary, obs.name));
    provenance_[obs.name].push_back(pair);
    return obs;
  }

  obs.name = it->second;
  auto& model = models_.at(obs.name);
  auto pre_pos = set_intersection(model.pre_pos, before);
  auto pre_neg = set_intersection(model.pre_neg,
                                  set_difference(vocabulary, before));
  obs.refined = pre_pos != model.pre_pos || pre_neg != model.pre_neg;
  model.pre_pos = std::move(pre_pos);
  model.pre_neg = std::move(pre_neg);

  auto& pairs = provenance_[obs.name];
  if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) {
    pairs.push_back(pair);
  }
  return obs;
}

namespace {

double exploration_bonus(const ActionModelStats& stats, double c) {
  return stats.under_exploration ? c * (1.0 - stats.sr) : 0.0;
}

}  // namespace

double reward_weight(const RewardDictionary& dict, const StatePair& pair,
                     const ActionModelStats& stats, double c) {
  const auto& rs = dict.rewards(pair);
  const double mean =
      std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
  return mean + exploration_bonus(stats, c);
}

double reward_weight(const RewardDictionary& dict,
                     std::span<const StatePair> pairs,
                     const ActionModelStats& stats, double c) {
  if (pairs.empty()) {
    throw MissingPair("model " + stats.model.name + " has no recorded pairs");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& pair : pairs) {
    for (double r : dict.rewards(pair)) {
      sum += r;
      ++n;
    }
  }
  return sum / static_cast<double>(n) + exploration_bonus(stats, c);
}

std::vector<SymbolicOption*> map_actions_to_options(
    const Plan& plan, const OptionMapping& mapping,
    std::map<std::string, SymbolicOption>& options) {
  std::vector<SymbolicOption*> out;
  out.reserve(plan.steps.size());
  for (const auto& step : plan.steps) {
    auto m = mapping.find(step);
    if (m == mapping.end()) throw UnmappedAction("no option for " + step);
    auto o = options.find(m->second);
    if (o == options.end()) {
      throw UnmappedAction("option " + m->second + " for " + step +
                           " does not exist");
    }
    out.push_back(&o->second);
  }
  return out;
}

SymbolicState update_goal(const Domain& domain,
                          const std::map<std::string, double>& weights,
                          const SymbolicState& initial,
                          const std::optional<SymbolicState>& config_goal,
                          std::size_t max_length) {
  if (config_goal) return *config_goal;

  // Best summed weight of reaching each state within the length bound; the
  // goal is the reached state with the largest value, preferring fewer
  // steps and then the smaller state.
  std::map<SymbolicState, double> best{{initial, 0.0}};
  std::map<SymbolicState, double> frontier{{initial, 0.0}};
  SymbolicState goal = initial;
  double goal_value = 0.0;
  bool found = false;
  for (std::size_t depth = 0; depth < max_length && !frontier.empty(); ++depth) {
    std::map<SymbolicState, double> next;
    for (const auto& [state, value] : frontier) {
      for (const auto& [name, action] : domain.actions()) {
        if (!is_executable(state, action)) continue;
        auto w = weights.find(name);
        const double v = value + (w == weights.end() ? 0.0 : w->second);
        auto to = apply(state, action);
        auto n = next.find(to);
        if (n == next.end() || v > n->second) next[std::move(to)] = v;
      }
    }
    frontier.clear();
    for (const auto& [state, value] : next) {
      auto b = best.find(state);
      if (b != best.end() && value <= b->second) continue;
      best[state] = value;
      frontier[state] = value;
      if (state != initial && (!found || value > goal_value)) {
        goal = state;
        goal_value = value;
        found = true;
      }
    }
  }
  return goal;
}

// ---------------------------------------------------------------------------

MetaController::MetaController(ControllerConfig config, const GridMap& map,
                               TaskSpec task, LimitationSet limitation,
                               Annotator annotator, SkillLibrary* library,
                               std::uint64_t seed)
    : config_(std::move(config)),
      map_(map),
      task_(task),
      limitation_(std::move(limitation)),
      annotator_(std::move(annotator)),
      library_(library),
      rng_(seed),
      global_(seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.q.validate();
  for (const auto& p : config_.planning_vocabulary) domain_.add_proposition(p);
  if (config_.goal && !is_subset(config_.goal->holds(),
                                 config_.planning_vocabulary)) {
    throw std::invalid_argument("goal " + config_.goal->str() +
                                " is outside the planning vocabulary");
  }
}

SymbolicState MetaController::abstract(const RawState& s) const {
  return label_state(s, map_).project(config_.planning_vocabulary);
}

bool MetaController::under_exploration(const SymbolicOption& option) const {
  return is_under_exploration(option.executions(), option.history().rate(),
                              config_.exploration_count_threshold,
                              config_.sr_threshold);
}

std::vector<ActionModelStats> MetaController::model_stats() const {
  std::vector<ActionModelStats> out;
  for (const auto& [name, option_id] : mapping_) {
    const auto& option = options_.at(option_id);
    ActionModelStats s;
    s.model = domain_.action(name);
    s.sr = option.history().rate();
    s.executions = option.executions();
    s.under_exploration = under_exploration(option);
    const auto& pairs = learner_.provenance().at(name);
    s.weight = reward_weight(dict_, pairs, s, config_.exploration_c);
    out.push_back(std::move(s));
  }
  return out;
}

MetaController::OptionRun MetaController::run_option(SymbolicOption& option,
                                                     const RawState& start,
                                                     const StepFn& env_step) {
  OptionRun run;
  run.before = abstract(start);
  if (!option.can_initiate(run.before)) {
    throw ContractViolation("option " + option.id() + " launched in " +
                            run.before.str());
  }
  run.after = run.before;
  run.final_state = start;

  const bool greedy = config_.greedy_when_validated && !under_exploration(option);
  RawState s = start;
  while (run.steps < config_.option_step_budget) {
    const Action a = select_action(option, s, greedy, rng_);
    const StepOutcome out = env_step(s, a);
    ++run.steps;
    run.reward += out.reward;

    const SymbolicState now = abstract(out.next_state);
    const bool changed = now != run.before;
    const bool success = changed && option.terminated(run.before, now);

    double r = intrinsic_reward(out.reward, success, config_.psi);
    if (!limitation_.empty()) {
      const auto contact = violating_propositions(
          label_state(out.next_state, map_), limitation_);
      for (const auto& p : contact) {
        if (auto seen = experience_.find(p, a)) {
          r += predicted_reward(*seen, config_.lambda);
        }
        experience_.record(p, a, out.reward);
      }
    }

    const bool terminal = changed || out.done;
    option.record({option.key(s), a, r, option.key(out.next_state), terminal});
    s = out.next_state;
    if (terminal) {
      run.after = now;
      run.success = success;
      run.env_done = out.done;
      break;
    }
  }
  run.final_state = s;
  option.count_execution();
  update_success_rate(option, run.success);
  return run;
}

void MetaController::observe(const SymbolicTransition& t, bool from_global,
                             std::optional<SemanticLabel>& last_label,
                             EpisodeTrace& trace) {
  const StatePair pair{t.before, t.after};
  if (!from_global || !dict_.contains(pair)) {
    dict_.append(pair, t.extrinsic_reward);
  }

  const auto obs = learner_.observe(t, config_.planning_vocabulary);
  const auto& model = learner_.models().at(obs.name);
  if (obs.created) {
    domain_.add_action(model);
    const std::string id = "o" + obs.name.substr(3);
    auto [it, inserted] = options_.emplace(
        id, SymbolicOption(
                id, model, config_.q, config_.success_window,
                config_.replay_capacity,
                config_.effect_keys
                    ? flag_mask(set_union(model.eff_pos, model.eff_neg))
                    : kAllFlags));
    SymbolicOption& option = it->second;
    mapping_[obs.name] = id;

    const auto label =
        annotate_option(annotator_, option, t.before, t.after, last_label,
                        trace.episode);
    option.set_label(label.str());
    labels_.emplace(id, label);
    trace.events.push_back({trace.episode, "new_model",
                            obs.name + " " + t.before.str() + " -> " +
                                t.after.str() + " label " + label.str()});
    if (library_ != nullptr && lookup_and_reuse(*library_, label, option)) {
      if (config_.freeze_reused) option.set_frozen(true);
      trace.events.push_back(
          {trace.episode, "reuse", id + " " + label.str()});
      spdlog::debug("option {} reuses skill {}", id, label.str());
    }
  } else if (obs.refined) {
    domain_.replace_action(model);
    options_.at(mapping_.at(obs.name)).refine_preconditions(model);
    trace.events.push_back({trace.episode, "refined_model", obs.name});
  }
  last_label = labels_.at(mapping_.at(obs.name));
}

void MetaController::update_library(EpisodeTrace& trace) {
  if (library_ == nullptr) return;
  for (auto& [id, option] : options_) {
    if (under_exploration(option) ||
        option.history().rate() < library_->tau()) {
      continue;
    }
    const auto& label = labels_.at(id);
    Provenance prov{config_.world_id, task_.id, trace.episode, ""};
    const auto now = std::chrono::system_clock::now();
    prov.timestamp = std::to_string(
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
            .count());
    const auto result = try_add_skill(*library_, option, label, prov);
    if (result == AddResult::kAdded || result == AddResult::kReplaced) {
      trace.events.push_back({trace.episode, std::string("library_") +
                                                 std::string(to_string(result)),
                              id + " " + label.str()});
    }
  }
}

EpisodeTrace MetaController::run_episode() {
  EpisodeTrace trace;
  trace.episode = ++episode_;

  RawState s = reset(map_, rng_);
  RewardMachine rm(config_.penalty);
  std::size_t steps = 0;

  const StepFn env_step = [&](const RawState& st, Action a) {
    StepOutcome out = guarded_step(map_, st, a, task_, limitation_, rm);
    ++steps;
    if (out.done_reason == DoneReason::kViolation) trace.violation_step = steps;
    if (!out.done && steps >= config_.max_episode_steps) {
      out.done = true;
      out.done_reason = DoneReason::kMaxSteps;
    }
    trace.extrinsic_return += out.reward;
    trace.done_reason = out.done_reason;
    trace.steps.push_back({st, a, out});
    return out;
  };
  const LabelFn label = [this](const RawState& st) { return abstract(st); };

  // Plan over the learned models.
  trace.stats = model_stats();
  std::map<std::string, double> weights;
  for (const auto& st : trace.stats) weights[st.model.name] = st.weight;
  trace.weights = weights;

  const SymbolicState initial = abstract(s);
  PlanningProblem problem{domain_, initial,
                          update_goal(domain_, weights, initial, config_.goal,
                                      config_.max_plan_length),
                          weights};
  const PlannerOptions popts{config_.max_plan_length};

  std::optional<Plan> plan;
  const bool best_valid = best_plan_ && validate_plan(problem, *best_plan_);
  if (best_valid) {
    plan = solve(problem, plan_quality(problem, best_plan_->steps), popts);
    if (!plan) {
      plan = Plan{best_plan_->steps, plan_quality(problem, best_plan_->steps)};
      trace.plan_reused = true;
    }
  } else {
    plan = solve(problem, std::nullopt, popts);
  }
  // The configured goal is out of reach of the current models: head for
  // the most promising known state instead, so that exploration starts
  // from the frontier rather than from the initial state.
  if (!plan && config_.goal) {
    problem.goal = update_goal(domain_, weights, initial, std::nullopt,
                               config_.max_plan_length);
    if (problem.goal != initial) {
      plan = solve(problem, std::nullopt, popts);
      trace.exploratory_goal = plan.has_value();
    }
  }

  bool env_done = false;
  std::optional<SemanticLabel> last_label;
  bool plan_completed = false;
  double plan_reward = 0.0;
  if (plan) {
    trace.plan = plan->steps;
    auto chosen = map_actions_to_options(*plan, mapping_, options_);
    plan_completed = true;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      SymbolicOption& option = *chosen[i];
      if (!option.can_initiate(abstract(s))) {
        plan_completed = false;
        break;
      }
      const OptionRun run = run_option(option, s, env_step);
      s = run.final_state;
      trace.segments.push_back({Segment::Kind::kOption, option.id(),
                                plan->steps[i], run.before, run.after,
                                run.success, run.steps, run.reward});
      if (run.after != run.before) {
        observe(SymbolicTransition(run.before, run.after, run.reward), false,
                last_label, trace);
      }
      plan_reward += run.reward;
      if (run.env_done) env_done = true;
      if (!run.success) plan_completed = false;
      if (env_done || !run.success) break;
    }
  }

  // Measured quality only counts plans that ran to completion.
  if (plan && plan_completed && !plan->steps.empty() &&
      !trace.exploratory_goal &&
      (!best_measured_quality_ || plan_reward >= *best_measured_quality_)) {
    best_measured_quality_ = plan_reward;
    best_plan_ = Plan{plan->steps, plan_reward};
  }

  // Global exploration until the episode ends.
  while (!env_done) {
    const auto res = global_.run(env_step, label, s,
                                 config_.max_episode_steps - steps);
    s = res.state;
    if (res.transition) {
      trace.segments.push_back({Segment::Kind::kGlobal, "", "",
                                res.transition->before, res.transition->after,
                                true, res.steps, res.reward});
      observe(*res.transition, true, last_label, trace);
    }
    if (res.env_done || steps >= config_.max_episode_steps) env_done = true;
  }

  for (auto& [id, option] : options_) option.train(rng_);
  update_library(trace);

  trace.success = trace.done_reason == DoneReason::kTaskComplete;
  for (const auto& [id, option] : options_) {
    trace.option_sr[id] = option.history().rate();
  }
  trace.library_size = library_ ? library_->size() : 0;
  return trace;
}

std::string MetaController::checkpoint_json() const {
  using nlohmann::json;
  json mapping = json::object();
  for (const auto& [a, o] : mapping_) mapping[a] = o;
  json stats = json::array();
  for (const auto& s : model_stats()) {
    const auto& option = options_.at(mapping_.at(s.model.name));
    stats.push_back({{"action", s.model.name},
                     {"option", option.id()},
                     {"label", labels_.at(option.id()).str()},
                     {"sr", s.sr},
                     {"executions", s.executions},
                     {"under_exploration", s.under_exploration},
                     {"weight", s.weight},
                     {"reused", option.reused()}});
  }
  json rewards = json::array();
  for (const auto& [pair, rs] : dict_.entries()) {
    rewards.push_back(
        {{"before", pair.first.str()}, {"after", pair.second.str()}, {"rewards", rs}});
  }
  json doc = {{"episodes", episode_},
              {"domain", serialize_domain(domain_)},
              {"mapping", mapping},
              {"stats", stats},
              {"reward_dictionary", rewards}};
  if (best_plan_) {
    doc["best_plan"] = {{"steps", best_plan_->steps},
                        {"measured_quality", best_plan_->quality}};
  }
  return doc.dump(1) + "\n";
}

}  // namespace soarl
