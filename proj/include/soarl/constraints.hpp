/**
 * constraints.hpp
 *
 * Natural-language constraints enforced through a two-state reward machine.
 * The constraint text is turned into entity names by the annotator, the
 * entities are split into forbidden propositions through the registry, and
 * every step's post-state labels are checked against that set.
 */

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soarl/annotator.hpp"
#include "soarl/office_world.hpp"
#include "soarl/symbolic.hpp"

namespace soarl {

struct LimitationSet {
  PropositionSet forbidden;
  std::string source_constraint;
  std::vector<std::string> entities;

  bool empty() const { return forbidden.empty(); }
};

class RewardMachine {
 public:
  enum class State { kInit, kBroken };

  explicit RewardMachine(double penalty = -1.0) : penalty_(penalty) {}

  State state() const { return state_; }
  bool broken() const { return state_ == State::kBroken; }
  double penalty() const { return penalty_; }

  void reset() { state_ = State::kInit; }
  void break_() { state_ = State::kBroken; }

 private:
  State state_ = State::kInit;
  double penalty_;
};

/// Extract entities with the annotator, then take the union of their
/// registry propositions. Empty text gives an empty set without a backend
/// call.
LimitationSet build_limitation_set(const std::string& constraint_text,
                                   const Annotator& annotator,
                                   const EntityRegistry& registry);

/// Same, from an already extracted entity list.
LimitationSet limitation_set_from_entities(
    const std::string& constraint_text, std::vector<std::string> entities,
    const EntityRegistry& registry);

bool check_violation(const SymbolicState& state, const LimitationSet& lim);
/// The raw intersection, for logging.
PropositionSet violating_propositions(const SymbolicState& state,
                                      const LimitationSet& lim);

/// λ · experienced reward.
double predicted_reward(double experienced_reward, double lambda);

/// Last experienced reward per (forbidden proposition, action).
class ExperienceIndex {
 public:
  void record(const Proposition& p, Action a, double reward);
  std::optional<double> find(const Proposition& p, Action a) const;
  /// Throws NoExperience when (p, a) was never recorded.
  double predicted(const Proposition& p, Action a, double lambda) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<Proposition, Action>, double> entries_;
};

/// One environment step monitored by the reward machine. A violation
/// breaks the machine, replaces the reward with the penalty and ends the
/// episode. Throws ContractViolation if the machine is already broken.
StepOutcome guarded_step(const GridMap& map, const RawState& state,
                         Action action, const TaskSpec& task,
                         const LimitationSet& lim, RewardMachine& rm);

}  // namespace soarl
