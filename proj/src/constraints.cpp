#include "soarl/constraints.hpp"

#include <spdlog/spdlog.h>

#include <cctype>

#include "soarl/errors.hpp"

namespace soarl {

LimitationSet limitation_set_from_entities(
    const std::string& constraint_text, std::vector<std::string> entities,
    const EntityRegistry& registry) {
  LimitationSet lim;
  lim.source_constraint = constraint_text;
  for (const auto& e : entities) {
    if (const auto* props = registry.find(e)) {
      lim.forbidden.insert(props->begin(), props->end());
    }
  }
  lim.entities = std::move(entities);
  return lim;
}

LimitationSet build_limitation_set(const std::string& constraint_text,
                                   const Annotator& annotator,
                                   const EntityRegistry& registry) {
  if (registry.empty()) {
    throw std::invalid_argument("entity registry must not be empty");
  }
  bool blank = true;
  for (char c : constraint_text) {
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  }
  if (blank) {
    LimitationSet lim;
    lim.source_constraint = constraint_text;
    return lim;
  }
  if (!annotator.backend) {
    throw AnnotatorUnavailable("constraint given but no annotator backend");
  }

  std::string known;
  for (const auto& [name, props] : registry.entities()) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  AnnotatorRequest request;
  request.kind = RequestKind::kExtractEntities;
  request.world_id = annotator.world_id;
  request.prompt = render_template(annotator.templates.extract_entities,
                                   {{"domain", annotator.domain_info},
                                    {"entities", known},
                                    {"constraint", constraint_text}});
  const auto response = complete(*annotator.backend, request);
  auto entities = parse_entities(response.raw, registry);
  spdlog::debug("constraint '{}' -> {} entities", constraint_text,
                entities.size());
  return limitation_set_from_entities(constraint_text, std::move(entities),
                                      registry);
}

bool check_violation(const SymbolicState& state, const LimitationSet& lim) {
  return intersects(state.holds(), lim.forbidden);
}

PropositionSet violating_propositions(const SymbolicState& state,
                                      const LimitationSet& lim) {
  return set_intersection(state.holds(), lim.forbidden);
}

double predicted_reward(double experienced_reward, double lambda) {
  return lambda * experienced_reward;
}

void ExperienceIndex::record(const Proposition& p, Action a, double reward) {
  entries_[{p, a}] = reward;
}

std::optional<double> ExperienceIndex::find(const Proposition& p,
                                            Action a) const {
  auto it = entries_.find({p, a});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double ExperienceIndex::predicted(const Proposition& p, Action a,
                                  double lambda) const {
  auto r = find(p, a);
  if (!r) {
    throw NoExperience("no experience for (" + p.str() + ", " +
                       std::string(to_string(a)) + ")");
  }
  return predicted_reward(*r, lambda);
}

StepOutcome guarded_step(const GridMap& map, const RawState& state,
                         Action action, const TaskSpec& task,
                         const LimitationSet& lim, RewardMachine& rm) {
  if (rm.broken()) {
    throw ContractViolation("guarded_step called on a broken reward machine");
  }
  StepOutcome out = step(map, state, action, task);
  if (lim.empty()) return out;
  if (check_violation(label_state(out.next_state, map), lim)) {
    rm.break_();
    out.reward = rm.penalty();
    out.done = true;
    out.done_reason = DoneReason::kViolation;
  }
  return out;
}

}  // namespace soarl
