#include "soarl/planner.hpp"

#include <limits>
#include <stdexcept>
#include <utility>

namespace soarl {

double PlanningProblem::weight(const std::string& action) const {
  auto it = weights.find(action);
  return it == weights.end() ? 0.0 : it->second;
}

double plan_quality(const PlanningProblem& problem,
                    const std::vector<std::string>& steps) {
  double q = 0.0;
  for (const auto& s : steps) q += problem.weight(s);
  return q;
}

bool validate_plan(const PlanningProblem& problem, const Plan& plan) {
  SymbolicState state = problem.initial;
  for (const auto& name : plan.steps) {
    if (!problem.domain.has_action(name)) return false;
    const auto& action = problem.domain.action(name);
    if (!is_executable(state, action)) return false;
    state = apply(state, action);
  }
  return is_subset(problem.goal.holds(), state.holds());
}

namespace {

struct Candidate {
  double quality;
  std::vector<std::string> steps;
};

// Higher quality, then fewer steps, then lexicographic order.
bool better(const Candidate& a, const Candidate& b) {
  if (a.quality != b.quality) return a.quality > b.quality;
  if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
  return a.steps < b.steps;
}

class Search {
 public:
  explicit Search(const PlanningProblem& problem) : problem_(problem) {}

  std::optional<Candidate> best_from(const SymbolicState& state,
                                     std::size_t remaining) {
    if (is_subset(problem_.goal.holds(), state.holds())) {
      return Candidate{0.0, {}};
    }
    if (remaining == 0) return std::nullopt;

    auto key = std::make_pair(state, remaining);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::optional<Candidate> best;
    for (const auto& [name, action] : problem_.domain.actions()) {
      if (!is_executable(state, action)) continue;
      auto tail = best_from(apply(state, action), remaining - 1);
      if (!tail) continue;
      Candidate c;
      c.quality = problem_.weight(name) + tail->quality;
      c.steps.reserve(tail->steps.size() + 1);
      c.steps.push_back(name);
      c.steps.insert(c.steps.end(), tail->steps.begin(), tail->steps.end());
      if (!best || better(c, *best)) best = std::move(c);
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  const PlanningProblem& problem_;
  std::map<std::pair<SymbolicState, std::size_t>, std::optional<Candidate>>
      memo_;
};

}  // namespace

std::optional<Plan> solve(const PlanningProblem& problem,
                          std::optional<double> min_quality,
                          const PlannerOptions& options) {
  for (const auto& p : problem.goal.holds()) {
    if (!problem.domain.vocabulary().contains(p)) {
      throw std::invalid_argument("goal proposition '" + p.str() +
                                  "' is not in the domain vocabulary");
    }
  }
  for (const auto& [name, w] : problem.weights) {
    if (!problem.domain.has_action(name)) {
      throw std::invalid_argument("weight given for unknown action '" + name +
                                  "'");
    }
  }

  Search search(problem);
  auto best = search.best_from(problem.initial, options.max_plan_length);
  if (!best) return std::nullopt;

  Plan plan{std::move(best->steps), 0.0};
  plan.quality = plan_quality(problem, plan.steps);
  if (min_quality && !(plan.quality > *min_quality)) return std::nullopt;
  return plan;
}

}  // namespace soarl
