#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soarl/symbolic.hpp"

namespace soarl {

struct PlanningProblem {
  Domain domain;
  SymbolicState initial;
  SymbolicState goal;
  /// Reward weight per action name; absent names weigh 0.
  std::map<std::string, double> weights;

  double weight(const std::string& action) const;
};

struct Plan {
  std::vector<std::string> steps;
  double quality = 0.0;

  friend bool operator==(const Plan&, const Plan&) = default;
};

struct PlannerOptions {
  std::size_t max_plan_length = 12;
};

/// Maximum-quality plan of at most max_plan_length steps. A plan ends the
/// first time the goal holds, so goal ⊆ initial yields the empty plan. Ties
/// go to the shorter plan, then to the lexicographically smaller step list.
///
/// With `min_quality` set, returns nothing unless the best plan's quality is
/// strictly greater. Unreachable goals also return nothing.
std::optional<Plan> solve(const PlanningProblem& problem,
                          std::optional<double> min_quality = std::nullopt,
                          const PlannerOptions& options = {});

/// Sum of weights over `steps`, accumulated left to right.
double plan_quality(const PlanningProblem& problem,
                    const std::vector<std::string>& steps);

/// True iff every step is executable in sequence from the initial state and
/// the final state contains the goal.
bool validate_plan(const PlanningProblem& problem, const Plan& plan);

}  // namespace soarl
