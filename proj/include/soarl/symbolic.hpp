/**
 * symbolic.hpp
 *
 * Grounded propositions, proposition-set states, STRIPS-style action models
 * and the line-oriented domain-description format.
 */

#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace soarl {

/// A grounded atom such as `haveCoffee` or `at(a,b)`. The argument list is
/// purely syntactic; no variables are ever lifted.
struct Proposition {
  std::string name;
  std::vector<std::string> args;

  Proposition() = default;
  Proposition(std::string name, std::vector<std::string> args = {});
  Proposition(const char* name) : Proposition(std::string(name)) {}

  /// `name` or `name(a1,a2)`.
  std::string str() const;

  friend bool operator==(const Proposition&, const Proposition&) = default;
  friend auto operator<=>(const Proposition&, const Proposition&) = default;
};

/// Parses the textual form produced by Proposition::str(). Throws
/// std::invalid_argument on malformed input.
Proposition parse_proposition(std::string_view text);

using PropositionSet = std::set<Proposition>;

bool is_subset(const PropositionSet& sub, const PropositionSet& super);
bool intersects(const PropositionSet& a, const PropositionSet& b);
PropositionSet set_union(const PropositionSet& a, const PropositionSet& b);
PropositionSet set_difference(const PropositionSet& a, const PropositionSet& b);
PropositionSet set_intersection(const PropositionSet& a,
                                const PropositionSet& b);

/// `{a, b(c)}` with propositions in sorted order.
std::string to_string(const PropositionSet& props);

class SymbolicState {
 public:
  SymbolicState() = default;
  SymbolicState(std::initializer_list<Proposition> props) : holds_(props) {}
  explicit SymbolicState(PropositionSet holds) : holds_(std::move(holds)) {}

  const PropositionSet& holds() const { return holds_; }
  bool contains(const Proposition& p) const { return holds_.contains(p); }
  bool empty() const { return holds_.empty(); }
  std::size_t size() const { return holds_.size(); }

  /// Restriction of the state to `vocabulary`.
  SymbolicState project(const PropositionSet& vocabulary) const;

  std::string str() const { return to_string(holds_); }

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;
  friend auto operator<=>(const SymbolicState&, const SymbolicState&) = default;

 private:
  PropositionSet holds_;
};

struct ActionModel {
  std::string name;
  PropositionSet pre_pos;
  PropositionSet pre_neg;
  PropositionSet eff_pos;
  PropositionSet eff_neg;

  /// Throws std::invalid_argument if pre_pos/pre_neg or eff_pos/eff_neg
  /// overlap, or the name is not an identifier.
  void validate() const;

  /// Every proposition mentioned anywhere in the model.
  PropositionSet mentioned() const;

  friend bool operator==(const ActionModel&, const ActionModel&) = default;
};

class Domain {
 public:
  const PropositionSet& vocabulary() const { return vocabulary_; }
  const std::map<std::string, ActionModel>& actions() const { return actions_; }

  void add_proposition(const Proposition& p);

  /// Throws std::invalid_argument on a duplicate name, an invalid model, or
  /// a proposition outside the vocabulary.
  void add_action(ActionModel action);

  /// Replaces an existing model of the same name (used when refinement
  /// shrinks preconditions).
  void replace_action(ActionModel action);

  bool has_action(const std::string& name) const {
    return actions_.contains(name);
  }
  const ActionModel& action(const std::string& name) const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  void check_model(const ActionModel& action) const;

  PropositionSet vocabulary_;
  std::map<std::string, ActionModel> actions_;
};

/// A recorded change of symbolic state together with the extrinsic reward
/// accumulated while it happened.
struct SymbolicTransition {
  SymbolicState before;
  SymbolicState after;
  double extrinsic_reward = 0.0;

  /// Throws std::invalid_argument when before == after.
  SymbolicTransition(SymbolicState before, SymbolicState after,
                     double extrinsic_reward);
};

bool is_executable(const SymbolicState& state, const ActionModel& action);

/// ((state - eff_neg) ∪ eff_pos). Throws NotExecutable when the
/// preconditions do not hold.
SymbolicState apply(const SymbolicState& state, const ActionModel& action);

/// Parses the line-oriented domain format:
///
///     # comment
///     prop haveCoffee
///     prop at(room1,desk)
///     action getCoffee pre+ - pre- haveCoffee eff+ haveCoffee eff- -
///
/// Throws ParseError carrying the 1-based line number and offending token.
Domain parse_domain(std::string_view text);

/// Canonical document: propositions sorted, actions sorted by name.
std::string serialize_domain(const Domain& domain);

}  // namespace soarl
