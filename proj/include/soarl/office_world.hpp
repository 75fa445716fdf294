/**
 * office_world.hpp
 *
 * Deterministic Office World gridworld: map loading, transitions, the
 * labeling function from raw states to propositions, and the registry that
 * maps natural-language entity names to propositions.
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "soarl/symbolic.hpp"

namespace soarl {

using Rng = std::mt19937_64;

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Action : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/// Fixed action order; also the greedy tie-break order.
inline constexpr std::array<Action, 4> kActions = {Action::kUp, Action::kDown,
                                                   Action::kLeft,
                                                   Action::kRight};

std::string_view to_string(Action a);
Action action_from_string(std::string_view s);

enum class EntityKind { kCoffee, kMail, kOffice, kPlant, kPrinter, kStart };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view s);

class GridMap {
 public:
  GridMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  /// Adds an edge wall; both directions are blocked. Cells must be
  /// orthogonally adjacent and in bounds.
  void add_wall(Cell a, Cell b);
  bool blocked(Cell a, Cell b) const;
  const std::set<std::pair<Cell, Cell>>& walls() const { return walls_; }

  void place(Cell c, EntityKind kind);
  std::optional<EntityKind> at(Cell c) const;
  const std::map<Cell, EntityKind>& placements() const { return placements_; }
  std::vector<Cell> cells_of(EntityKind kind) const;

 private:
  int width_;
  int height_;
  std::set<std::pair<Cell, Cell>> walls_;  // stored as (min, max)
  std::map<Cell, EntityKind> placements_;
};

struct RawState {
  Cell agent;
  bool have_coffee = false;
  bool have_mail = false;
  bool delivered_coffee = false;
  bool delivered_mail = false;

  friend bool operator==(const RawState&, const RawState&) = default;
  friend auto operator<=>(const RawState&, const RawState&) = default;
};

enum class DoneReason { kRunning, kTaskComplete, kViolation, kMaxSteps };

std::string_view to_string(DoneReason r);

struct StepOutcome {
  RawState next_state;
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::kRunning;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Which deliveries end the episode, and the reward scheme.
struct TaskSpec {
  int id = 1;
  bool needs_coffee = true;
  bool needs_mail = false;
  double step_cost = -0.01;
  double task_reward = 1.0;

  /// Task 1: coffee, task 2: mail, task 3: both. Throws std::invalid_argument
  /// for any other id.
  static TaskSpec office(int id, double step_cost = -0.01,
                         double task_reward = 1.0);

  /// Terminal propositions of the task.
  SymbolicState goal() const;
};

namespace props {
inline const Proposition kHaveCoffee{"haveCoffee"};
inline const Proposition kHaveMail{"haveMail"};
inline const Proposition kDeliveredCoffee{"deliveredCoffee"};
inline const Proposition kDeliveredMail{"deliveredMail"};
inline const Proposition kOnPlant{"onPlant"};
inline const Proposition kOnPrinter{"onPrinter"};
}  // namespace props

/// The four task propositions.
const PropositionSet& task_vocabulary();
/// Task propositions plus contact propositions.
const PropositionSet& office_vocabulary();

/// Natural-language entity name -> propositions that become true on contact.
class EntityRegistry {
 public:
  EntityRegistry() = default;
  explicit EntityRegistry(std::map<std::string, PropositionSet> entities)
      : entities_(std::move(entities)) {}

  void add(std::string entity, PropositionSet props);
  const PropositionSet* find(const std::string& entity) const;
  bool contains(const std::string& entity) const {
    return entities_.contains(entity);
  }
  bool empty() const { return entities_.empty(); }
  const std::map<std::string, PropositionSet>& entities() const {
    return entities_;
  }

 private:
  std::map<std::string, PropositionSet> entities_;
};

EntityRegistry office_registry();

/// Parses the ASCII map format:
///
///     legend c coffee
///     legend s agent-start-region
///     c..
///     .s.
///     walls:
///     wall (0,0)-(1,0)
///
/// `.` is an empty cell. Throws MapParseError with the offending row/column.
GridMap load_map(std::string_view text);
GridMap load_map_file(const std::filesystem::path& path);

/// Agent uniformly over start-region cells; all flags false.
RawState reset(const GridMap& map, Rng& rng);
RawState reset(const GridMap& map, std::uint64_t seed);

Cell move(const GridMap& map, Cell from, Action action);

StepOutcome step(const GridMap& map, const RawState& state, Action action,
                 const TaskSpec& task);

SymbolicState label_state(const RawState& state, const GridMap& map);

}  // namespace soarl
