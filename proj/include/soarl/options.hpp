/**
 * options.hpp
 *
 * Symbolic options over the Office World: tabular Q-learning policies with
 * an ε-greedy schedule, success-rate tracking, and the global random
 * exploration option.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "soarl/office_world.hpp"
#include "soarl/symbolic.hpp"

namespace soarl {

/// Tabular state key: agent cell plus the four task flags, with flags not
/// relevant to the owning option masked out.
struct StateKey {
  std::int16_t x = 0;
  std::int16_t y = 0;
  std::uint8_t flags = 0;  // bit 0 haveCoffee, 1 haveMail, 2 deliveredCoffee,
                           // 3 deliveredMail

  std::uint64_t pack() const;
  static StateKey unpack(std::uint64_t packed);

  friend bool operator==(const StateKey&, const StateKey&) = default;
};

inline constexpr std::uint8_t kAllFlags = 0x0F;

std::uint8_t flag_bit(const Proposition& p);  // 0 if not a task proposition
std::uint8_t flag_mask(const PropositionSet& props);
StateKey make_key(const RawState& s, std::uint8_t mask = kAllFlags);

struct QParams {
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Episodes over which ε decays linearly from start to end.
  std::size_t epsilon_decay_episodes = 1800;

  /// Throws std::invalid_argument outside α∈(0,1], γ∈[0,1), ε∈[0,1].
  void validate() const;

  friend bool operator==(const QParams&, const QParams&) = default;
};

class QTable {
 public:
  using Row = std::array<double, kActions.size()>;

  QTable() = default;
  explicit QTable(QParams params);

  const QParams& params() const { return params_; }

  /// Missing entries read as 0.
  double value(const StateKey& s, Action a) const;
  void set(const StateKey& s, Action a, double v);
  double max_value(const StateKey& s) const;
  const Row* row(const StateKey& s) const;

  /// Episodes of training seen so far; drives the ε schedule and travels
  /// with the table when a policy is reused.
  std::size_t clock() const { return clock_; }
  void set_clock(std::size_t c) { clock_ = c; }
  void advance_clock() { ++clock_; }
  double epsilon() const;

  std::size_t size() const { return values_.size(); }
  const std::unordered_map<std::uint64_t, Row>& entries() const {
    return values_;
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  QParams params_;
  std::size_t clock_ = 0;
  std::unordered_map<std::uint64_t, Row> values_;
};

/// Q(s,a) ← Q(s,a) + α·(r + γ·max_a' Q(s',a')·[¬terminal] − Q(s,a)).
void q_update(QTable& q, const StateKey& s, Action a, double reward,
              const StateKey& s_next, bool terminal);

/// Returns env_reward + ψ on successful termination, env_reward otherwise.
double intrinsic_reward(double env_reward, bool terminated_successfully,
                        double psi);

/// Fixed-capacity window of recent outcomes.
class SuccessHistory {
 public:
  explicit SuccessHistory(std::size_t capacity = 50);

  void push(bool succeeded);
  /// Mean of the window; 0 when empty.
  double rate() const;
  std::size_t size() const { return window_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<bool>& window() const { return window_; }

 private:
  std::size_t capacity_;
  std::deque<bool> window_;
  std::size_t successes_ = 0;
};

struct Experience {
  StateKey state;
  Action action;
  double reward;
  StateKey next_state;
  bool terminal;
};

/// A symbolic option (pre, π, eff): initiation and termination are derived
/// from the pre/eff sets, π is a tabular Q policy.
class SymbolicOption {
 public:
  SymbolicOption(std::string id, const ActionModel& model, QParams params,
                 std::size_t history_capacity = 50,
                 std::size_t replay_capacity = 20000,
                 std::uint8_t key_mask = kAllFlags);

  const std::string& id() const { return id_; }
  const ActionModel& model() const { return model_; }
  /// Preconditions may shrink as the underlying model is refined; effects
  /// are fixed for the lifetime of the option.
  void refine_preconditions(const ActionModel& model);

  std::uint8_t key_mask() const { return key_mask_; }
  StateKey key(const RawState& s) const { return make_key(s, key_mask_); }

  bool can_initiate(const SymbolicState& symbolic) const;
  /// Symbolic state the option is expected to reach from `start`.
  SymbolicState expected_outcome(const SymbolicState& start) const;
  /// β: the expected effects hold in `now`.
  bool terminated(const SymbolicState& start, const SymbolicState& now) const;

  QTable& policy() { return policy_; }
  const QTable& policy() const { return policy_; }
  void set_policy(QTable policy) { policy_ = std::move(policy); }

  SuccessHistory& history() { return history_; }
  const SuccessHistory& history() const { return history_; }
  std::size_t executions() const { return executions_; }
  void count_execution() { ++executions_; }

  /// Buffers a transition for end-of-episode training.
  void record(const Experience& e);
  /// Replays this episode's transitions (newest first), then as many
  /// uniformly sampled older ones; advances the ε clock.
  void train(Rng& rng);
  const std::vector<Experience>& pending() const { return pending_; }
  std::size_t replay_size() const { return replay_.size(); }

  bool frozen() const { return frozen_; }
  void set_frozen(bool f) { frozen_ = f; }

  const std::optional<std::string>& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  bool reused() const { return reused_; }
  void set_reused(bool r) { reused_ = r; }

 private:
  std::string id_;
  ActionModel model_;
  std::uint8_t key_mask_;
  QTable policy_;
  SuccessHistory history_;
  std::size_t executions_ = 0;
  std::size_t replay_capacity_;
  std::vector<Experience> pending_;
  std::vector<Experience> replay_;  // ring buffer
  std::size_t replay_next_ = 0;
  bool frozen_ = false;
  bool reused_ = false;
  std::optional<std::string> label_;
};

/// ε-greedy over the option's Q-table. Greedy mode breaks argmax ties by the
/// fixed action order; exploratory mode breaks them uniformly.
Action select_action(const SymbolicOption& option, const RawState& state,
                     bool greedy, Rng& rng);
Action select_action(const QTable& q, const StateKey& key, bool greedy,
                     Rng& rng);

/// Pushes the outcome and returns the windowed success rate.
double update_success_rate(SymbolicOption& option, bool succeeded);

using StepFn = std::function<StepOutcome(const RawState&, Action)>;
using LabelFn = std::function<SymbolicState(const RawState&)>;

struct GlobalOptionResult {
  std::optional<SymbolicTransition> transition;
  RawState state;
  double reward = 0.0;
  std::size_t steps = 0;
  bool env_done = false;
  DoneReason done_reason = DoneReason::kRunning;
};

/// Always-applicable uniform random walk that stops at the first change of
/// the labelled state.
class GlobalOption {
 public:
  explicit GlobalOption(std::uint64_t seed) : rng_(seed) {}

  bool can_initiate(const RawState&) const { return true; }

  GlobalOptionResult run(const StepFn& step, const LabelFn& label,
                         const RawState& start, std::size_t max_steps);

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

GlobalOptionResult run_global_option(GlobalOption& option, const StepFn& step,
                                     const LabelFn& label,
                                     const RawState& start,
                                     std::size_t max_steps);

}  // namespace soarl
