#include "soarl/options.hpp"

#include <algorithm>
#include <stdexcept>

#include "soarl/errors.hpp"

namespace soarl {

std::uint64_t StateKey::pack() const {
  return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(x)) << 24) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(y)) << 8) |
         flags;
}

StateKey StateKey::unpack(std::uint64_t packed) {
  StateKey k;
  k.flags = static_cast<std::uint8_t>(packed & 0xFF);
  k.y = static_cast<std::int16_t>(static_cast<std::uint16_t>(packed >> 8));
  k.x = static_cast<std::int16_t>(static_cast<std::uint16_t>(packed >> 24));
  return k;
}

std::uint8_t flag_bit(const Proposition& p) {
  if (p == props::kHaveCoffee) return 1;
  if (p == props::kHaveMail) return 2;
  if (p == props::kDeliveredCoffee) return 4;
  if (p == props::kDeliveredMail) return 8;
  return 0;
}

std::uint8_t flag_mask(const PropositionSet& props) {
  std::uint8_t m = 0;
  for (const auto& p : props) m |= flag_bit(p);
  return m;
}

StateKey make_key(const RawState& s, std::uint8_t mask) {
  StateKey k;
  k.x = static_cast<std::int16_t>(s.agent.x);
  k.y = static_cast<std::int16_t>(s.agent.y);
  std::uint8_t flags = 0;
  if (s.have_coffee) flags |= 1;
  if (s.have_mail) flags |= 2;
  if (s.delivered_coffee) flags |= 4;
  if (s.delivered_mail) flags |= 8;
  k.flags = flags & mask;
  return k;
}

void QParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1)");
  }
  for (double e : {epsilon_start, epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) {
      throw std::invalid_argument("epsilon must lie in [0, 1]");
    }
  }
}

QTable::QTable(QParams params) : params_(params) { params_.validate(); }

double QTable::value(const StateKey& s, Action a) const {
  auto it = values_.find(s.pack());
  if (it == values_.end()) return 0.0;
  return it->second[static_cast<std::size_t>(a)];
}

void QTable::set(const StateKey& s, Action a, double v) {
  auto [it, inserted] = values_.try_emplace(s.pack(), Row{});
  it->second[static_cast<std::size_t>(a)] = v;
}

double QTable::max_value(const StateKey& s) const {
  auto it = values_.find(s.pack());
  if (it == values_.end()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

const QTable::Row* QTable::row(const StateKey& s) const {
  auto it = values_.find(s.pack());
  return it == values_.end() ? nullptr : &it->second;
}

double QTable::epsilon() const {
  if (params_.epsilon_decay_episodes == 0 ||
      clock_ >= params_.epsilon_decay_episodes) {
    return params_.epsilon_end;
  }
  const double frac = static_cast<double>(clock_) /
                      static_cast<double>(params_.epsilon_decay_episodes);
  return params_.epsilon_start +
         frac * (params_.epsilon_end - params_.epsilon_start);
}

void q_update(QTable& q, const StateKey& s, Action a, double reward,
              const StateKey& s_next, bool terminal) {
  const double old = q.value(s, a);
  const double bootstrap = terminal ? 0.0 : q.params().gamma * q.max_value(s_next);
  q.set(s, a, old + q.params().alpha * (reward + bootstrap - old));
}

double intrinsic_reward(double env_reward, bool terminated_successfully,
                        double psi) {
  return terminated_successfully ? env_reward + psi : env_reward;
}

SuccessHistory::SuccessHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("success history capacity must be positive");
  }
}

void SuccessHistory::push(bool succeeded) {
  window_.push_back(succeeded);
  if (succeeded) ++successes_;
  if (window_.size() > capacity_) {
    if (window_.front()) --successes_;
    window_.pop_front();
  }
}

double SuccessHistory::rate() const {
  if (window_.empty()) return 0.0;
  return static_cast<double>(successes_) / static_cast<double>(window_.size());
}

SymbolicOption::SymbolicOption(std::string id, const ActionModel& model,
                               QParams params, std::size_t history_capacity,
                               std::size_t replay_capacity,
                               std::uint8_t key_mask)
    : id_(std::move(id)),
      model_(model),
      key_mask_(key_mask),
      policy_(params),
      history_(history_capacity),
      replay_capacity_(replay_capacity) {}

void SymbolicOption::refine_preconditions(const ActionModel& model) {
  if (model.eff_pos != model_.eff_pos || model.eff_neg != model_.eff_neg) {
    throw ContractViolation("option " + id_ +
                            ": refinement must keep the effect signature");
  }
  model_.pre_pos = model.pre_pos;
  model_.pre_neg = model.pre_neg;
}

bool SymbolicOption::can_initiate(const SymbolicState& symbolic) const {
  return is_executable(symbolic, model_);
}

SymbolicState SymbolicOption::expected_outcome(
    const SymbolicState& start) const {
  PropositionSet next = set_difference(start.holds(), model_.eff_neg);
  next.insert(model_.eff_pos.begin(), model_.eff_pos.end());
  return SymbolicState(std::move(next));
}

bool SymbolicOption::terminated(const SymbolicState& start,
                                const SymbolicState& now) const {
  return is_subset(expected_outcome(start).holds(), now.holds());
}

void SymbolicOption::record(const Experience& e) { pending_.push_back(e); }

void SymbolicOption::train(Rng& rng) {
  if (frozen_) {
    pending_.clear();
    return;
  }
  for (auto it = pending_.rbegin(); it != pending_.rend(); ++it) {
    q_update(policy_, it->state, it->action, it->reward, it->next_state,
             it->terminal);
  }
  if (!replay_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, replay_.size() - 1);
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const auto& e = replay_[pick(rng)];
      q_update(policy_, e.state, e.action, e.reward, e.next_state, e.terminal);
    }
  }
  for (const auto& e : pending_) {
    if (replay_.size() < replay_capacity_) {
      replay_.push_back(e);
    } else if (replay_capacity_ > 0) {
      replay_[replay_next_] = e;
      replay_next_ = (replay_next_ + 1) % replay_capacity_;
    }
  }
  pending_.clear();
  policy_.advance_clock();
}

Action select_action(const QTable& q, const StateKey& key, bool greedy,
                     Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, kActions.size() - 1);
  if (!greedy && coin(rng) < q.epsilon()) return kActions[any(rng)];

  const auto* row = q.row(key);
  if (row == nullptr) {
    return greedy ? kActions.front() : kActions[any(rng)];
  }
  const double best = *std::max_element(row->begin(), row->end());
  if (greedy) {
    for (std::size_t i = 0; i < row->size(); ++i) {
      if ((*row)[i] == best) return kActions[i];
    }
  }
  std::array<std::size_t, kActions.size()> ties{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < row->size(); ++i) {
    if ((*row)[i] == best) ties[n++] = i;
  }
  if (n == 1) return kActions[ties[0]];
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return kActions[ties[pick(rng)]];
}

Action select_action(const SymbolicOption& option, const RawState& state,
                     bool greedy, Rng& rng) {
  return select_action(option.policy(), option.key(state), greedy, rng);
}

double update_success_rate(SymbolicOption& option, bool succeeded) {
  option.history().push(succeeded);
  return option.history().rate();
}

GlobalOptionResult GlobalOption::run(const StepFn& step, const LabelFn& label,
                                     const RawState& start,
                                     std::size_t max_steps) {
  GlobalOptionResult result;
  result.state = start;
  const SymbolicState before = label(start);
  std::uniform_int_distribution<std::size_t> any(0, kActions.size() - 1);
  while (result.steps < max_steps) {
    const auto outcome = step(result.state, kActions[any(rng_)]);
    ++result.steps;
    result.reward += outcome.reward;
    result.state = outcome.next_state;
    const SymbolicState after = label(result.state);
    if (after != before) {
      result.transition.emplace(before, after, result.reward);
    }
    if (outcome.done) {
      result.env_done = true;
      result.done_reason = outcome.done_reason;
    }
    if (result.transition || outcome.done) break;
  }
  return result;
}

GlobalOptionResult run_global_option(GlobalOption& option, const StepFn& step,
                                     const LabelFn& label,
                                     const RawState& start,
                                     std::size_t max_steps) {
  return option.run(step, label, start, max_steps);
}

}  // namespace soarl
