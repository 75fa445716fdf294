#include <doctest.h>

#include "soarl/constraints.hpp"
#include "soarl/errors.hpp"
#include "support/oracles.hpp"

using namespace soarl;

namespace {

GridMap world(const char* file) {
  return load_map_file(std::string(SOARL_TEST_DATA_DIR) + "/maps/" + file);
}

LimitationSet limit(PropositionSet forbidden) {
  LimitationSet l;
  l.forbidden = std::move(forbidden);
  return l;
}

// A free neighbour of `target` and the action that enters it.
std::pair<Cell, Action> approach(const GridMap& m, Cell target) {
  for (auto a : kActions) {
    for (auto from : {Cell{target.x, target.y + 1}, Cell{target.x, target.y - 1},
                      Cell{target.x + 1, target.y}, Cell{target.x - 1, target.y}}) {
      if (m.in_bounds(from) && !m.at(from) && move(m, from, a) == target) return {from, a};
    }
  }
  FAIL("no approach");
  return {};
}

}  // namespace

TEST_CASE("build_limitation_set") {
  const auto ann = make_mock_annotator();
  const auto reg = office_registry();
  const auto lim = build_limitation_set("Do not pass through plants and printers", ann, reg);
  CHECK(is_subset({props::kOnPlant, props::kOnPrinter}, lim.forbidden));
  CHECK(lim.entities == std::vector<std::string>{"plant", "printer"});
  CHECK(lim.source_constraint == "Do not pass through plants and printers");

  auto stone_reg = reg;
  stone_reg.add("stone", {Proposition("onStone")});
  const auto stone = build_limitation_set("Do not touch the stone", ann, stone_reg);
  CHECK(stone.forbidden == PropositionSet{Proposition("onStone")});

  Annotator none;  // no backend: empty text must not need one
  CHECK(build_limitation_set("", none, reg).empty());
}

TEST_CASE("check_violation examples") {
  const auto lim = limit({props::kOnPlant, props::kOnPrinter});
  CHECK(check_violation({props::kOnPlant, props::kHaveCoffee}, lim));
  CHECK_FALSE(check_violation({props::kHaveCoffee}, limit({props::kOnPlant})));
  CHECK_FALSE(check_violation({props::kOnPlant, props::kHaveMail}, LimitationSet{}));
  CHECK(violating_propositions({props::kOnPlant, props::kHaveCoffee}, lim) ==
        PropositionSet{props::kOnPlant});
}

TEST_CASE("check_violation matches a membership scan on all 2^6 states") {
  constexpr int n = 6;
  for (oracle::Mask f = 0; f < (1u << n); f += 5) {
    const auto lim = limit(oracle::to_set(f, n));
    for (oracle::Mask s = 0; s < (1u << n); ++s) {
      bool expected = false;
      for (int i = 0; i < n; ++i) expected |= (s >> i & 1u) && (f >> i & 1u);
      CHECK(check_violation(SymbolicState(oracle::to_set(s, n)), lim) == expected);
    }
  }
}

TEST_CASE("predicted_reward") {
  CHECK(predicted_reward(-10.0, 0.1) == doctest::Approx(-1.0));
  CHECK(predicted_reward(0.0, 0.1) == 0.0);
  for (double r : {-3.0, 0.5, 7.0}) CHECK(predicted_reward(r, 0.0) == 0.0);

  ExperienceIndex idx;
  CHECK_THROWS_AS(idx.predicted(props::kOnPlant, Action::kUp, 0.1), NoExperience);
  idx.record(props::kOnPlant, Action::kUp, -10.0);
  idx.record(props::kOnPlant, Action::kUp, -4.0);
  CHECK(idx.predicted(props::kOnPlant, Action::kUp, 0.1) == doctest::Approx(-0.4));
  CHECK_FALSE(idx.find(props::kOnPlant, Action::kDown));
}

TEST_CASE("guarded_step on a plant") {
  const auto m = world("office_world_a.txt");
  const auto task = TaskSpec::office(1);
  const auto [from, a] = approach(m, m.cells_of(EntityKind::kPlant).front());
  const RawState s{from};

  RewardMachine rm(-1.0);
  const auto out = guarded_step(m, s, a, task, limit({props::kOnPlant}), rm);
  CHECK(out.done);
  CHECK(out.done_reason == DoneReason::kViolation);
  CHECK(out.reward == -1.0);
  CHECK(rm.broken());
  CHECK_THROWS_AS(guarded_step(m, s, a, task, limit({props::kOnPlant}), rm),
                  ContractViolation);

  RewardMachine open;
  CHECK(guarded_step(m, s, a, task, LimitationSet{}, open) == step(m, s, a, task));
  CHECK_FALSE(open.broken());
}

TEST_CASE("guarded_step on a printer in world B") {
  const auto m = world("office_world_b.txt");
  const auto lim = build_limitation_set("Do not pass through plants and printers",
                                        make_mock_annotator(), office_registry());
  const auto [from, a] = approach(m, m.cells_of(EntityKind::kPrinter).front());
  RewardMachine rm;
  const auto out = guarded_step(m, RawState{from}, a, TaskSpec::office(3), lim, rm);
  CHECK(out.done_reason == DoneReason::kViolation);
}

TEST_CASE("empty limitation set is transparent on random traces") {
  const auto m = world("office_world_b.txt");
  const auto task = TaskSpec::office(3);
  Rng rng(12);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int episode = 0; episode < 20; ++episode) {
    RewardMachine rm;
    auto s = reset(m, rng);
    for (int t = 0; t < 300; ++t) {
      const auto a = kActions[pick(rng)];
      const auto guarded = guarded_step(m, s, a, task, LimitationSet{}, rm);
      REQUIRE(guarded == step(m, s, a, task));
      s = guarded.next_state;
      if (guarded.done) break;
    }
  }
}
