#include <doctest.h>

#include <map>

#include "soarl/errors.hpp"
#include "soarl/office_world.hpp"

using namespace soarl;

namespace {

const std::string kSmall =
    "legend c coffee\n"
    "legend o office\n"
    "legend p plant\n"
    "legend s agent-start-region\n"
    "c.s\n"
    "...\n"
    "o.p\n"
    "walls:\n"
    "wall (0,0)-(0,1)\n";

GridMap world(const char* file) {
  return load_map_file(std::string(SOARL_TEST_DATA_DIR) + "/maps/" + file);
}

}  // namespace

TEST_CASE("load_map: small map") {
  const auto m = load_map(kSmall);
  CHECK(m.width() == 3);
  CHECK(m.height() == 3);
  CHECK(m.cells_of(EntityKind::kCoffee) == std::vector<Cell>{{0, 0}});
  CHECK(m.placements().size() == 4);
  CHECK(m.blocked({0, 0}, {0, 1}));
  CHECK(m.blocked({0, 1}, {0, 0}));
}

TEST_CASE("load_map: one coffee cell") {
  const auto m = load_map("legend c coffee\nc..\n...\n...\n");
  CHECK(m.placements().size() == 1);
}

TEST_CASE("load_map errors carry the position") {
  try {
    load_map("legend c coffee\n...\n.x.\n");
    FAIL("expected MapParseError");
  } catch (const MapParseError& e) {
    // Rows count document lines, legend included.
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(load_map("legend c coffee\n...\n..\n"), MapParseError);
  CHECK_THROWS_AS(load_map("legend c teapot\nc\n"), MapParseError);
  CHECK_THROWS_AS(load_map("..\n..\nwalls:\nwall (0,0)-(1,1)\n"), MapParseError);
  CHECK_THROWS_AS(load_map_file("/nonexistent/map.txt"), IoError);
}

TEST_CASE("bundled worlds") {
  const auto a = world("office_world_a.txt");
  const auto b = world("office_world_b.txt");
  CHECK(a.cells_of(EntityKind::kPrinter).empty());
  CHECK(!a.cells_of(EntityKind::kPlant).empty());
  CHECK(!b.cells_of(EntityKind::kPrinter).empty());
  CHECK(!b.cells_of(EntityKind::kPlant).empty());
  for (const auto* m : {&a, &b}) {
    CHECK(m->cells_of(EntityKind::kCoffee).size() == 1);
    CHECK(m->cells_of(EntityKind::kMail).size() == 1);
    CHECK(m->cells_of(EntityKind::kOffice).size() == 1);
    CHECK(!m->cells_of(EntityKind::kStart).empty());
  }
}

TEST_CASE("reset") {
  const auto m = load_map(kSmall);
  const auto s = reset(m, 7);
  CHECK(s.agent == Cell{2, 0});
  CHECK_FALSE(s.have_coffee);
  CHECK_FALSE(s.delivered_mail);
  CHECK(reset(m, 99) == reset(m, 99));
}

TEST_CASE("reset is uniform over the start region") {
  const auto m = load_map("legend s agent-start-region\nss\nss\n");
  std::map<Cell, int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) ++counts[reset(m, seed).agent];
  REQUIRE(counts.size() == 4);
  for (const auto& [cell, n] : counts) {
    CHECK(n / 1000.0 >= 0.2);
    CHECK(n / 1000.0 <= 0.3);
  }
}

TEST_CASE("step examples") {
  const auto m = load_map(kSmall);
  const auto t1 = TaskSpec::office(1);
  RawState s{{0, 1}};

  // Wall between (0,1) and (0,0).
  auto out = step(m, s, Action::kUp, t1);
  CHECK(out.next_state.agent == Cell{0, 1});
  CHECK(out.reward == t1.step_cost);
  CHECK_FALSE(out.done);

  // Bounds.
  out = step(m, RawState{{0, 2}}, Action::kLeft, t1);
  CHECK(out.next_state.agent == Cell{0, 2});

  // Pick up coffee.
  out = step(m, RawState{{1, 0}}, Action::kLeft, t1);
  CHECK(out.next_state.have_coffee);

  // Deliver it.
  RawState holding{{1, 2}};
  holding.have_coffee = true;
  out = step(m, holding, Action::kLeft, t1);
  CHECK(out.next_state.delivered_coffee);
  CHECK_FALSE(out.next_state.have_coffee);
  CHECK(out.done);
  CHECK(out.done_reason == DoneReason::kTaskComplete);
  CHECK(out.reward == doctest::Approx(t1.task_reward + t1.step_cost));
}

TEST_CASE("step: delivered items are not picked up again") {
  const auto m = load_map(kSmall);
  RawState s{{1, 0}};
  s.delivered_coffee = true;
  const auto out = step(m, s, Action::kLeft, TaskSpec::office(2));
  CHECK_FALSE(out.next_state.have_coffee);
}

TEST_CASE("label_state") {
  const auto m = load_map(kSmall);
  CHECK(label_state(RawState{{1, 1}}, m).empty());
  RawState s{{1, 1}};
  s.have_coffee = true;
  CHECK(label_state(s, m) == SymbolicState{props::kHaveCoffee});
  CHECK(label_state(RawState{{2, 2}}, m).contains(props::kOnPlant));
}

TEST_CASE("TaskSpec") {
  CHECK(TaskSpec::office(3).goal() ==
        SymbolicState{props::kDeliveredCoffee, props::kDeliveredMail});
  CHECK_THROWS_AS(TaskSpec::office(4), std::invalid_argument);
  CHECK_THROWS_AS(TaskSpec::office(0), std::invalid_argument);
}

TEST_CASE("random traces keep the world invariants") {
  const auto m = world("office_world_b.txt");
  const auto task = TaskSpec::office(3);
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int episode = 0; episode < 50; ++episode) {
    auto s = reset(m, rng);
    for (int t = 0; t < 400; ++t) {
      const auto a = kActions[pick(rng)];
      const auto out = step(m, s, a, task);
      CHECK(out == step(m, s, a, task));
      const auto labels = label_state(out.next_state, m);
      CHECK_FALSE((labels.contains(props::kHaveCoffee) &&
                   labels.contains(props::kDeliveredCoffee)));
      // Deliveries never revert.
      if (s.delivered_coffee) CHECK(out.next_state.delivered_coffee);
      if (s.delivered_mail) CHECK(out.next_state.delivered_mail);
      // Walls block both ways.
      const auto to = move(m, s.agent, a);
      if (to != s.agent) CHECK_FALSE(m.blocked(s.agent, to));
      s = out.next_state;
      if (out.done) break;
    }
  }
}

TEST_CASE("entity registry") {
  const auto r = office_registry();
  REQUIRE(r.find("plant"));
  CHECK(r.find("plant")->contains(props::kOnPlant));
  CHECK(r.find("printer")->contains(props::kOnPrinter));
  CHECK(r.find("lava") == nullptr);
}
