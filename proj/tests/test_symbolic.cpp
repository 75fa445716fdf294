#include <doctest.h>

#include <random>

#include "soarl/errors.hpp"
#include "soarl/symbolic.hpp"
#include "support/oracles.hpp"

using namespace soarl;

namespace {

ActionModel model(PropositionSet pre_pos, PropositionSet pre_neg,
                  PropositionSet eff_pos = {}, PropositionSet eff_neg = {}) {
  return {"a", std::move(pre_pos), std::move(pre_neg), std::move(eff_pos),
          std::move(eff_neg)};
}

// Random document over n propositions; some carry arguments.
std::string random_document(std::mt19937_64& rng, int index) {
  const int n = 2 + index % 5;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) {
    names.push_back(i % 3 == 2 ? "at(r" + std::to_string(i) + ",desk)"
                               : "q" + std::to_string(i));
  }
  std::string doc = "# generated " + std::to_string(index) + "\n";
  // Declare in reverse so the parser cannot rely on sorted input.
  for (auto it = names.rbegin(); it != names.rend(); ++it) doc += "prop " + *it + "\n";
  std::uniform_int_distribution<int> role(0, 3);
  const int actions = 1 + index % 4;
  for (int a = actions; a >= 1; --a) {
    std::vector<std::string> pp, pn, ep, en;
    for (const auto& name : names) {
      switch (role(rng)) {
        case 1: pp.push_back(name); en.push_back(name); break;
        case 2: pn.push_back(name); ep.push_back(name); break;
        case 3: pp.push_back(name); break;
        default: break;
      }
    }
    auto list = [](const std::vector<std::string>& v) {
      if (v.empty()) return std::string("-");
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
      return s;
    };
    doc += "action act" + std::to_string(a) + " pre+ " + list(pp) + " pre- " +
           list(pn) + " eff+ " + list(ep) + " eff- " + list(en) + "\n";
  }
  return doc;
}

}  // namespace

TEST_CASE("is_executable examples") {
  CHECK(is_executable({"p", "q"}, model({"p"}, {"r"})));
  CHECK_FALSE(is_executable({"p", "r"}, model({"p"}, {"r"})));
  CHECK(is_executable({}, model({}, {})));
  // Inclusive subset: preconditions equal to the state are fine.
  CHECK(is_executable({"p"}, model({"p"}, {})));
}

TEST_CASE("apply examples") {
  CHECK(apply({"haveCoffee"}, model({}, {}, {"deliveredCoffee"}, {"haveCoffee"})) ==
        SymbolicState{"deliveredCoffee"});
  CHECK(apply({"p"}, model({}, {})) == SymbolicState{"p"});
  // Deletion precedes addition.
  CHECK(apply({"p", "q"}, model({}, {}, {"q"}, {"q"})) == SymbolicState{"p", "q"});
  CHECK_THROWS_AS(apply({"r"}, model({}, {"r"})), NotExecutable);
}

TEST_CASE("is_executable and apply agree with the bitmask oracle on all 2^6 states") {
  constexpr int n = 6;
  std::mt19937_64 rng(11);
  std::size_t mismatches = 0;
  for (int k = 0; k < 60; ++k) {
    const auto bits = oracle::random_action(rng, n, "a" + std::to_string(k));
    const auto m = oracle::to_model(bits, n);
    for (oracle::Mask s = 0; s < (1u << n); ++s) {
      const SymbolicState state(oracle::to_set(s, n));
      const bool exec = oracle::executable(s, bits);
      if (is_executable(state, m) != exec) ++mismatches;
      if (exec) {
        const auto next = apply(state, m);
        if (oracle::to_mask(next.holds()) != oracle::apply(s, bits)) ++mismatches;
        CHECK(is_subset(m.eff_pos, next.holds()));
        CHECK_FALSE(intersects(set_difference(m.eff_neg, m.eff_pos), next.holds()));
        CHECK(apply(state, m) == next);
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("parse_domain: smallest document") {
  const auto d = parse_domain(
      "prop haveCoffee\n"
      "action getCoffee pre+ - pre- haveCoffee eff+ haveCoffee eff- -\n");
  CHECK(d.actions().size() == 1);
  CHECK(d.action("getCoffee").eff_pos == PropositionSet{"haveCoffee"});
  CHECK(d.action("getCoffee").pre_neg == PropositionSet{"haveCoffee"});
}

TEST_CASE("parse_domain reports line and token") {
  const std::string doc =
      "# two lines before the bad one\n"
      "prop haveCoffee\n"
      "action getCoffee pre+ - pre- - eff+ haveMail eff- -\n";
  try {
    parse_domain(doc);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.token() == "haveMail");
  }
  CHECK_THROWS_AS(parse_domain("prop a\nfrobnicate b\n"), ParseError);
  CHECK_THROWS_AS(parse_domain("prop a\naction x pre+ a pre- a eff+ - eff- -\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_domain("prop a\naction x pre+ - pre- - eff+ a eff- - junk\n"),
                  ParseError);
}

TEST_CASE("serialize_domain round-trips generated documents") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 24; ++i) {
    const auto doc = random_document(rng, i);
    const auto d = parse_domain(doc);
    const auto canon = serialize_domain(d);
    CHECK(parse_domain(canon) == d);
    CHECK(serialize_domain(parse_domain(canon)) == canon);
  }
}

TEST_CASE("serialize_domain of an empty domain") {
  const auto text = serialize_domain(Domain{});
  CHECK(parse_domain(text) == Domain{});
  CHECK(text.find("action ") == std::string::npos);
}

TEST_CASE("serialize_domain is canonical under insertion order") {
  Domain a, b;
  for (const char* p : {"z", "m", "a"}) a.add_proposition(p);
  for (const char* p : {"a", "z", "m"}) b.add_proposition(p);
  const ActionModel x{"x", {"a"}, {}, {"z"}, {}};
  const ActionModel y{"y", {}, {"m"}, {"m"}, {}};
  a.add_action(x);
  a.add_action(y);
  b.add_action(y);
  b.add_action(x);
  CHECK(serialize_domain(a) == serialize_domain(b));
}

TEST_CASE("domain closure and model validation") {
  Domain d;
  d.add_proposition("p");
  CHECK_THROWS_AS(d.add_action({"x", {"q"}, {}, {}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(d.add_action({"x", {"p"}, {"p"}, {}, {}}), std::invalid_argument);
  d.add_action({"x", {"p"}, {}, {}, {"p"}});
  CHECK_THROWS_AS(d.add_action({"x", {}, {}, {}, {}}), std::invalid_argument);
}

TEST_CASE("proposition text round-trip") {
  for (const char* text : {"haveCoffee", "at(room1,desk)", "on(a,b,c)"}) {
    CHECK(parse_proposition(text).str() == text);
  }
  CHECK_THROWS_AS(parse_proposition("at(room1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_proposition(""), std::invalid_argument);
}

TEST_CASE("SymbolicTransition requires a change") {
  CHECK_THROWS_AS(SymbolicTransition({"p"}, {"p"}, 0.0), std::invalid_argument);
  CHECK_NOTHROW(SymbolicTransition({}, {"p"}, 0.0));
}
