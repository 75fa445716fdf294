#include <doctest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "soarl/annotator.hpp"
#include "soarl/errors.hpp"

using namespace soarl;

namespace {

AnnotatorRequest label_request(const SymbolicState& before, const SymbolicState& after) {
  AnnotatorRequest r;
  r.kind = RequestKind::kLabelTransition;
  r.prompt = render_template(PromptTemplates::defaults().label_transition,
                             {{"current_state", before.str()},
                              {"next_state", after.str()},
                              {"last_label", "none"}});
  return r;
}

AnnotatorRequest entity_request(const std::string& constraint) {
  AnnotatorRequest r;
  r.kind = RequestKind::kExtractEntities;
  r.prompt = render_template(PromptTemplates::defaults().extract_entities,
                             {{"constraint", constraint}});
  return r;
}

// Local chat-completion endpoint answering with a fixed status and content.
struct FakeEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string last_body;

  FakeEndpoint(int status, std::string content) {
    server.Post("/v1/chat/completions",
                [this, status, content](const httplib::Request& req, httplib::Response& res) {
                  last_body = req.body;
                  res.status = status;
                  nlohmann::json reply = {
                      {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
                  res.set_content(reply.dump(), "application/json");
                });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeEndpoint() {
    server.stop();
    thread.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

}  // namespace

TEST_CASE("parse_label") {
  CHECK(parse_label("Act(coffee, office)").str() == "act(coffee, office)");
  CHECK(parse_label("The label is act(start,coffee).") ==
        SemanticLabel("act", {"start", "coffee"}));
  CHECK(parse_label("  ACT( Mail ,Office ) ").str() == "act(mail, office)");
  CHECK_THROWS_AS(parse_label("no label"), ParseFailure);
  CHECK_THROWS_AS(parse_label(""), ParseFailure);
  try {
    parse_label("go left maybe");
  } catch (const ParseFailure& e) {
    CHECK(e.raw() == "go left maybe");
  }
}

TEST_CASE("canonical labels are idempotent") {
  for (const char* raw : {"Act(Coffee,  Office)", "act(start, coffee)", "X( a )"}) {
    const auto once = parse_label(raw);
    CHECK(parse_label(once.str()) == once);
    CHECK(canonical_token(canonical_token(raw)) == canonical_token(raw));
  }
}

TEST_CASE("parse_entities") {
  EntityRegistry reg;
  for (const char* e : {"plant", "printer", "coffee", "mail"}) reg.add(e, {});
  CHECK(parse_entities("plants and printers", reg) ==
        std::vector<std::string>{"plant", "printer"});
  CHECK(parse_entities("avoid the lava", reg).empty());
  CHECK(parse_entities("PLANT", reg) == std::vector<std::string>{"plant"});
  CHECK(parse_entities("printer, plant, printer", reg) ==
        std::vector<std::string>{"printer", "plant"});
}

TEST_CASE("render_template") {
  CHECK(render_template("a {{x}} b {{y}} {{x}}", {{"x", "1"}}) == "a 1 b  1");
}

TEST_CASE("mock backend labels") {
  MockBackend mock;
  const SymbolicState coffee{props::kHaveCoffee};
  const SymbolicState delivered{props::kDeliveredCoffee};
  auto r = complete(mock, label_request(coffee, delivered));
  REQUIRE(r.label);
  CHECK(r.label->str() == "act(coffee, office)");
  r = complete(mock, label_request({}, coffee));
  CHECK(r.label->str() == "act(start, coffee)");
  // Only the diff matters.
  r = complete(mock, label_request({props::kDeliveredMail},
                                   {props::kDeliveredMail, props::kHaveCoffee}));
  CHECK(r.label->str() == "act(start, coffee)");
  CHECK_THROWS_AS(complete(mock, label_request({}, {props::kOnPlant})), ParseFailure);
}

TEST_CASE("mock backend entities") {
  MockBackend mock;
  const auto r = complete(
      mock, entity_request(
                "We need to be careful not to bump into any plants and printer."));
  REQUIRE(r.entities);
  CHECK(*r.entities == std::vector<std::string>{"plant", "printer"});
  CHECK(complete(mock, entity_request("walk around")).entities->empty());
}

TEST_CASE("mock rules load and reject bad documents") {
  const auto rules = MockRules::from_json_text(
      R"j({"version":1,"labels":[{"added":["haveMail"],"removed":[],"label":"fetch(mail)"}],"entities":[]})j");
  MockBackend mock(rules);
  CHECK(complete(mock, label_request({}, {props::kHaveMail})).label->str() == "fetch(mail)");
  CHECK_THROWS(MockRules::from_json_text("{\"version\": 99, \"labels\": [], \"entities\": []}"));
  CHECK_THROWS(MockRules::from_json_text("not json"));
  const auto bundled = MockRules::load(std::string(SOARL_TEST_DATA_DIR) +
                                       "/annotator/mock_rules.json");
  CHECK(bundled.labels.size() == MockRules::defaults().labels.size());
}

TEST_CASE("prompt templates on disk match the built-in ones") {
  const auto t = PromptTemplates::load(std::string(SOARL_TEST_DATA_DIR) + "/prompts");
  CHECK(t.label_transition == PromptTemplates::defaults().label_transition);
  CHECK(t.extract_entities == PromptTemplates::defaults().extract_entities);
  CHECK_THROWS_AS(PromptTemplates::load("/nonexistent"), IoError);
}

TEST_CASE("fault injection replaces label answers") {
  auto inner = std::make_shared<MockBackend>();
  FaultInjectingBackend always(inner, 1.0, 3);
  CHECK_THROWS_AS(complete(always, label_request({}, {props::kHaveMail})), ParseFailure);
  CHECK(always.injected() == 1);
  // Entity requests are untouched.
  CHECK(complete(always, entity_request("plants")).entities->size() == 1);

  FaultInjectingBackend never(inner, 0.0, 3);
  CHECK(complete(never, label_request({}, {props::kHaveMail})).label);
}

TEST_CASE("http backend talks to a chat-completion endpoint") {
  FakeEndpoint ep(200, "Sure. The label is Act(coffee, office).");
  HttpBackend http({ep.url(), "test-model", "SOARL_TEST_NO_KEY", 2000, 0});
  const auto r = complete(http, label_request({props::kHaveCoffee}, {props::kDeliveredCoffee}));
  REQUIRE(r.label);
  CHECK(r.label->str() == "act(coffee, office)");
  const auto sent = nlohmann::json::parse(ep.last_body);
  CHECK(sent["model"] == "test-model");
  CHECK(sent["temperature"] == 0);
  CHECK(sent["messages"][0]["role"] == "user");
}

TEST_CASE("http backend errors") {
  {
    FakeEndpoint ep(500, "oops");
    HttpBackend http({ep.url(), "m", "SOARL_TEST_NO_KEY", 2000, 1});
    try {
      http.complete_raw(label_request({}, {props::kHaveMail}));
      FAIL("expected HttpError");
    } catch (const HttpError& e) {
      CHECK(e.status() == 500);
    }
  }
  {
    // Nothing listens on port 1.
    HttpBackend http({"http://127.0.0.1:1/v1/chat/completions", "m",
                      "SOARL_TEST_NO_KEY", 200, 1});
    CHECK_THROWS_AS(http.complete_raw(label_request({}, {props::kHaveMail})),
                    AnnotatorTimeout);
  }
  CHECK_THROWS_AS(HttpBackend({"localhost:8000", "m"}), std::invalid_argument);
}
