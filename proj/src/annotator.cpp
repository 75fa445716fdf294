#include "soarl/annotator.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>
#include <thread>

#include "soarl/bundled_data.hpp"
#include "soarl/errors.hpp"

namespace soarl {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Semantic labels

std::string canonical_token(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

SemanticLabel::SemanticLabel(std::string predicate,
                             std::vector<std::string> args)
    : predicate_(canonical_token(predicate)) {
  args_.reserve(args.size());
  for (const auto& a : args) args_.push_back(canonical_token(a));
}

std::string SemanticLabel::str() const {
  std::string out = predicate_ + "(";
  for (std::size_t i = 0; i < args_.size(); ++i) {
    if (i > 0) out += ", ";
    out += args_[i];
  }
  return out + ")";
}

namespace {

bool is_label_token(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '+' || c == '-';
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

SemanticLabel parse_label(std::string_view raw) {
  static const std::regex kCall(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\))");
  const std::string text(raw);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kCall);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    std::vector<std::string> args;
    std::string inner = m[2].str();
    bool ok = true;
    std::size_t start = 0;
    while (true) {
      auto comma = inner.find(',', start);
      auto arg = canonical_token(inner.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!is_label_token(arg)) {
        ok = false;
        break;
      }
      args.push_back(std::move(arg));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (ok) return SemanticLabel(m[1].str(), std::move(args));
  }
  throw ParseFailure(text, "no predicate-argument label in '" + text + "'");
}

// ---------------------------------------------------------------------------
// Entities

namespace {

std::vector<std::string> split_items(std::string_view raw) {
  // Separators: punctuation and the conjunctions "and"/"or".
  std::string text = lower(raw);
  for (char& c : text) {
    if (c == ',' || c == ';' || c == '[' || c == ']' || c == '{' || c == '}' ||
        c == '\n' || c == '.' || c == '"' || c == '\'') {
      c = '|';
    }
  }
  static const std::regex kConj(R"(\b(and|or)\b)");
  text = std::regex_replace(text, kConj, "|");
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, '|')) {
    item = canonical_token(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<std::string> fold_to_registry(const std::string& word,
                                            const EntityRegistry& registry) {
  if (registry.contains(word)) return word;
  for (std::string_view suffix : {"es", "s"}) {
    if (word.size() > suffix.size() && word.ends_with(suffix)) {
      auto stem = word.substr(0, word.size() - suffix.size());
      if (registry.contains(stem)) return stem;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> parse_entity_list(std::string_view raw) {
  auto items = split_items(raw);
  if (items.empty()) throw ParseFailure(std::string(raw), "empty entity list");
  if (items.size() == 1 && items.front() == "none") return {};
  return items;
}

std::vector<std::string> parse_entities(std::string_view raw,
                                        const EntityRegistry& registry) {
  std::vector<std::string> out;
  for (const auto& item : split_items(raw)) {
    if (item == "none") continue;
    bool matched = false;
    for (const auto& w : words(item)) {
      if (auto e = fold_to_registry(w, registry)) {
        matched = true;
        if (std::find(out.begin(), out.end(), *e) == out.end()) {
          out.push_back(*e);
        }
      }
    }
    if (!matched) {
      spdlog::warn("dropping unknown entity candidate '{}'", item);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch

AnnotatorResponse complete(AnnotatorBackend& backend,
                           const AnnotatorRequest& request) {
  if (request.prompt.empty()) {
    throw std::invalid_argument("annotator prompt must not be empty");
  }
  AnnotatorResponse response;
  response.raw = backend.complete_raw(request);
  switch (request.kind) {
    case RequestKind::kLabelTransition:
      response.label = parse_label(response.raw);
      break;
    case RequestKind::kExtractEntities:
      response.entities = parse_entity_list(response.raw);
      break;
  }
  return response;
}

// ---------------------------------------------------------------------------
// Templates

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    if (auto it = values.find(key); it != values.end()) out += it->second;
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_file(dir / "label_transition.txt"),
          read_file(dir / "extract_entities.txt")};
}

PromptTemplates PromptTemplates::defaults() {
  return {bundled::kLabelPrompt, bundled::kEntityPrompt};
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

PropositionSet props_from_json(const json& j) {
  PropositionSet out;
  for (const auto& p : j) out.insert(parse_proposition(p.get<std::string>()));
  return out;
}

// Parses "{a, b(c,d)}" as written by to_string(PropositionSet).
PropositionSet parse_state_text(std::string_view s) {
  const auto open = s.find('{');
  const auto close = s.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    throw std::invalid_argument("malformed state encoding");
  }
  PropositionSet out;
  std::string_view inner = s.substr(open + 1, close - open - 1);
  int depth = 0;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view token = inner.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) out.insert(parse_proposition(token));
  };
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] == '(') ++depth;
    if (inner[i] == ')') --depth;
    if (inner[i] == ',' && depth == 0) {
      flush(i);
      start = i + 1;
    }
  }
  flush(inner.size());
  return out;
}

std::optional<std::string> field(std::string_view prompt, std::string_view key) {
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    auto end = prompt.find('\n', pos);
    if (end == std::string_view::npos) end = prompt.size();
    auto line = prompt.substr(pos, end - pos);
    if (line.starts_with(key)) return std::string(line.substr(key.size()));
    pos = end + 1;
  }
  return std::nullopt;
}

}  // namespace

MockRules MockRules::from_json_text(std::string_view text) {
  const auto j = json::parse(text);
  MockRules rules;
  rules.version = j.at("version").get<int>();
  if (rules.version != 1) {
    throw SchemaVersionMismatch("mock rule table version " +
                                std::to_string(rules.version) +
                                " is not supported");
  }
  for (const auto& r : j.at("labels")) {
    rules.labels.push_back({props_from_json(r.at("added")),
                            props_from_json(r.at("removed")),
                            r.at("label").get<std::string>()});
  }
  for (const auto& r : j.at("entities")) {
    rules.entities.push_back(
        {lower(r.at("pattern").get<std::string>()), r.at("entity").get<std::string>()});
  }
  return rules;
}

MockRules MockRules::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

MockRules MockRules::defaults() { return from_json_text(bundled::kMockRules); }

MockBackend::MockBackend(MockRules rules) : rules_(std::move(rules)) {}

std::string MockBackend::complete_raw(const AnnotatorRequest& request) {
  if (request.kind == RequestKind::kLabelTransition) {
    const auto current = field(request.prompt, "current_state:");
    const auto next = field(request.prompt, "next_state:");
    if (!current || !next) return "I cannot see the states.";
    PropositionSet before;
    PropositionSet after;
    try {
      before = parse_state_text(*current);
      after = parse_state_text(*next);
    } catch (const std::invalid_argument&) {
      return "I cannot read the states.";
    }
    const auto added = set_difference(after, before);
    const auto removed = set_difference(before, after);
    for (const auto& rule : rules_.labels) {
      if (rule.added == added && rule.removed == removed) return rule.label;
    }
    return "This skill changes something I do not recognise.";
  }

  const auto constraint = lower(field(request.prompt, "constraint:").value_or(""));
  std::vector<std::pair<std::size_t, std::string>> hits;
  for (const auto& rule : rules_.entities) {
    std::size_t pos = constraint.find(rule.pattern);
    while (pos != std::string::npos) {
      const bool word_start =
          pos == 0 || !std::isalnum(static_cast<unsigned char>(constraint[pos - 1]));
      if (word_start) {
        hits.emplace_back(pos, rule.entity);
        break;
      }
      pos = constraint.find(rule.pattern, pos + 1);
    }
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  std::vector<std::string> seen;
  for (const auto& [pos, entity] : hits) {
    if (std::find(seen.begin(), seen.end(), entity) != seen.end()) continue;
    seen.push_back(entity);
    if (!out.empty()) out += ", ";
    out += entity;
  }
  return out.empty() ? "none" : out;
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw std::invalid_argument("annotator endpoint must be an http(s) URL, got '" +
                                config_.endpoint + "'");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpBackend::complete_raw(const AnnotatorRequest& request) {
  json body = {{"model", config_.model},
               {"temperature", 0},
               {"messages", json::array({{{"role", "user"},
                                          {"content", request.prompt}}})}};
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  std::string last_error = "no attempt made";
  bool last_was_http = false;
  int last_status = 0;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      last_was_http = false;
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      last_status = res->status;
      last_was_http = true;
      if (res->status >= 500 || res->status == 429) continue;
      break;
    }
    json reply;
    try {
      reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseFailure(res->body, std::string("unexpected completion body: ") +
                                        e.what());
    }
  }
  if (last_was_http) {
    throw HttpError(last_status, "annotator endpoint returned " + last_error);
  }
  throw AnnotatorTimeout("annotator endpoint unreachable after " +
                         std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// Fault injection

FaultInjectingBackend::FaultInjectingBackend(
    std::shared_ptr<AnnotatorBackend> inner, double label_fault_rate,
    std::uint64_t seed)
    : inner_(std::move(inner)), rate_(label_fault_rate), rng_(seed) {}

std::string FaultInjectingBackend::complete_raw(const AnnotatorRequest& request) {
  if (request.kind == RequestKind::kLabelTransition) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < rate_) {
      ++injected_;
      return "go left maybe";
    }
  }
  return inner_->complete_raw(request);
}

}  // namespace soarl

namespace soarl {

Annotator make_mock_annotator(std::string world_id) {
  Annotator a;
  a.backend = std::make_shared<MockBackend>();
  a.world_id = std::move(world_id);
  return a;
}

}  // namespace soarl
