/**
 * annotator.hpp
 *
 * Pluggable language backend used for option labelling and constraint
 * entity extraction. The rule-table mock is deterministic and is the
 * default; the HTTP backend talks to a chat-completion endpoint.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "soarl/office_world.hpp"
#include "soarl/semantic_label.hpp"
#include "soarl/symbolic.hpp"

namespace soarl {

enum class RequestKind { kLabelTransition, kExtractEntities };

struct AnnotatorRequest {
  RequestKind kind = RequestKind::kLabelTransition;
  std::string prompt;
  std::string world_id;
  int episode = 0;
};

struct AnnotatorResponse {
  std::string raw;
  std::optional<SemanticLabel> label;                  // kLabelTransition
  std::optional<std::vector<std::string>> entities;    // kExtractEntities
};

class AnnotatorBackend {
 public:
  virtual ~AnnotatorBackend() = default;

  /// Raw completion text. May throw AnnotatorTimeout or HttpError.
  virtual std::string complete_raw(const AnnotatorRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Dispatches to the backend and parses the raw text according to the
/// request kind. Throws ParseFailure (raw preserved) on a grammar mismatch.
AnnotatorResponse complete(AnnotatorBackend& backend,
                           const AnnotatorRequest& request);

/// Extracts the first well-formed `predicate(a1, a2, ...)` in `raw`,
/// ignoring surrounding prose. Throws ParseFailure.
SemanticLabel parse_label(std::string_view raw);

/// Comma/`and`-separated list of candidate entity words, or `none`.
/// Throws ParseFailure on empty text.
std::vector<std::string> parse_entity_list(std::string_view raw);

/// Candidate nouns in `raw` that name a registry entity, matched
/// case-insensitively with s/es plural folding, in order of first
/// appearance. Unknown candidates are dropped with a warning.
std::vector<std::string> parse_entities(std::string_view raw,
                                        const EntityRegistry& registry);

// ---------------------------------------------------------------------------
// Prompt templates

/// Replaces every `{{key}}` with `values[key]`; unknown keys become empty.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values);

struct PromptTemplates {
  std::string label_transition;
  std::string extract_entities;

  /// Reads label_transition.txt and extract_entities.txt from `dir`.
  static PromptTemplates load(const std::filesystem::path& dir);
  /// Built-in templates, identical to the bundled files.
  static PromptTemplates defaults();
};

// ---------------------------------------------------------------------------
// Mock backend

struct MockRules {
  struct LabelRule {
    PropositionSet added;
    PropositionSet removed;
    std::string label;
  };
  struct EntityRule {
    std::string pattern;
    std::string entity;
  };

  int version = 1;
  std::vector<LabelRule> labels;
  std::vector<EntityRule> entities;

  static MockRules load(const std::filesystem::path& path);
  static MockRules from_json_text(std::string_view text);
  static MockRules defaults();
};

/// Rule-table backend. Label requests are answered from the state diff
/// encoded in the prompt (`current_state:` / `next_state:` lines); only the
/// diff matters, so transitions that differ in an unchanged proposition get
/// the same label. Unmatched diffs yield an unparseable answer.
class MockBackend : public AnnotatorBackend {
 public:
  explicit MockBackend(MockRules rules = MockRules::defaults());

  std::string complete_raw(const AnnotatorRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  MockRules rules_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key_env = "SOARL_API_KEY";
  int timeout_ms = 10000;
  int max_retries = 2;
};

/// Minimal chat-completion client: POSTs
/// {"model", "messages":[{"role":"user","content":prompt}], "temperature":0}
/// and reads choices[0].message.content.
class HttpBackend : public AnnotatorBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string complete_raw(const AnnotatorRequest& request) override;
  std::string name() const override { return "http"; }

  const HttpBackendConfig& config() const { return config_; }

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Replaces a fraction of label answers with unparseable prose. Used to
/// exercise the fallback path.
class FaultInjectingBackend : public AnnotatorBackend {
 public:
  FaultInjectingBackend(std::shared_ptr<AnnotatorBackend> inner,
                        double label_fault_rate, std::uint64_t seed);

  std::string complete_raw(const AnnotatorRequest& request) override;
  std::string name() const override { return inner_->name() + "+faults"; }

  std::size_t injected() const { return injected_; }

 private:
  std::shared_ptr<AnnotatorBackend> inner_;
  double rate_;
  std::mt19937_64 rng_;
  std::size_t injected_ = 0;
};

/// Backend plus the prompt context shared by label generation and entity
/// extraction.
struct Annotator {
  std::shared_ptr<AnnotatorBackend> backend;
  PromptTemplates templates = PromptTemplates::defaults();
  std::string domain_info =
      "Office World gridworld. Propositions: haveCoffee, haveMail, "
      "deliveredCoffee, deliveredMail, onPlant, onPrinter.";
  std::string world_id;
  /// Extra attempts after an unparseable answer.
  int max_retries = 2;
  /// Use the state-diff label when the backend cannot produce one.
  bool fallback_enabled = true;
};

Annotator make_mock_annotator(std::string world_id = "");

}  // namespace soarl
