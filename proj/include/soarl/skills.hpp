/**
 * skills.hpp
 *
 * Semantic skill library: labels options through the annotator, admits
 * policies whose success rate clears τ, and hands stored policies to new
 * options carrying an identical label.
 */

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "soarl/annotator.hpp"
#include "soarl/options.hpp"
#include "soarl/semantic_label.hpp"
#include "soarl/symbolic.hpp"

namespace soarl {

inline constexpr int kSkillLibraryVersion = 1;

struct Provenance {
  std::string world_id;
  int task_id = 0;
  int episode = 0;
  std::string timestamp;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SkillRecord {
  SemanticLabel label;
  QTable policy;
  double sr_at_save = 0.0;
  Provenance provenance;

  friend bool operator==(const SkillRecord&, const SkillRecord&) = default;
};

enum class AddResult { kAdded, kReplaced, kRejectedLowSr, kKeptExisting };

std::string_view to_string(AddResult r);

class SkillLibrary {
 public:
  explicit SkillLibrary(double tau = 0.95) : tau_(tau) {}

  double tau() const { return tau_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::map<SemanticLabel, SkillRecord>& records() const {
    return records_;
  }
  const SkillRecord* find(const SemanticLabel& label) const;

  /// Threshold-gated insertion; an existing record is replaced only by a
  /// strictly higher success rate.
  AddResult add(SkillRecord record);

  /// Throws std::logic_error if any record is below τ.
  void check_invariants() const;

  friend bool operator==(const SkillLibrary&, const SkillLibrary&) = default;

 private:
  double tau_;
  std::map<SemanticLabel, SkillRecord> records_;
};

/// `diff(<added>+...<removed>-...)`, e.g. diff(havecoffee+).
SemanticLabel fallback_label(const SymbolicState& before,
                             const SymbolicState& after);

/// Renders the label prompt, queries the backend and parses the answer,
/// retrying on malformed output and falling back to the state-diff label.
/// Throws AnnotatorUnavailable when no label can be produced and the
/// fallback is disabled.
SemanticLabel annotate_option(const Annotator& annotator,
                              const SymbolicOption& option,
                              const SymbolicState& before,
                              const SymbolicState& after,
                              const std::optional<SemanticLabel>& last_label,
                              int episode = 0);

AddResult try_add_skill(SkillLibrary& library, const SymbolicOption& option,
                        const SemanticLabel& label, Provenance provenance);

/// Copies the stored policy into `option` on an exact label match.
bool lookup_and_reuse(const SkillLibrary& library, const SemanticLabel& label,
                      SymbolicOption& option);

/// Q-values are written as 17-significant-digit decimal strings so that a
/// reload is bit-exact.
void save_library(const SkillLibrary& library,
                  const std::filesystem::path& path);
SkillLibrary load_library(const std::filesystem::path& path);

std::string library_to_json(const SkillLibrary& library);
SkillLibrary library_from_json(std::string_view text);

}  // namespace soarl
