#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace soarl {

/// Predicate-argument label such as `act(coffee, office)`. Always held in
/// canonical form: lowercase, surrounding whitespace trimmed.
class SemanticLabel {
 public:
  SemanticLabel() = default;
  SemanticLabel(std::string predicate, std::vector<std::string> args);

  const std::string& predicate() const { return predicate_; }
  const std::vector<std::string>& args() const { return args_; }

  /// `predicate(a1, a2)`.
  std::string str() const;

  friend bool operator==(const SemanticLabel&, const SemanticLabel&) = default;
  friend auto operator<=>(const SemanticLabel&, const SemanticLabel&) = default;

 private:
  std::string predicate_;
  std::vector<std::string> args_;
};

/// Lowercases and trims.
std::string canonical_token(std::string_view s);

}  // namespace soarl
