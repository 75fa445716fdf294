#include "soarl/symbolic.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "soarl/errors.hpp"

namespace soarl {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || s == "-") return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == '(' || c == ')' || c == ',' || c == '#' ||
           static_cast<unsigned char>(c) <= ' ';
  });
}

// Splits on commas outside parentheses.
std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

std::string join(const PropositionSet& props, std::string_view sep) {
  std::string out;
  for (const auto& p : props) {
    if (!out.empty()) out += sep;
    out += p.str();
  }
  return out;
}

}  // namespace

Proposition::Proposition(std::string name, std::vector<std::string> args)
    : name(std::move(name)), args(std::move(args)) {
  if (!is_identifier(this->name)) {
    throw std::invalid_argument("invalid proposition name '" + this->name +
                                "'");
  }
  for (const auto& a : this->args) {
    if (!is_identifier(a)) {
      throw std::invalid_argument("invalid proposition argument '" + a + "'");
    }
  }
}

std::string Proposition::str() const {
  if (args.empty()) return name;
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ',';
    out += args[i];
  }
  return out + ")";
}

Proposition parse_proposition(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos) return Proposition(std::string(text));
  if (text.back() != ')') {
    throw std::invalid_argument("unbalanced proposition '" +
                                std::string(text) + "'");
  }
  std::vector<std::string> args;
  const auto inner = text.substr(open + 1, text.size() - open - 2);
  if (!inner.empty()) {
    for (auto part : split_top_level(inner)) args.emplace_back(part);
  }
  return Proposition(std::string(text.substr(0, open)), std::move(args));
}

bool is_subset(const PropositionSet& sub, const PropositionSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool intersects(const PropositionSet& a, const PropositionSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

PropositionSet set_union(const PropositionSet& a, const PropositionSet& b) {
  PropositionSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

PropositionSet set_difference(const PropositionSet& a,
                              const PropositionSet& b) {
  PropositionSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

PropositionSet set_intersection(const PropositionSet& a,
                                const PropositionSet& b) {
  PropositionSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

std::string to_string(const PropositionSet& props) {
  return "{" + join(props, ", ") + "}";
}

SymbolicState SymbolicState::project(const PropositionSet& vocabulary) const {
  return SymbolicState(set_intersection(holds_, vocabulary));
}

void ActionModel::validate() const {
  if (!is_identifier(name)) {
    throw std::invalid_argument("invalid action name '" + name + "'");
  }
  if (intersects(pre_pos, pre_neg)) {
    throw std::invalid_argument("action '" + name +
                                "': pre+ and pre- overlap");
  }
  if (intersects(eff_pos, eff_neg)) {
    throw std::invalid_argument("action '" + name +
                                "': eff+ and eff- overlap");
  }
}

PropositionSet ActionModel::mentioned() const {
  PropositionSet out = pre_pos;
  out.insert(pre_neg.begin(), pre_neg.end());
  out.insert(eff_pos.begin(), eff_pos.end());
  out.insert(eff_neg.begin(), eff_neg.end());
  return out;
}

void Domain::add_proposition(const Proposition& p) { vocabulary_.insert(p); }

void Domain::check_model(const ActionModel& action) const {
  action.validate();
  for (const auto& p : action.mentioned()) {
    if (!vocabulary_.contains(p)) {
      throw std::invalid_argument("action '" + action.name +
                                  "' references undeclared proposition '" +
                                  p.str() + "'");
    }
  }
}

void Domain::add_action(ActionModel action) {
  check_model(action);
  if (actions_.contains(action.name)) {
    throw std::invalid_argument("duplicate action '" + action.name + "'");
  }
  auto name = action.name;
  actions_.emplace(std::move(name), std::move(action));
}

void Domain::replace_action(ActionModel action) {
  check_model(action);
  auto it = actions_.find(action.name);
  if (it == actions_.end()) {
    throw std::invalid_argument("unknown action '" + action.name + "'");
  }
  it->second = std::move(action);
}

const ActionModel& Domain::action(const std::string& name) const {
  auto it = actions_.find(name);
  if (it == actions_.end()) {
    throw std::out_of_range("unknown action '" + name + "'");
  }
  return it->second;
}

SymbolicTransition::SymbolicTransition(SymbolicState before,
                                       SymbolicState after,
                                       double extrinsic_reward)
    : before(std::move(before)),
      after(std::move(after)),
      extrinsic_reward(extrinsic_reward) {
  if (this->before == this->after) {
    throw std::invalid_argument(
        "symbolic transition requires a change of state");
  }
}

bool is_executable(const SymbolicState& state, const ActionModel& action) {
  return is_subset(action.pre_pos, state.holds()) &&
         !intersects(state.holds(), action.pre_neg);
}

SymbolicState apply(const SymbolicState& state, const ActionModel& action) {
  if (!is_executable(state, action)) {
    throw NotExecutable("action '" + action.name + "' is not executable in " +
                        state.str());
  }
  PropositionSet next = set_difference(state.holds(), action.eff_neg);
  next.insert(action.eff_pos.begin(), action.eff_pos.end());
  return SymbolicState(std::move(next));
}

namespace {

struct Tokenizer {
  std::string_view line;
  std::size_t pos = 0;

  std::string_view next() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
      ++pos;
    }
    const auto start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
  }
};

PropositionSet parse_list(std::string_view token, std::size_t line_no,
                          const PropositionSet& vocabulary) {
  PropositionSet out;
  if (token == "-") return out;
  if (token.empty()) throw ParseError(line_no, "", "expected proposition list");
  for (auto part : split_top_level(token)) {
    Proposition p;
    try {
      p = parse_proposition(part);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, std::string(part), e.what());
    }
    if (!vocabulary.contains(p)) {
      throw ParseError(line_no, std::string(part), "undeclared proposition");
    }
    out.insert(std::move(p));
  }
  return out;
}

}  // namespace

Domain parse_domain(std::string_view text) {
  Domain domain;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Tokenizer tok{line};
    const auto keyword = tok.next();
    if (keyword.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (keyword == "prop") {
      const auto body = tok.next();
      if (body.empty()) throw ParseError(line_no, "prop", "missing name");
      try {
        domain.add_proposition(parse_proposition(body));
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, std::string(body), e.what());
      }
    } else if (keyword == "action") {
      ActionModel action;
      const auto name = tok.next();
      if (!is_identifier(name)) {
        throw ParseError(line_no, std::string(name), "invalid action name");
      }
      action.name = std::string(name);
      PropositionSet* slots[] = {&action.pre_pos, &action.pre_neg,
                                 &action.eff_pos, &action.eff_neg};
      const std::string_view labels[] = {"pre+", "pre-", "eff+", "eff-"};
      for (int i = 0; i < 4; ++i) {
        const auto label = tok.next();
        if (label != labels[i]) {
          throw ParseError(line_no, std::string(label),
                           "expected '" + std::string(labels[i]) + "'");
        }
        *slots[i] = parse_list(tok.next(), line_no, domain.vocabulary());
      }
      if (const auto extra = tok.next(); !extra.empty()) {
        throw ParseError(line_no, std::string(extra), "trailing token");
      }
      if (domain.has_action(action.name)) {
        throw ParseError(line_no, action.name, "duplicate action");
      }
      try {
        domain.add_action(std::move(action));
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, std::string(name), e.what());
      }
    } else {
      throw ParseError(line_no, std::string(keyword), "unknown declaration");
    }
    if (end == text.size()) break;
  }
  return domain;
}

std::string serialize_domain(const Domain& domain) {
  std::ostringstream out;
  out << "# propositions\n";
  for (const auto& p : domain.vocabulary()) out << "prop " << p.str() << "\n";
  out << "# actions\n";
  const auto list = [](const PropositionSet& s) {
    return s.empty() ? std::string("-") : join(s, ",");
  };
  for (const auto& [name, a] : domain.actions()) {
    out << "action " << name << " pre+ " << list(a.pre_pos) << " pre- "
        << list(a.pre_neg) << " eff+ " << list(a.eff_pos) << " eff- "
        << list(a.eff_neg) << "\n";
  }
  return out.str();
}

}  // namespace soarl
