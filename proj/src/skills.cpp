#include "soarl/skills.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "soarl/errors.hpp"

namespace soarl {

using nlohmann::json;

std::string_view to_string(AddResult r) {
  switch (r) {
    case AddResult::kAdded:
      return "added";
    case AddResult::kReplaced:
      return "replaced";
    case AddResult::kRejectedLowSr:
      return "rejected_low_sr";
    case AddResult::kKeptExisting:
      return "kept_existing";
  }
  return "?";
}

const SkillRecord* SkillLibrary::find(const SemanticLabel& label) const {
  auto it = records_.find(label);
  return it == records_.end() ? nullptr : &it->second;
}

AddResult SkillLibrary::add(SkillRecord record) {
  if (record.sr_at_save < tau_) return AddResult::kRejectedLowSr;
  auto it = records_.find(record.label);
  if (it == records_.end()) {
    auto label = record.label;
    records_.emplace(std::move(label), std::move(record));
    return AddResult::kAdded;
  }
  if (record.sr_at_save > it->second.sr_at_save) {
    it->second = std::move(record);
    return AddResult::kReplaced;
  }
  return AddResult::kKeptExisting;
}

void SkillLibrary::check_invariants() const {
  for (const auto& [label, record] : records_) {
    if (record.sr_at_save < tau_) {
      throw std::logic_error("skill " + label.str() + " stored with sr " +
                             std::to_string(record.sr_at_save) + " < tau");
    }
    if (!(record.label == label)) {
      throw std::logic_error("skill record keyed under a different label");
    }
  }
}

namespace {

std::string label_safe(const Proposition& p) {
  std::string s = p.str();
  for (char& c : s) {
    if (c == '(' || c == ')' || c == ',') c = '_';
  }
  return s;
}

}  // namespace

SemanticLabel fallback_label(const SymbolicState& before,
                             const SymbolicState& after) {
  std::string arg;
  for (const auto& p : set_difference(after.holds(), before.holds())) {
    arg += label_safe(p) + "+";
  }
  for (const auto& p : set_difference(before.holds(), after.holds())) {
    arg += label_safe(p) + "-";
  }
  return SemanticLabel("diff", {arg});
}

SemanticLabel annotate_option(const Annotator& annotator,
                              const SymbolicOption& option,
                              const SymbolicState& before,
                              const SymbolicState& after,
                              const std::optional<SemanticLabel>& last_label,
                              int episode) {
  if (before == after) {
    throw std::invalid_argument("annotate_option needs a change of state");
  }
  AnnotatorRequest request;
  request.kind = RequestKind::kLabelTransition;
  request.world_id = annotator.world_id;
  request.episode = episode;
  request.prompt = render_template(
      annotator.templates.label_transition,
      {{"domain", annotator.domain_info},
       {"current_state", before.str()},
       {"next_state", after.str()},
       {"last_label", last_label ? last_label->str() : "none"},
       {"option", option.id()}});

  std::string failure = "no backend configured";
  if (annotator.backend) {
    for (int attempt = 0; attempt <= annotator.max_retries; ++attempt) {
      try {
        return *complete(*annotator.backend, request).label;
      } catch (const ParseFailure& e) {
        failure = "unparseable answer '" + e.raw() + "'";
      } catch (const AnnotatorError& e) {
        failure = e.what();
        break;
      }
    }
  }
  if (!annotator.fallback_enabled) {
    throw AnnotatorUnavailable("no label for option " + option.id() + ": " +
                               failure);
  }
  auto label = fallback_label(before, after);
  spdlog::debug("option {}: {}; using fallback label {}", option.id(), failure,
                label.str());
  return label;
}

AddResult try_add_skill(SkillLibrary& library, const SymbolicOption& option,
                        const SemanticLabel& label, Provenance provenance) {
  SkillRecord record{label, option.policy(), option.history().rate(),
                     std::move(provenance)};
  return library.add(std::move(record));
}

bool lookup_and_reuse(const SkillLibrary& library, const SemanticLabel& label,
                      SymbolicOption& option) {
  const auto* record = library.find(label);
  if (record == nullptr) return false;
  option.set_policy(record->policy);
  option.set_reused(true);
  return true;
}

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double from_exact(const json& j) {
  const auto s = j.get<std::string>();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

json qtable_to_json(const QTable& q) {
  const auto& p = q.params();
  json params = {{"alpha", exact(p.alpha)},
                 {"gamma", exact(p.gamma)},
                 {"epsilon_start", exact(p.epsilon_start)},
                 {"epsilon_end", exact(p.epsilon_end)},
                 {"epsilon_decay_episodes", p.epsilon_decay_episodes}};
  std::vector<std::uint64_t> keys;
  keys.reserve(q.entries().size());
  for (const auto& [k, row] : q.entries()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  json entries = json::array();
  for (auto k : keys) {
    const auto key = StateKey::unpack(k);
    const auto& row = q.entries().at(k);
    json values = json::array();
    for (double v : row) values.push_back(exact(v));
    entries.push_back({{"x", key.x}, {"y", key.y}, {"flags", key.flags},
                       {"q", values}});
  }
  return {{"params", params}, {"clock", q.clock()}, {"entries", entries}};
}

QTable qtable_from_json(const json& j) {
  QParams p;
  const auto& params = j.at("params");
  p.alpha = from_exact(params.at("alpha"));
  p.gamma = from_exact(params.at("gamma"));
  p.epsilon_start = from_exact(params.at("epsilon_start"));
  p.epsilon_end = from_exact(params.at("epsilon_end"));
  p.epsilon_decay_episodes = params.at("epsilon_decay_episodes").get<std::size_t>();
  QTable q(p);
  q.set_clock(j.at("clock").get<std::size_t>());
  for (const auto& e : j.at("entries")) {
    StateKey key;
    key.x = e.at("x").get<std::int16_t>();
    key.y = e.at("y").get<std::int16_t>();
    key.flags = e.at("flags").get<std::uint8_t>();
    const auto& values = e.at("q");
    if (values.size() != kActions.size()) {
      throw std::invalid_argument("q row must have one value per action");
    }
    for (std::size_t i = 0; i < kActions.size(); ++i) {
      q.set(key, kActions[i], from_exact(values[i]));
    }
  }
  return q;
}

}  // namespace

std::string library_to_json(const SkillLibrary& library) {
  json records = json::array();
  for (const auto& [label, r] : library.records()) {
    records.push_back({{"label", label.str()},
                       {"sr", exact(r.sr_at_save)},
                       {"provenance",
                        {{"world_id", r.provenance.world_id},
                         {"task_id", r.provenance.task_id},
                         {"episode", r.provenance.episode},
                         {"timestamp", r.provenance.timestamp}}},
                       {"qtable", qtable_to_json(r.policy)}});
  }
  json doc = {{"version", kSkillLibraryVersion},
              {"tau", exact(library.tau())},
              {"records", records}};
  return doc.dump(1) + "\n";
}

SkillLibrary library_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("skill library is not valid JSON: ") + e.what());
  }
  const int version = doc.value("version", -1);
  if (version != kSkillLibraryVersion) {
    throw SchemaVersionMismatch("skill library version " +
                                std::to_string(version) + ", expected " +
                                std::to_string(kSkillLibraryVersion));
  }
  try {
    SkillLibrary library(from_exact(doc.at("tau")));
    for (const auto& r : doc.at("records")) {
      SkillRecord record;
      record.label = parse_label(r.at("label").get<std::string>());
      record.sr_at_save = from_exact(r.at("sr"));
      const auto& prov = r.at("provenance");
      record.provenance = {prov.at("world_id").get<std::string>(),
                           prov.at("task_id").get<int>(),
                           prov.at("episode").get<int>(),
                           prov.at("timestamp").get<std::string>()};
      record.policy = qtable_from_json(r.at("qtable"));
      if (library.add(std::move(record)) != AddResult::kAdded) {
        throw std::invalid_argument("duplicate or below-threshold record");
      }
    }
    library.check_invariants();
    return library;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed skill library: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("malformed skill library: ") + e.what());
  }
}

void save_library(const SkillLibrary& library,
                  const std::filesystem::path& path) {
  library.check_invariants();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write skill library " + path.string());
  out << library_to_json(library);
  if (!out) throw IoError("failed writing skill library " + path.string());
}

SkillLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read skill library " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return library_from_json(buf.str());
}

}  // namespace soarl
