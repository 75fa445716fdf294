#include "soarl/office_world.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "soarl/errors.hpp"

namespace soarl {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kUp:
      return "up";
    case Action::kDown:
      return "down";
    case Action::kLeft:
      return "left";
    case Action::kRight:
      return "right";
  }
  return "?";
}

Action action_from_string(std::string_view s) {
  for (auto a : kActions) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown action '" + std::string(s) + "'");
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::kCoffee:
      return "coffee";
    case EntityKind::kMail:
      return "mail";
    case EntityKind::kOffice:
      return "office";
    case EntityKind::kPlant:
      return "plant";
    case EntityKind::kPrinter:
      return "printer";
    case EntityKind::kStart:
      return "agent-start-region";
  }
  return "?";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
  for (auto k : {EntityKind::kCoffee, EntityKind::kMail, EntityKind::kOffice,
                 EntityKind::kPlant, EntityKind::kPrinter, EntityKind::kStart}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(DoneReason r) {
  switch (r) {
    case DoneReason::kRunning:
      return "running";
    case DoneReason::kTaskComplete:
      return "task_complete";
    case DoneReason::kViolation:
      return "violation";
    case DoneReason::kMaxSteps:
      return "max_steps";
  }
  return "?";
}

GridMap::GridMap(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("map dimensions must be positive");
  }
}

void GridMap::add_wall(Cell a, Cell b) {
  if (!in_bounds(a) || !in_bounds(b)) {
    throw std::invalid_argument("wall endpoint out of bounds");
  }
  if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1) {
    throw std::invalid_argument("wall endpoints must be adjacent cells");
  }
  walls_.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool GridMap::blocked(Cell a, Cell b) const {
  return walls_.contains(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

void GridMap::place(Cell c, EntityKind kind) {
  if (!in_bounds(c)) throw std::invalid_argument("placement out of bounds");
  if (placements_.contains(c)) {
    throw std::invalid_argument("cell already holds an entity");
  }
  placements_.emplace(c, kind);
}

std::optional<EntityKind> GridMap::at(Cell c) const {
  auto it = placements_.find(c);
  if (it == placements_.end()) return std::nullopt;
  return it->second;
}

std::vector<Cell> GridMap::cells_of(EntityKind kind) const {
  std::vector<Cell> out;
  for (const auto& [cell, k] : placements_) {
    if (k == kind) out.push_back(cell);
  }
  return out;
}

TaskSpec TaskSpec::office(int id, double step_cost, double task_reward) {
  TaskSpec t;
  t.id = id;
  t.step_cost = step_cost;
  t.task_reward = task_reward;
  switch (id) {
    case 1:
      t.needs_coffee = true;
      t.needs_mail = false;
      break;
    case 2:
      t.needs_coffee = false;
      t.needs_mail = true;
      break;
    case 3:
      t.needs_coffee = true;
      t.needs_mail = true;
      break;
    default:
      throw std::invalid_argument("task id must be 1, 2 or 3, got " +
                                  std::to_string(id));
  }
  return t;
}

SymbolicState TaskSpec::goal() const {
  PropositionSet g;
  if (needs_coffee) g.insert(props::kDeliveredCoffee);
  if (needs_mail) g.insert(props::kDeliveredMail);
  return SymbolicState(std::move(g));
}

const PropositionSet& task_vocabulary() {
  static const PropositionSet kVocab = {props::kHaveCoffee, props::kHaveMail,
                                        props::kDeliveredCoffee,
                                        props::kDeliveredMail};
  return kVocab;
}

const PropositionSet& office_vocabulary() {
  static const PropositionSet kVocab = [] {
    PropositionSet v = task_vocabulary();
    v.insert(props::kOnPlant);
    v.insert(props::kOnPrinter);
    return v;
  }();
  return kVocab;
}

void EntityRegistry::add(std::string entity, PropositionSet props) {
  entities_[std::move(entity)].insert(props.begin(), props.end());
}

const PropositionSet* EntityRegistry::find(const std::string& entity) const {
  auto it = entities_.find(entity);
  return it == entities_.end() ? nullptr : &it->second;
}

EntityRegistry office_registry() {
  EntityRegistry r;
  r.add("plant", {props::kOnPlant});
  r.add("printer", {props::kOnPrinter});
  r.add("coffee", {props::kHaveCoffee});
  r.add("mail", {props::kHaveMail});
  r.add("office", {props::kDeliveredCoffee, props::kDeliveredMail});
  return r;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

GridMap load_map(std::string_view text) {
  std::map<char, EntityKind> legend;
  std::vector<std::pair<std::size_t, std::string_view>> rows;
  std::vector<std::pair<std::size_t, std::string_view>> wall_lines;
  bool in_walls = false;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t row_no = i + 1;
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line == "walls:") {
      in_walls = true;
      continue;
    }
    if (in_walls) {
      wall_lines.emplace_back(row_no, line);
      continue;
    }
    if (line.starts_with("legend ")) {
      std::istringstream in{std::string(line.substr(7))};
      std::string ch;
      std::string kind;
      in >> ch >> kind;
      if (ch.size() != 1) {
        throw MapParseError(row_no, 8, "legend symbol must be one character");
      }
      if (ch[0] == '.') {
        throw MapParseError(row_no, 8, "'.' is reserved for empty cells");
      }
      auto k = entity_kind_from_string(kind);
      if (!k) throw MapParseError(row_no, 10, "unknown entity kind '" + kind + "'");
      legend[ch[0]] = *k;
      continue;
    }
    rows.emplace_back(row_no, line);
  }

  if (rows.empty()) throw MapParseError(1, 1, "map has no grid rows");
  const auto width = rows.front().second.size();
  GridMap map(static_cast<int>(width), static_cast<int>(rows.size()));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    const auto [row_no, row] = rows[y];
    if (row.size() != width) {
      throw MapParseError(row_no, std::min(row.size(), width) + 1,
                          "row width differs from first row");
    }
    for (std::size_t x = 0; x < row.size(); ++x) {
      const char c = row[x];
      if (c == '.') continue;
      auto it = legend.find(c);
      if (it == legend.end()) {
        throw MapParseError(row_no, x + 1,
                            std::string("symbol '") + c + "' not in legend");
      }
      map.place({static_cast<int>(x), static_cast<int>(y)}, it->second);
    }
  }

  static const std::regex kWall(
      R"(wall\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*-\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
  for (const auto& [row_no, line] : wall_lines) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, kWall)) {
      throw MapParseError(row_no, 1, "expected 'wall (x1,y1)-(x2,y2)'");
    }
    const Cell a{std::stoi(m[1].str()), std::stoi(m[2].str())};
    const Cell b{std::stoi(m[3].str()), std::stoi(m[4].str())};
    try {
      map.add_wall(a, b);
    } catch (const std::invalid_argument& e) {
      throw MapParseError(row_no, 1, e.what());
    }
  }
  return map;
}

GridMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

RawState reset(const GridMap& map, Rng& rng) {
  const auto starts = map.cells_of(EntityKind::kStart);
  if (starts.empty()) {
    throw std::invalid_argument("map has no agent-start-region cell");
  }
  std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
  RawState s;
  s.agent = starts[pick(rng)];
  return s;
}

RawState reset(const GridMap& map, std::uint64_t seed) {
  Rng rng(seed);
  return reset(map, rng);
}

Cell move(const GridMap& map, Cell from, Action action) {
  Cell to = from;
  switch (action) {
    case Action::kUp:
      --to.y;
      break;
    case Action::kDown:
      ++to.y;
      break;
    case Action::kLeft:
      --to.x;
      break;
    case Action::kRight:
      ++to.x;
      break;
  }
  if (!map.in_bounds(to) || map.blocked(from, to)) return from;
  return to;
}

StepOutcome step(const GridMap& map, const RawState& state, Action action,
                 const TaskSpec& task) {
  StepOutcome out;
  out.next_state = state;
  out.reward = task.step_cost;
  RawState& next = out.next_state;
  next.agent = move(map, state.agent, action);

  if (next.agent != state.agent) {
    if (auto kind = map.at(next.agent)) {
      switch (*kind) {
        case EntityKind::kCoffee:
          // Delivered items are never picked up again.
          if (!next.delivered_coffee) next.have_coffee = true;
          break;
        case EntityKind::kMail:
          if (!next.delivered_mail) next.have_mail = true;
          break;
        case EntityKind::kOffice:
          if (next.have_coffee) {
            next.have_coffee = false;
            next.delivered_coffee = true;
            if (task.needs_coffee) out.reward += task.task_reward;
          }
          if (next.have_mail) {
            next.have_mail = false;
            next.delivered_mail = true;
            if (task.needs_mail) out.reward += task.task_reward;
          }
          break;
        default:
          break;
      }
    }
  }

  const bool complete = (!task.needs_coffee || next.delivered_coffee) &&
                        (!task.needs_mail || next.delivered_mail);
  if (complete) {
    out.done = true;
    out.done_reason = DoneReason::kTaskComplete;
  }
  return out;
}

SymbolicState label_state(const RawState& state, const GridMap& map) {
  PropositionSet holds;
  if (state.have_coffee) holds.insert(props::kHaveCoffee);
  if (state.have_mail) holds.insert(props::kHaveMail);
  if (state.delivered_coffee) holds.insert(props::kDeliveredCoffee);
  if (state.delivered_mail) holds.insert(props::kDeliveredMail);
  if (auto kind = map.at(state.agent)) {
    if (*kind == EntityKind::kPlant) holds.insert(props::kOnPlant);
    if (*kind == EntityKind::kPrinter) holds.insert(props::kOnPrinter);
  }
  return SymbolicState(std::move(holds));
}

}  // namespace soarl
