#include "chargebt/mission/mission.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace chargebt::mission {

ChargingMission plan_mission(std::vector<ChargeHole*> holes, const PlanParams& params, std::string mission_id,
                             int revision, std::string created_by) {
  if (holes.empty()) throw EmptyHoleSet();
  if (holes.size() > kMaxHoles) throw TooManyHoles(holes.size());
  for (const ChargeHole* h : holes) {
    if (h->state != HoleState::kDetected) {
      throw InvalidHoleTransition("hole '" + h->id + "' is " + std::string(to_string(h->state)) +
                                  ", only Detected holes can be planned");
    }
  }

  // Rows are bands of holes whose collars lie within row_tolerance of the
  // lowest hole in the band; estimate noise must not reorder a row.
  std::stable_sort(holes.begin(), holes.end(), [](const ChargeHole* a, const ChargeHole* b) {
    if (a->y != b->y) return a->y < b->y;
    return a->id < b->id;
  });
  std::vector<int> row(holes.size(), 0);
  for (std::size_t i = 1, start = 0; i < holes.size(); ++i) {
    row[i] = row[i - 1];
    if (holes[i]->y - holes[start]->y > params.row_tolerance) {
      start = i;
      ++row[i];
    }
  }
  std::vector<std::size_t> idx(holes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] < row[b];
    if (holes[a]->x != holes[b]->x) return holes[a]->x < holes[b]->x;
    return holes[a]->id < holes[b]->id;
  });
  std::vector<ChargeHole*> banded;
  for (std::size_t i : idx) banded.push_back(holes[i]);
  holes = std::move(banded);

  if (!params.order.empty()) {
    std::set<std::string> wanted(params.order.begin(), params.order.end());
    std::set<std::string> have;
    for (const ChargeHole* h : holes) have.insert(h->id);
    if (wanted != have || wanted.size() != params.order.size()) {
      throw MissionError("order override must list every planned hole exactly once");
    }
    std::vector<ChargeHole*> reordered;
    for (const auto& id : params.order) {
      reordered.push_back(*std::find_if(holes.begin(), holes.end(), [&](const ChargeHole* h) { return h->id == id; }));
    }
    holes = std::move(reordered);
  }

  ChargingMission m;
  m.mission_id = std::move(mission_id);
  m.revision = revision;
  m.created_by = std::move(created_by);
  for (ChargeHole* h : holes) {
    h->emulsion_target = params.linear_density * h->depth;
    h->detonator_type = params.detonator_type;
    h->state = HoleState::kPlanned;
    m.order.push_back(h->id);
    m.plan[h->id] = {h->emulsion_target, h->detonator_type};
  }
  m.queue = m.order;
  return m;
}

const ChargeHole* MissionStore::find(std::string_view id) const {
  auto it = std::find_if(holes_.begin(), holes_.end(), [&](const ChargeHole& h) { return h.id == id; });
  return it == holes_.end() ? nullptr : &*it;
}

const ChargeHole& MissionStore::hole(std::string_view id) const {
  if (const ChargeHole* h = find(id)) return *h;
  throw UnknownHole(std::string(id));
}

ChargeHole& MissionStore::mutable_hole(std::string_view id) { return const_cast<ChargeHole&>(hole(id)); }

void MissionStore::add(ChargeHole hole) {
  if (find(hole.id) != nullptr) throw MissionError("hole '" + hole.id + "' already exists");
  holes_.push_back(std::move(hole));
}

void MissionStore::set_state(std::string_view id, HoleState to) {
  ChargeHole& h = mutable_hole(id);
  if (!is_lifecycle_edge(h.state, to)) {
    throw InvalidHoleTransition("hole '" + h.id + "' cannot go from " + std::string(to_string(h.state)) + " to " +
                                std::string(to_string(to)));
  }
  h.state = to;
}

void MissionStore::reopen(std::string_view id) {
  ChargeHole& h = mutable_hole(id);
  if (h.state == HoleState::kDetected) return;
  if (!is_reopen_edge(h.state, HoleState::kDetected)) {
    throw InvalidHoleTransition("hole '" + h.id + "' is " + std::string(to_string(h.state)) + " and cannot be reopened");
  }
  h.state = HoleState::kDetected;
  if (mission_) std::erase(mission_->queue, h.id);
}

void MissionStore::update_estimate(std::string_view id, double x, double y) {
  ChargeHole& h = mutable_hole(id);
  h.x = x;
  h.y = y;
}

const ChargingMission& MissionStore::current_mission() const {
  if (!mission_) throw NoMission();
  return *mission_;
}

const ChargingMission& MissionStore::plan(const PlanParams& params, const std::string& created_by) {
  std::vector<ChargeHole*> candidates;
  for (auto& h : holes_) {
    if (h.state == HoleState::kDetected) candidates.push_back(&h);
  }
  const std::string id = mission_ ? mission_->mission_id : "mission-1";
  // plan_mission only touches the holes once validation passed, so a throw
  // leaves the store unchanged.
  ChargingMission next = plan_mission(std::move(candidates), params, id, revisions_ + 1, created_by);
  ++revisions_;
  mission_ = std::move(next);
  return *mission_;
}

void MissionStore::clear() { *this = MissionStore{}; }

std::vector<std::string>& MissionStore::queue() {
  if (!mission_) throw NoMission();
  return mission_->queue;
}

ChargeHole pop_next(MissionStore& store, bt::Blackboard& blackboard, std::string_view key) {
  auto& queue = store.queue();
  if (queue.empty()) throw EmptyQueue();
  const std::string id = queue.front();
  queue.erase(queue.begin());
  store.set_state(id, HoleState::kCharging);
  const ChargeHole& h = store.hole(id);
  blackboard.set(key, h.record());
  return h;
}

std::optional<ChargeHole> peek_next(const MissionStore& store) {
  const auto& m = store.mission();
  if (!m || m->queue.empty()) return std::nullopt;
  return store.hole(m->queue.front());
}

void to_json(nlohmann::json& j, const ChargeHole& h) {
  j = {{"id", h.id},
       {"x", h.x},
       {"y", h.y},
       {"depth", h.depth},
       {"collar_direction", h.collar_direction},
       {"state", to_string(h.state)},
       {"emulsion_target", h.emulsion_target},
       {"detonator_type", h.detonator_type}};
}

void from_json(const nlohmann::json& j, ChargeHole& h) {
  h.id = j.at("id").get<std::string>();
  h.x = j.at("x").get<double>();
  h.y = j.at("y").get<double>();
  h.depth = j.at("depth").get<double>();
  if (!(h.depth > 0.0)) throw MissionError("hole '" + h.id + "' must have depth > 0");
  h.collar_direction = j.value("collar_direction", std::array<double, 3>{0.0, 0.0, 1.0});
  const auto state = hole_state_from_string(j.value("state", std::string("Detected")));
  if (!state) throw MissionError("hole '" + h.id + "' has an unknown state");
  h.state = *state;
  h.emulsion_target = j.value("emulsion_target", 0.0);
  h.detonator_type = j.value("detonator_type", std::string());
}

void to_json(nlohmann::json& j, const ChargingMission& m) {
  nlohmann::json plan = nlohmann::json::object();
  for (const auto& [id, p] : m.plan) plan[id] = {{"emulsion_target", p.emulsion_target}, {"detonator_type", p.detonator_type}};
  j = {{"mission_id", m.mission_id}, {"revision", m.revision}, {"created_by", m.created_by},
       {"order", m.order},           {"queue", m.queue},       {"plan", plan}};
}

void from_json(const nlohmann::json& j, ChargingMission& m) {
  m.mission_id = j.at("mission_id").get<std::string>();
  m.revision = j.at("revision").get<int>();
  m.created_by = j.value("created_by", std::string());
  m.order = j.at("order").get<std::vector<std::string>>();
  m.queue = j.value("queue", m.order);
  m.plan.clear();
  const nlohmann::json plan = j.value("plan", nlohmann::json::object());
  for (const auto& [id, p] : plan.items()) {
    m.plan[id] = {p.at("emulsion_target").get<double>(), p.at("detonator_type").get<std::string>()};
  }
}

void to_json(nlohmann::json& j, const MissionStore& s) {
  j = {{"holes", s.holes_}, {"revisions", s.revisions_}, {"mission", nullptr}};
  if (s.mission_) j["mission"] = *s.mission_;
}

void from_json(const nlohmann::json& j, MissionStore& s) {
  s.holes_ = j.at("holes").get<std::vector<ChargeHole>>();
  s.revisions_ = j.value("revisions", 0);
  s.mission_.reset();
  if (j.contains("mission") && !j["mission"].is_null()) s.mission_ = j["mission"].get<ChargingMission>();
}

nlohmann::json mission_to_json(const MissionStore& store) {
  const ChargingMission& m = store.current_mission();
  nlohmann::json holes = nlohmann::json::array();
  for (const auto& id : m.order) {
    const ChargeHole& h = store.hole(id);
    holes.push_back({{"id", h.id},
                     {"x", h.x},
                     {"y", h.y},
                     {"depth", h.depth},
                     {"emulsion_target", h.emulsion_target},
                     {"detonator_type", h.detonator_type}});
  }
  return {{"mission_id", m.mission_id}, {"revision", m.revision}, {"holes", holes}, {"order", m.order}};
}

MissionStore mission_from_json(const nlohmann::json& j) {
  MissionStore store;
  ChargingMission m;
  m.mission_id = j.at("mission_id").get<std::string>();
  m.revision = j.at("revision").get<int>();
  for (const auto& jh : j.at("holes")) {
    ChargeHole h = jh.get<ChargeHole>();
    if (!(h.emulsion_target > 0.0)) throw MissionError("hole '" + h.id + "' needs emulsion_target > 0");
    h.state = HoleState::kPlanned;
    m.plan[h.id] = {h.emulsion_target, h.detonator_type};
    store.add(std::move(h));
  }
  m.order = j.at("order").get<std::vector<std::string>>();
  std::set<std::string> seen;
  for (const auto& id : m.order) {
    store.hole(id);
    if (!seen.insert(id).second) throw MissionError("hole '" + id + "' appears twice in the order");
  }
  if (m.order.size() > kMaxHoles) throw TooManyHoles(m.order.size());
  m.queue = m.order;
  nlohmann::json wrapped = store;
  wrapped["mission"] = m;
  wrapped["revisions"] = m.revision;
  return wrapped.get<MissionStore>();
}

}  // namespace chargebt::mission
