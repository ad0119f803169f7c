#include "chargebt/sim/world.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace chargebt::sim {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::int64_t to_grams(double kg) { return std::llround(kg * 1000.0); }

SimWorld::SimWorld(Scenario scenario) : scenario_(std::move(scenario)) {
  state_.inventory = scenario_.rig.detonator_inventory;
}

void SimWorld::step(std::uint64_t ticks) { state_.sim_time += ticks; }

bool SimWorld::advance(const std::string& actuator, const std::string& task, int duration) {
  Motion& m = state_.motions[actuator];
  if (m.task != task) m = Motion{task, 0};
  ++m.elapsed;
  if (m.elapsed < duration) return false;
  state_.motions.erase(actuator);
  return true;
}

double SimWorld::draw(std::string_view channel, std::string_view hole) {
  std::string key(channel);
  key += ':';
  key += hole;
  const std::uint64_t n = state_.rng_counters[key]++;
  std::uint64_t x = splitmix64(scenario_.seed ^ fnv1a(channel));
  x = splitmix64(x ^ fnv1a(hole));
  x = splitmix64(x ^ n);
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

bool SimWorld::chance(std::string_view channel, std::string_view hole, double p) {
  // Always consume the draw so a probability change does not shift later draws.
  const double u = draw(channel, hole);
  return u < p;
}

double SimWorld::gaussian(std::string_view channel, std::string_view hole, double sigma) {
  // Box-Muller from two keyed uniforms; portable across standard libraries.
  const double u1 = 1.0 - draw(channel, hole);
  const double u2 = draw(channel, hole);
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

const ScriptedFault* SimWorld::take_fault(FaultKind kind, std::string_view hole) {
  const auto& faults = scenario_.fault_config.scripted_faults;
  for (std::size_t i = 0; i < faults.size(); ++i) {
    const ScriptedFault& f = faults[i];
    if (f.kind != kind || state_.fired_faults.count(i) != 0) continue;
    const bool match = f.hole ? *f.hole == hole : state_.sim_time >= *f.tick;
    if (!match) continue;
    state_.fired_faults.insert(i);
    return &f;
  }
  return nullptr;
}

const TruthHole* SimWorld::truth(std::string_view id) const {
  for (const auto& h : scenario_.holes) {
    if (h.id == id) return &h;
  }
  return nullptr;
}

std::string SimWorld::region_of(double x, double y) const {
  const auto col = static_cast<long>(std::floor(x / scenario_.rig.region_width));
  const auto row = static_cast<long>(std::floor(y / scenario_.rig.region_height));
  return "r" + std::to_string(row) + "c" + std::to_string(col);
}

std::int64_t SimWorld::total_pumped_g() const {
  std::int64_t total = 0;
  for (const auto& [id, g] : state_.pumped_g) total += g;
  return total;
}

nlohmann::json SimWorld::snapshot() const {
  using nlohmann::json;
  const WorldState& s = state_;
  json motions = json::object();
  for (const auto& [a, m] : s.motions) motions[a] = {{"task", m.task}, {"elapsed", m.elapsed}};
  json hose = {{"hole", s.hose.hole},
               {"length", s.hose.length},
               {"fed_for", s.hose.fed_for},
               {"blocked_at", s.hose.blocked_at ? json(*s.hose.blocked_at) : json(nullptr)},
               {"unrecoverable", s.hose.unrecoverable}};
  return {{"version", kSnapshotVersion},
          {"sim_time", s.sim_time},
          {"face_scanned", s.face_scanned},
          {"holes_detected", s.holes_detected},
          {"mission_planned", s.mission_planned},
          {"detect_rounds", s.detect_rounds},
          {"boom_region", s.boom_region},
          {"tool_at", s.tool_at},
          {"motions", motions},
          {"hose", hose},
          {"secondary",
           {{"holding_detonator", s.secondary.holding_detonator},
            {"target", s.secondary.target},
            {"primed", s.secondary.primed}}},
          {"tip_loaded_for", s.tip_loaded_for},
          {"inventory", s.inventory},
          {"pumped_g", s.pumped_g},
          {"pump_count", s.pump_count},
          {"lost", s.lost},
          {"approach_failed", s.approach_failed},
          {"approached", s.approached},
          {"blockage_drawn", s.blockage_drawn},
          {"rng_counters", s.rng_counters},
          {"fired_faults", s.fired_faults},
          {"last_failure_hole", s.last_failure_hole},
          {"last_failure", s.last_failure}};
}

void SimWorld::restore(const nlohmann::json& j) {
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kSnapshotVersion) {
    throw IncompatibleSnapshotVersion(j.contains("version") ? j["version"].dump() : "<missing>");
  }
  WorldState s;
  s.sim_time = j.at("sim_time").get<std::uint64_t>();
  s.face_scanned = j.at("face_scanned").get<bool>();
  s.holes_detected = j.at("holes_detected").get<bool>();
  s.mission_planned = j.at("mission_planned").get<bool>();
  s.detect_rounds = j.at("detect_rounds").get<int>();
  s.boom_region = j.at("boom_region").get<std::string>();
  s.tool_at = j.at("tool_at").get<std::string>();
  for (const auto& [a, m] : j.at("motions").items()) s.motions[a] = {m.at("task").get<std::string>(), m.at("elapsed").get<int>()};
  const auto& hose = j.at("hose");
  s.hose.hole = hose.at("hole").get<std::string>();
  s.hose.length = hose.at("length").get<double>();
  s.hose.fed_for = hose.at("fed_for").get<std::string>();
  if (!hose.at("blocked_at").is_null()) s.hose.blocked_at = hose["blocked_at"].get<double>();
  s.hose.unrecoverable = hose.at("unrecoverable").get<bool>();
  const auto& sec = j.at("secondary");
  s.secondary.holding_detonator = sec.at("holding_detonator").get<bool>();
  s.secondary.target = sec.at("target").get<std::string>();
  s.secondary.primed = sec.at("primed").get<bool>();
  s.tip_loaded_for = j.at("tip_loaded_for").get<std::string>();
  s.inventory = j.at("inventory").get<int>();
  s.pumped_g = j.at("pumped_g").get<std::map<std::string, std::int64_t>>();
  s.pump_count = j.at("pump_count").get<std::map<std::string, int>>();
  s.lost = j.at("lost").get<std::set<std::string>>();
  s.approach_failed = j.at("approach_failed").get<std::set<std::string>>();
  s.approached = j.at("approached").get<std::set<std::string>>();
  s.blockage_drawn = j.at("blockage_drawn").get<std::set<std::string>>();
  s.rng_counters = j.at("rng_counters").get<std::map<std::string, std::uint64_t>>();
  s.fired_faults = j.at("fired_faults").get<std::set<std::size_t>>();
  s.last_failure_hole = j.at("last_failure_hole").get<std::string>();
  s.last_failure = j.at("last_failure").get<std::string>();
  state_ = std::move(s);
}

std::uint64_t SimWorld::state_hash() const { return fnv1a(snapshot().dump()); }

}  // namespace chargebt::sim
