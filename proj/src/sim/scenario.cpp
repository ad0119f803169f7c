#include "chargebt/sim/scenario.hpp"

#include <array>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace chargebt::sim {

namespace {

constexpr std::array<std::string_view, 6> kFaultNames = {
    "hole_not_found", "sweep_fails", "hose_blockage", "unrecoverable_blockage", "detonator_drop", "pose_offset"};

using nlohmann::json;

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidScenario(std::string("fault_config.") + name + " must be in [0, 1]");
}

void check_positive(double v, const std::string& name) {
  if (!(v > 0.0)) throw InvalidScenario(name + " must be > 0");
}

}  // namespace

std::string_view to_string(FaultKind k) noexcept { return kFaultNames[static_cast<std::size_t>(k)]; }

std::optional<FaultKind> fault_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kFaultNames.size(); ++i) {
    if (kFaultNames[i] == s) return static_cast<FaultKind>(i);
  }
  return std::nullopt;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    read(j, "name", s.name);
    read(j, "seed", s.seed);
    if (j.contains("face")) {
      s.face_width = j["face"].at("w").get<double>();
      s.face_height = j["face"].at("h").get<double>();
    }
    for (const auto& h : j.at("holes")) {
      TruthHole t;
      t.id = h.at("id").get<std::string>();
      t.x = h.at("x").get<double>();
      t.y = h.at("y").get<double>();
      t.depth = h.at("depth").get<double>();
      read(h, "collar_direction", t.collar_direction);
      s.holes.push_back(std::move(t));
    }
    if (j.contains("fault_config")) {
      const json& f = j["fault_config"];
      read(f, "p_hole_not_found_at_approach", s.fault_config.p_hole_not_found_at_approach);
      read(f, "p_sweep_recovery_success", s.fault_config.p_sweep_recovery_success);
      read(f, "p_hose_blockage_per_hole", s.fault_config.p_hose_blockage_per_hole);
      read(f, "p_wiggle_clears_blockage", s.fault_config.p_wiggle_clears_blockage);
      read(f, "p_detonator_drop", s.fault_config.p_detonator_drop);
      for (const auto& sf : f.value("scripted_faults", json::array())) {
        ScriptedFault fault;
        const auto kind = fault_kind_from_string(sf.at("kind").get<std::string>());
        if (!kind) throw InvalidScenario("unknown scripted fault kind '" + sf.at("kind").get<std::string>() + "'");
        fault.kind = *kind;
        if (sf.contains("hole")) fault.hole = sf["hole"].get<std::string>();
        if (sf.contains("tick")) fault.tick = sf["tick"].get<std::uint64_t>();
        if (!fault.hole && !fault.tick) throw InvalidScenario("scripted fault needs a hole or a tick");
        read(sf, "depth", fault.depth);
        read(sf, "dx", fault.dx);
        read(sf, "dy", fault.dy);
        s.fault_config.scripted_faults.push_back(std::move(fault));
      }
    }
    if (j.contains("timings")) {
      const json& t = j["timings"];
      read(t, "scan_ticks", s.timings.scan_ticks);
      read(t, "detect_ticks", s.timings.detect_ticks);
      read(t, "plan_ticks", s.timings.plan_ticks);
      read(t, "boom_move_ticks", s.timings.boom_move_ticks);
      read(t, "approach_ticks", s.timings.approach_ticks);
      read(t, "sweep_ticks", s.timings.sweep_ticks);
      read(t, "assemble_ticks", s.timings.assemble_ticks);
      read(t, "insert_ticks", s.timings.insert_ticks);
      read(t, "handover_ticks", s.timings.handover_ticks);
      read(t, "wiggle_ticks", s.timings.wiggle_ticks);
      read(t, "feed_rate", s.timings.feed_rate);
      read(t, "pump_rate", s.timings.pump_rate);
    }
    if (j.contains("rig")) {
      const json& r = j["rig"];
      read(r, "position_tolerance", s.rig.position_tolerance);
      read(r, "sweep_radius", s.rig.sweep_radius);
      read(r, "detection_noise", s.rig.detection_noise);
      read(r, "hose_max", s.rig.hose_max);
      read(r, "region_width", s.rig.region_width);
      read(r, "region_height", s.rig.region_height);
      read(r, "detonator_inventory", s.rig.detonator_inventory);
    }
    if (j.contains("plan")) {
      read(j["plan"], "linear_density", s.plan.linear_density);
      read(j["plan"], "detonator_type", s.plan.detonator_type);
      read(j["plan"], "row_tolerance", s.plan.row_tolerance);
      read(j["plan"], "order", s.plan.order);
    }
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("malformed scenario: ") + e.what());
  }

  const FaultConfig& f = s.fault_config;
  check_probability(f.p_hole_not_found_at_approach, "p_hole_not_found_at_approach");
  check_probability(f.p_sweep_recovery_success, "p_sweep_recovery_success");
  check_probability(f.p_hose_blockage_per_hole, "p_hose_blockage_per_hole");
  check_probability(f.p_wiggle_clears_blockage, "p_wiggle_clears_blockage");
  check_probability(f.p_detonator_drop, "p_detonator_drop");
  check_positive(s.face_width, "face.w");
  check_positive(s.face_height, "face.h");
  check_positive(s.timings.feed_rate, "timings.feed_rate");
  check_positive(s.timings.pump_rate, "timings.pump_rate");
  check_positive(s.rig.region_width, "rig.region_width");
  check_positive(s.rig.region_height, "rig.region_height");
  check_positive(s.plan.linear_density, "plan.linear_density");
  if (s.plan.row_tolerance < 0) throw InvalidScenario("plan.row_tolerance must be >= 0");
  for (int t : {s.timings.scan_ticks, s.timings.detect_ticks, s.timings.plan_ticks, s.timings.boom_move_ticks,
                s.timings.approach_ticks, s.timings.sweep_ticks, s.timings.assemble_ticks, s.timings.insert_ticks,
                s.timings.handover_ticks, s.timings.wiggle_ticks}) {
    if (t < 1) throw InvalidScenario("timings must be at least 1 tick");
  }
  if (s.rig.detonator_inventory < 0) throw InvalidScenario("rig.detonator_inventory must be >= 0");
  if (s.rig.detection_noise < 0) throw InvalidScenario("rig.detection_noise must be >= 0");
  if (s.holes.size() > mission::kMaxHoles) throw InvalidScenario("more than 100 holes on the face");
  std::set<std::string> ids;
  for (const auto& h : s.holes) {
    if (h.id.empty()) throw InvalidScenario("hole without id");
    if (!ids.insert(h.id).second) throw InvalidScenario("duplicate hole id '" + h.id + "'");
    check_positive(h.depth, "depth of hole '" + h.id + "'");
    if (h.depth > s.rig.hose_max) throw InvalidScenario("hole '" + h.id + "' is deeper than the hose");
    if (h.x < 0 || h.x > s.face_width || h.y < 0 || h.y > s.face_height) {
      throw InvalidScenario("hole '" + h.id + "' lies outside the face");
    }
  }
  for (const auto& sf : f.scripted_faults) {
    if (sf.hole && ids.count(*sf.hole) == 0) throw InvalidScenario("scripted fault names unknown hole '" + *sf.hole + "'");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScenario("cannot open scenario '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidScenario(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
  json holes = json::array();
  for (const auto& h : s.holes) {
    holes.push_back({{"id", h.id}, {"x", h.x}, {"y", h.y}, {"depth", h.depth}, {"collar_direction", h.collar_direction}});
  }
  json scripted = json::array();
  for (const auto& f : s.fault_config.scripted_faults) {
    json e = {{"kind", to_string(f.kind)}};
    if (f.hole) e["hole"] = *f.hole;
    if (f.tick) e["tick"] = *f.tick;
    if (f.kind == FaultKind::kHoseBlockage || f.kind == FaultKind::kUnrecoverableBlockage) e["depth"] = f.depth;
    if (f.kind == FaultKind::kPoseOffset) {
      e["dx"] = f.dx;
      e["dy"] = f.dy;
    }
    scripted.push_back(std::move(e));
  }
  const auto& f = s.fault_config;
  const auto& t = s.timings;
  const auto& r = s.rig;
  return {{"name", s.name},
          {"seed", s.seed},
          {"face", {{"w", s.face_width}, {"h", s.face_height}}},
          {"holes", holes},
          {"fault_config",
           {{"p_hole_not_found_at_approach", f.p_hole_not_found_at_approach},
            {"p_sweep_recovery_success", f.p_sweep_recovery_success},
            {"p_hose_blockage_per_hole", f.p_hose_blockage_per_hole},
            {"p_wiggle_clears_blockage", f.p_wiggle_clears_blockage},
            {"p_detonator_drop", f.p_detonator_drop},
            {"scripted_faults", scripted}}},
          {"timings",
           {{"scan_ticks", t.scan_ticks},
            {"detect_ticks", t.detect_ticks},
            {"plan_ticks", t.plan_ticks},
            {"boom_move_ticks", t.boom_move_ticks},
            {"approach_ticks", t.approach_ticks},
            {"sweep_ticks", t.sweep_ticks},
            {"assemble_ticks", t.assemble_ticks},
            {"insert_ticks", t.insert_ticks},
            {"handover_ticks", t.handover_ticks},
            {"wiggle_ticks", t.wiggle_ticks},
            {"feed_rate", t.feed_rate},
            {"pump_rate", t.pump_rate}}},
          {"rig",
           {{"position_tolerance", r.position_tolerance},
            {"sweep_radius", r.sweep_radius},
            {"detection_noise", r.detection_noise},
            {"hose_max", r.hose_max},
            {"region_width", r.region_width},
            {"region_height", r.region_height},
            {"detonator_inventory", r.detonator_inventory}}},
          {"plan",
           {{"linear_density", s.plan.linear_density},
            {"detonator_type", s.plan.detonator_type},
            {"row_tolerance", s.plan.row_tolerance},
            {"order", s.plan.order}}}};
}

}  // namespace chargebt::sim
