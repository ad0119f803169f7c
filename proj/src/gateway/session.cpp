#include "chargebt/gateway/session.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chargebt/dsl/validate.hpp"
#include "chargebt/gateway/codec.hpp"
#include "chargebt/mission/trees.hpp"
#include "chargebt/sim/leaves.hpp"

namespace chargebt::gateway {

namespace fs = std::filesystem;
using nlohmann::json;
using fsm::Phase;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

constexpr const char* kLatestFile = "LATEST";

std::string snapshot_name(std::uint64_t tick) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "snap-%012llu.json", static_cast<unsigned long long>(tick));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

fsm::Orchestrator::TreeMap compile_phase_trees(const dsl::TreeDocument& doc) {
  fsm::Orchestrator::TreeMap trees;
  for (Phase p : fsm::kAllPhases) {
    const auto name = fsm::phase_tree(p);
    if (!name) continue;
    const dsl::TreeDefinition* def = doc.find_tree(*name);
    if (def == nullptr) throw TreeValidationFailed("no tree named '" + std::string(*name) + "'");
    trees[p] = bt::Tree::compile(def->root);
  }
  return trees;
}

}  // namespace

// ---- snapshots

std::string SnapshotStore::save(const json& snapshot, std::uint64_t tick) const {
  fs::create_directories(dir_);
  const std::string name = snapshot_name(tick);
  write_atomic(fs::path(dir_) / name, snapshot.dump());
  write_atomic(fs::path(dir_) / kLatestFile, name + "\n");
  return (fs::path(dir_) / name).string();
}

std::string SnapshotStore::resolve(const std::string& ref) const {
  if (ref == "latest") {
    std::ifstream in(fs::path(dir_) / kLatestFile);
    std::string name;
    if (in >> name && fs::exists(fs::path(dir_) / name)) return (fs::path(dir_) / name).string();
    // No pointer file: fall back to the highest tick.
    std::string best;
    if (fs::is_directory(dir_)) {
      for (const auto& e : fs::directory_iterator(dir_)) {
        const std::string f = e.path().filename().string();
        if (f.rfind("snap-", 0) == 0 && e.path().extension() == ".json" && f > best) best = f;
      }
    }
    if (best.empty()) throw SnapshotNotFound(ref);
    return (fs::path(dir_) / best).string();
  }
  if (fs::is_regular_file(fs::path(dir_) / ref)) return (fs::path(dir_) / ref).string();
  if (fs::is_regular_file(ref)) return ref;
  throw SnapshotNotFound(ref);
}

json SnapshotStore::load(const std::string& ref) const {
  const std::string path = resolve(ref);
  std::ifstream in(path);
  if (!in) throw SnapshotNotFound(ref);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("snapshot " + path + " is not valid JSON: " + e.what());
  }
}

std::string config_hash(const dsl::TreeDocument& trees, const sim::Scenario& scenario) {
  return hex(fnv1a(dsl::serialize(trees) + "\n" + sim::scenario_to_json(scenario).dump()));
}

// ---- session

Session::Session(SessionConfig config)
    : config_(std::move(config)),
      world_(config_.scenario),
      hooks_(world_, store_, blackboard_) {
  const auto diagnostics = dsl::validate(config_.trees);
  if (dsl::has_errors(diagnostics)) {
    std::ostringstream os;
    os << "tree validation failed:";
    for (const auto& d : diagnostics) {
      if (d.severity == dsl::Severity::kError) os << "\n  " << d;
    }
    throw TreeValidationFailed(os.str());
  }
  hash_ = config_hash(config_.trees, config_.scenario);
  config_.trees.declare_keys(blackboard_);
  blackboard_.set_strict(true);
  if (blackboard_.declared_type(mission::kGiveReady)) blackboard_.set(mission::kGiveReady, false);
  if (blackboard_.declared_type(mission::kTakeReady)) blackboard_.set(mission::kTakeReady, false);
  sim::register_leaves(registry_, world_, store_);
  orch_ = std::make_unique<fsm::Orchestrator>(compile_phase_trees(config_.trees), registry_, blackboard_, &hooks_);
  if (!config_.snapshot_dir.empty()) snapshots_.emplace(config_.snapshot_dir);
  sync_caches();
}

Session::~Session() = default;

std::optional<std::string> Session::snapshot_dir() const {
  if (!snapshots_) return std::nullopt;
  return snapshots_->dir();
}

std::optional<bt::Status> Session::last_status(Phase p) const {
  auto it = last_status_.find(p);
  if (it == last_status_.end()) return std::nullopt;
  return it->second;
}

void Session::submit(Command c) {
  std::lock_guard lock(inbox_mutex_);
  inbox_.emplace_back(std::move(c));
}

void Session::submit_json(const json& j) {
  try {
    submit(command_from_json(j));
  } catch (const std::exception& e) {
    std::string id;
    if (j.is_object() && j.contains("command_id") && j["command_id"].is_string()) id = j["command_id"];
    std::lock_guard lock(inbox_mutex_);
    inbox_.emplace_back(std::make_pair(id, std::string(e.what())));
  }
}

void Session::emit(std::string_view kind, json payload) {
  EventMsg m{std::string(kind), ++seq_, world_.state().sim_time, std::move(payload)};
  if (sink_) sink_(m);
}

void Session::ack(const std::string& command_id, CommandKind kind, const std::string& reject_reason) {
  json p = {{"command_id", command_id}, {"command", to_string(kind)}};
  if (reject_reason.empty()) {
    p["result"] = "Accepted";
  } else {
    p["result"] = "Rejected";
    p["reason"] = reject_reason;
  }
  emit(events::kCommandAck, std::move(p));
}

Session::HoleView Session::view_of(const mission::ChargeHole& h) const {
  const auto& s = world_.state();
  auto g = s.pumped_g.find(h.id);
  auto c = s.pump_count.find(h.id);
  return {h.state, h.x, h.y, g == s.pumped_g.end() ? 0 : g->second, c == s.pump_count.end() ? 0 : c->second};
}

json Session::hole_json(const mission::ChargeHole& h) const {
  const HoleView v = view_of(h);
  return {{"id", h.id},
          {"state", mission::to_string(h.state)},
          {"x", h.x},
          {"y", h.y},
          {"depth", h.depth},
          {"emulsion_target", h.emulsion_target},
          {"detonator_type", h.detonator_type},
          {"pumped_kg", static_cast<double>(v.pumped_g) / 1000.0},
          {"pump_count", v.pump_count}};
}

json Session::mission_json() const {
  if (!store_.mission()) return nullptr;
  return *store_.mission();
}

void Session::sync_caches() {
  seen_phase_ = orch_->phase();
  seen_paused_ = orch_->paused();
  seen_prompt_ = orch_->prompt();
  seen_holes_.clear();
  for (const auto& h : store_.holes()) seen_holes_.emplace(h.id, view_of(h));
  seen_mission_ = store_.mission();
}

void Session::emit_changes(const std::string& via) {
  if (orch_->phase() != seen_phase_) {
    last_status_.erase(orch_->phase());
    emit(events::kPhaseChanged, {{"from", fsm::to_string(seen_phase_)},
                                 {"to", fsm::to_string(orch_->phase())},
                                 {"via", via.empty() ? json(nullptr) : json(via)}});
    seen_phase_ = orch_->phase();
  }
  if (seen_prompt_ && seen_prompt_ != orch_->prompt()) {
    emit(events::kPromptCleared, {{"node_id", seen_prompt_->node_id},
                                  {"hole_id", seen_prompt_->hole_id.empty() ? json(nullptr) : json(seen_prompt_->hole_id)},
                                  {"via", via.empty() ? json(nullptr) : json(via)}});
    seen_prompt_.reset();
  }
  if (orch_->prompt() && seen_prompt_ != orch_->prompt()) {
    emit(events::kPromptRaised, to_json(*orch_->prompt()));
    seen_prompt_ = orch_->prompt();
  }
  if (orch_->paused() != seen_paused_) {
    seen_paused_ = orch_->paused();
    emit(events::kRunStateChanged, {{"paused", seen_paused_}});
  }
  for (const auto& h : store_.holes()) {
    const HoleView v = view_of(h);
    auto it = seen_holes_.find(h.id);
    if (it != seen_holes_.end() && it->second == v) continue;
    seen_holes_.insert_or_assign(h.id, v);
    emit(events::kHoleUpdated, hole_json(h));
  }
  if (store_.mission() != seen_mission_) {
    seen_mission_ = store_.mission();
    emit(events::kMissionUpdated, mission_json());
  }
}

void Session::emit_halted(const std::vector<std::string>& halted) {
  emit(events::kTickTraceBatch, {{"tick", world_.state().sim_time},
                                 {"phase", fsm::to_string(orch_->phase())},
                                 {"status", nullptr},
                                 {"trace", nullptr},
                                 {"running", orch_->runtime() ? orch_->runtime()->running_nodes()
                                                              : std::vector<std::string>{}},
                                 {"halted", halted}});
}

bool Session::scenario_matches(const std::string& ref) const {
  if (ref.empty() || ref == config_.scenario.name) return true;
  if (config_.scenario_path.empty()) return false;
  if (ref == config_.scenario_path) return true;
  const fs::path p(config_.scenario_path);
  return ref == p.filename().string() || ref == p.stem().string() || ref == p.stem().stem().string();
}

void Session::apply(const Command& c) {
  std::string via = std::string(to_string(c.kind));
  std::string rejected;
  std::optional<std::vector<std::string>> halted;
  bool snapshot = false;
  try {
    switch (c.kind) {
      case CommandKind::kStartMission: {
        const std::string ref = c.args.value("scenario_ref", std::string());
        if (!scenario_matches(ref)) throw std::invalid_argument("scenario '" + ref + "' is not loaded");
        orch_->handle_event(fsm::EventKind::kStartMission);
        break;
      }
      case CommandKind::kStartCharging:
        if (orch_->phase() == Phase::kChargePlan && (!world_.state().mission_planned || !store_.mission())) {
          throw std::invalid_argument("no charging plan yet");
        }
        orch_->handle_event(fsm::EventKind::kStartCharging);
        break;
      case CommandKind::kRePlan:
        orch_->handle_event(fsm::EventKind::kRePlan);
        break;
      case CommandKind::kScanAgain:
        orch_->handle_event(fsm::EventKind::kScanAgain);
        break;
      case CommandKind::kPause:
        halted = orch_->pause();
        snapshot = true;
        break;
      case CommandKind::kEStop:
        // Always honoured: halt whatever runs and persist.
        halted = (orch_->runtime() != nullptr && !orch_->paused()) ? orch_->pause() : std::vector<std::string>{};
        snapshot = true;
        break;
      case CommandKind::kResume:
        orch_->resume();
        break;
      case CommandKind::kResolveAssistance: {
        const json& a = c.args.contains("args") && c.args["args"].is_object() ? c.args["args"] : c.args;
        const auto r = fsm::resolution_from_string(c.args.value("resolution", std::string()));
        if (!r) throw std::invalid_argument("unknown resolution '" + c.args.value("resolution", std::string()) + "'");
        fsm::ResolutionArgs ra{a.value("hole_id", std::string()), a.value("dx", 0.0), a.value("dy", 0.0)};
        via = std::string(fsm::to_string(*r));
        orch_->resolve_assistance(*r, ra);
        break;
      }
      case CommandKind::kTeleopNudge: {
        fsm::ResolutionArgs ra{c.args.value("hole_id", std::string()), c.args.value("dx", 0.0), c.args.value("dy", 0.0)};
        const auto& p = orch_->prompt();
        const bool answers_prompt =
            p && !orch_->paused() &&
            std::find(p->resolutions.begin(), p->resolutions.end(), fsm::Resolution::kTeleopNudge) !=
                p->resolutions.end() &&
            (ra.hole_id.empty() || ra.hole_id == p->hole_id);
        if (answers_prompt) {
          orch_->resolve_assistance(fsm::Resolution::kTeleopNudge, ra);
        } else {
          if (ra.hole_id.empty()) throw std::invalid_argument("TeleopNudge needs hole_id");
          hooks_.nudge(ra.hole_id, ra.dx, ra.dy);
        }
        break;
      }
      case CommandKind::kLoadSnapshot: {
        if (orch_->phase() != Phase::kIdle && !orch_->paused()) {
          throw std::invalid_argument("snapshots load only when Idle or paused");
        }
        // The ack has to go out before the resync it causes.
        defer_resync_ = true;
        load_snapshot(c.args.value("ref", std::string("latest")));
        via.clear();
        break;
      }
      case CommandKind::kShutdown:
        stopped_ = true;
        break;
    }
  } catch (const fsm::RejectedEvent& e) {
    rejected = e.reason();
  } catch (const std::exception& e) {
    rejected = e.what();
    if (rejected.empty()) rejected = "rejected";
  }
  defer_resync_ = false;
  ack(c.command_id, c.kind, rejected);
  if (resync_pending_) {
    resync_pending_ = false;
    emit(events::kResyncState, state_json());
  }
  if (!rejected.empty()) return;
  if (halted) emit_halted(*halted);
  emit_changes(via);
  if (snapshot) save_snapshot();
}

void Session::tick_once() {
  std::deque<std::variant<Command, std::pair<std::string, std::string>>> batch;
  {
    std::lock_guard lock(inbox_mutex_);
    batch.swap(inbox_);
  }
  for (auto& item : batch) {
    if (auto* c = std::get_if<Command>(&item)) {
      if (!stopped_) {
        apply(*c);
      } else {
        ack(c->command_id, c->kind, "shutting down");
      }
    } else {
      auto& [id, why] = std::get<1>(item);
      emit(events::kCommandAck, {{"command_id", id.empty() ? json(nullptr) : json(id)},
                                 {"command", nullptr},
                                 {"result", "Rejected"},
                                 {"reason", why}});
    }
  }
  if (stopped_) return;

  auto& s = world_.state();
  if (orch_->ticking()) {
    s.last_failure.clear();
    s.last_failure_hole.clear();
    const Phase ran = orch_->phase();
    const fsm::StepResult r = orch_->step();
    last_status_[ran] = r.tick->status;
    if (ran == Phase::kCharging && r.tick->status == bt::Status::kSuccess) charging_succeeded_ = true;
    if (r.prompt_raised) ++prompts_raised_;
    const bt::TreeRuntime* rt = orch_->runtime_for(ran);
    emit(events::kTickTraceBatch, {{"tick", s.sim_time},
                                   {"phase", fsm::to_string(ran)},
                                   {"status", bt::to_string(r.tick->status)},
                                   {"trace", to_json(r.tick->trace)},
                                   {"running", rt->running_nodes()},
                                   {"halted", json::array()}});
    emit_changes(r.emitted ? std::string(fsm::to_string(*r.emitted)) : std::string());
  }
  world_.step(1);
  if (config_.heartbeat_every != 0 && s.sim_time % config_.heartbeat_every == 0) {
    emit(events::kHeartbeat, {{"phase", fsm::to_string(orch_->phase())}, {"paused", orch_->paused()}});
  }
  if (config_.snapshot_every != 0 && s.sim_time % config_.snapshot_every == 0) save_snapshot();
}

void Session::write_initial_snapshot() { save_snapshot(); }

std::string Session::save_snapshot() {
  if (!snapshots_) return {};
  const std::string path = snapshots_->save(snapshot_json(), world_.state().sim_time);
  emit(events::kSnapshotWritten, {{"ref", fs::path(path).filename().string()}, {"path", path}});
  return path;
}

json Session::snapshot_json() const {
  return {{"version", sim::kSnapshotVersion},
          {"config_hash", hash_},
          {"sim_time", world_.state().sim_time},
          {"seq", seq_},
          {"phase", fsm::to_string(orch_->phase())},
          {"paused", orch_->paused()},
          {"prompt", orch_->prompt() ? to_json(*orch_->prompt()) : json(nullptr)},
          {"charging_succeeded", charging_succeeded_},
          {"prompts_raised", prompts_raised_},
          {"store", store_},
          {"blackboard", blackboard_to_json(blackboard_)},
          {"sim", world_.snapshot()},
          {"headless_cursor", headless_cursor_}};
}

void Session::restore(const json& j) {
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != sim::kSnapshotVersion) {
    throw sim::IncompatibleSnapshotVersion(j.is_object() && j.contains("version") ? j["version"].dump()
                                                                                   : "<missing>");
  }
  const std::string saved = j.value("config_hash", std::string());
  if (saved != hash_) throw ConfigMismatch(saved, hash_);

  // Build everything first so a bad snapshot leaves the session untouched.
  sim::SimWorld world(world_.scenario());
  world.restore(j.at("sim"));
  mission::MissionStore store = j.at("store").get<mission::MissionStore>();
  bt::Blackboard bb = blackboard_;
  blackboard_from_json(j.at("blackboard"), bb);
  const auto phase = fsm::phase_from_string(j.at("phase").get<std::string>());
  if (!phase) throw std::invalid_argument("snapshot has an unknown phase");
  std::optional<fsm::AssistancePrompt> prompt;
  if (!j.at("prompt").is_null()) prompt = prompt_from_json(j["prompt"]);

  world_.state() = world.state();
  store_ = std::move(store);
  blackboard_ = std::move(bb);
  orch_->restore(*phase, j.at("paused").get<bool>(), std::move(prompt));
  charging_succeeded_ = j.value("charging_succeeded", false);
  prompts_raised_ = j.value("prompts_raised", std::uint64_t{0});
  headless_cursor_ = j.value("headless_cursor", std::size_t{0});
  seq_ = std::max(seq_, j.value("seq", std::uint64_t{0}));
  last_status_.clear();
  sync_caches();
  if (defer_resync_) {
    resync_pending_ = true;
  } else {
    emit(events::kResyncState, state_json());
  }
}

void Session::load_snapshot(const std::string& ref) {
  if (!snapshots_) throw SnapshotNotFound(ref + " (no snapshot directory)");
  restore(snapshots_->load(ref));
}

json Session::state_json() const {
  json holes = json::array();
  for (const auto& h : store_.holes()) holes.push_back(hole_json(h));
  const auto& s = world_.state();
  return {{"phase", fsm::to_string(orch_->phase())},
          {"paused", orch_->paused()},
          {"prompt", orch_->prompt() ? to_json(*orch_->prompt()) : json(nullptr)},
          {"sim_time", s.sim_time},
          {"seq", seq_},
          {"holes", holes},
          {"mission", mission_json()},
          {"blackboard", blackboard_to_json(blackboard_)},
          {"rig",
           {{"boom_region", s.boom_region},
            {"tool_at", s.tool_at},
            {"holding_detonator", s.secondary.holding_detonator},
            {"tip_loaded_for", s.tip_loaded_for},
            {"inventory", s.inventory},
            {"hose_length", s.hose.length}}},
          {"charging_succeeded", charging_succeeded_},
          {"prompts_raised", prompts_raised_}};
}

json Session::outcome() const {
  json sim = world_.snapshot();
  sim.erase("sim_time");
  sim.erase("motions");
  return {{"phase", fsm::to_string(orch_->phase())},
          {"charging_succeeded", charging_succeeded_},
          {"prompts_raised", prompts_raised_},
          {"store", store_},
          {"blackboard", blackboard_to_json(blackboard_)},
          {"sim", sim}};
}

json Session::report() const {
  const json out = outcome();
  json holes = json::array();
  std::int64_t target_g = 0;
  for (const auto& h : store_.holes()) {
    holes.push_back(hole_json(h));
    if (h.state == mission::HoleState::kCharged) target_g += sim::to_grams(h.emulsion_target);
  }
  return {{"scenario", config_.scenario.name},
          {"seed", config_.scenario.seed},
          {"config_hash", hash_},
          {"phase", fsm::to_string(orch_->phase())},
          {"charging_succeeded", charging_succeeded_},
          {"prompts_raised", prompts_raised_},
          {"sim_time", world_.state().sim_time},
          {"holes", holes},
          {"total_pumped_g", world_.total_pumped_g()},
          {"charged_target_g", target_g},
          {"prompt", orch_->prompt() ? to_json(*orch_->prompt()) : json(nullptr)},
          {"outcome_digest", hex(fnv1a(out.dump()))}};
}

}  // namespace chargebt::gateway
