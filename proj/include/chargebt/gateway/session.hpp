#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chargebt/bt/registry.hpp"
#include "chargebt/dsl/document.hpp"
#include "chargebt/fsm/orchestrator.hpp"
#include "chargebt/gateway/mission_hooks.hpp"
#include "chargebt/gateway/protocol.hpp"
#include "chargebt/mission/mission.hpp"
#include "chargebt/sim/world.hpp"

namespace chargebt::gateway {

class TreeValidationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotNotFound : public std::runtime_error {
 public:
  explicit SnapshotNotFound(const std::string& ref) : std::runtime_error("snapshot not found: " + ref) {}
};

class ConfigMismatch : public std::runtime_error {
 public:
  ConfigMismatch(const std::string& saved, const std::string& current)
      : std::runtime_error("snapshot config hash " + saved + " does not match " + current) {}
};

// snap-<tick>.json files in one directory; "latest" picks the highest tick.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::string dir) : dir_(std::move(dir)) {}
  const std::string& dir() const { return dir_; }
  std::string save(const nlohmann::json& snapshot, std::uint64_t tick) const;
  // Accepts "latest", a file name in the directory or a path. Throws SnapshotNotFound.
  nlohmann::json load(const std::string& ref) const;
  std::string resolve(const std::string& ref) const;

 private:
  std::string dir_;
};

std::string config_hash(const dsl::TreeDocument& trees, const sim::Scenario& scenario);

struct SessionConfig {
  sim::Scenario scenario;
  std::string scenario_path;  // what StartMission{scenario_ref} may name besides scenario.name
  dsl::TreeDocument trees;
  std::string snapshot_dir;  // empty: no snapshots
  std::uint64_t snapshot_every = 100;
  std::uint64_t heartbeat_every = 100;
};

// One mission service: orchestrator, world and mission store driven by an
// explicit tick. Only submit() may be called from other threads.
class Session {
 public:
  using Sink = std::function<void(const EventMsg&)>;

  // Throws TreeValidationFailed when the trees do not validate or do not
  // cover every phase.
  explicit Session(SessionConfig config);
  ~Session();

  void set_sink(Sink sink) { sink_ = std::move(sink); }

  void submit(Command c);
  // Parses a wire command; malformed input is answered with a Rejected ack.
  void submit_json(const nlohmann::json& j);

  // Drains queued commands, ticks the active phase tree, advances the world
  // by one tick and writes periodic snapshots.
  void tick_once();
  void write_initial_snapshot();

  bool stopped() const { return stopped_; }
  std::uint64_t sim_time() const { return world_.state().sim_time; }
  std::uint64_t last_seq() const { return seq_; }

  nlohmann::json state_json() const;
  nlohmann::json snapshot_json() const;
  // Throws IncompatibleSnapshotVersion or ConfigMismatch; on error the
  // session is unchanged.
  void restore(const nlohmann::json& snapshot);
  std::string save_snapshot();
  void load_snapshot(const std::string& ref);

  // Timing-independent end state used to compare runs.
  nlohmann::json outcome() const;
  nlohmann::json report() const;

  const fsm::Orchestrator& orchestrator() const { return *orch_; }
  fsm::Orchestrator& orchestrator() { return *orch_; }
  const sim::SimWorld& world() const { return world_; }
  sim::SimWorld& world() { return world_; }
  const mission::MissionStore& store() const { return store_; }
  mission::MissionStore& store() { return store_; }
  const bt::Blackboard& blackboard() const { return blackboard_; }
  bt::Blackboard& blackboard() { return blackboard_; }
  const dsl::TreeDocument& trees() const { return config_.trees; }
  const std::string& hash() const { return hash_; }
  std::optional<std::string> snapshot_dir() const;

  std::uint64_t prompts_raised() const { return prompts_raised_; }
  bool charging_succeeded() const { return charging_succeeded_; }
  // Last root status of the tree for `p`, if it ran since entering `p`.
  std::optional<bt::Status> last_status(fsm::Phase p) const;

  std::size_t headless_cursor() const { return headless_cursor_; }
  void set_headless_cursor(std::size_t c) { headless_cursor_ = c; }

 private:
  void apply(const Command& c);
  void ack(const std::string& command_id, CommandKind kind, const std::string& reject_reason);
  void emit(std::string_view kind, nlohmann::json payload);
  void emit_changes(const std::string& via);
  void emit_halted(const std::vector<std::string>& halted);
  void sync_caches();
  nlohmann::json hole_json(const mission::ChargeHole& h) const;
  nlohmann::json mission_json() const;
  bool scenario_matches(const std::string& ref) const;

  SessionConfig config_;
  std::string hash_;
  bt::BehaviorRegistry registry_;
  bt::Blackboard blackboard_;
  sim::SimWorld world_;
  mission::MissionStore store_;
  MissionHooks hooks_;
  std::unique_ptr<fsm::Orchestrator> orch_;
  std::optional<SnapshotStore> snapshots_;
  Sink sink_;

  std::mutex inbox_mutex_;
  std::deque<std::variant<Command, std::pair<std::string, std::string>>> inbox_;

  std::uint64_t seq_ = 0;
  bool stopped_ = false;
  std::uint64_t prompts_raised_ = 0;
  bool charging_succeeded_ = false;
  std::size_t headless_cursor_ = 0;
  bool defer_resync_ = false;
  bool resync_pending_ = false;
  std::map<fsm::Phase, bt::Status> last_status_;

  fsm::Phase seen_phase_ = fsm::Phase::kIdle;
  bool seen_paused_ = false;
  std::optional<fsm::AssistancePrompt> seen_prompt_;
  struct HoleView {
    mission::HoleState state;
    double x;
    double y;
    std::int64_t pumped_g;
    int pump_count;
    bool operator==(const HoleView&) const = default;
  };
  HoleView view_of(const mission::ChargeHole& h) const;

  std::map<std::string, HoleView> seen_holes_;
  std::optional<mission::ChargingMission> seen_mission_;
};

}  // namespace chargebt::gateway
