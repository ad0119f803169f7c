#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "chargebt/gateway/protocol.hpp"

namespace chargebt::gateway {

using SharedEvent = std::shared_ptr<const EventMsg>;

// Bounded queue of events for one connected observer. A subscriber that
// falls behind by more than its capacity is closed instead of blocking the
// publisher.
class Subscriber {
 public:
  explicit Subscriber(std::size_t capacity) : capacity_(capacity) {}

  // nullopt on timeout or once closed and drained.
  std::optional<SharedEvent> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  bool overflowed() const;

 private:
  friend class Hub;
  bool push(SharedEvent e);

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<SharedEvent> queue_;
  std::size_t capacity_;
  bool closed_ = false;
  bool overflowed_ = false;
};

// Fan-out from the tick loop to every subscriber. Only publish and admit
// run on the tick thread; subscribe may be called from anywhere.
class Hub {
 public:
  explicit Hub(std::size_t capacity = 4096) : capacity_(capacity) {}

  // The subscriber starts receiving at the next admit(), beginning with a
  // ResyncState event.
  std::shared_ptr<Subscriber> subscribe();

  void publish(const EventMsg& e);
  // Moves pending subscribers to the live set, each first receiving the
  // event built by `resync`.
  void admit(const std::function<EventMsg()>& resync);
  void close_all();

  // Latest full state, refreshed by the tick loop for request/response reads.
  void set_state(nlohmann::json state);
  nlohmann::json state() const;

  std::size_t live_count() const;
  bool has_pending() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<Subscriber>> live_;
  std::vector<std::shared_ptr<Subscriber>> pending_;
  nlohmann::json state_;
  std::size_t capacity_;
};

}  // namespace chargebt::gateway
