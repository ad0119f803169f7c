#include "chargebt/gateway/hub.hpp"

#include <algorithm>

namespace chargebt::gateway {

std::optional<SharedEvent> Subscriber::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  SharedEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

void Subscriber::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscriber::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

bool Subscriber::overflowed() const {
  std::lock_guard lock(mutex_);
  return overflowed_;
}

bool Subscriber::push(SharedEvent e) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return false;
    if (queue_.size() >= capacity_) {
      // Dropping silently would break the event-sourced view; cut it off.
      overflowed_ = true;
      closed_ = true;
      queue_.clear();
    } else {
      queue_.push_back(std::move(e));
    }
  }
  cv_.notify_all();
  return !overflowed();
}

std::shared_ptr<Subscriber> Hub::subscribe() {
  auto s = std::make_shared<Subscriber>(capacity_);
  std::lock_guard lock(mutex_);
  pending_.push_back(s);
  return s;
}

void Hub::publish(const EventMsg& e) {
  auto shared = std::make_shared<const EventMsg>(e);
  std::lock_guard lock(mutex_);
  live_.erase(std::remove_if(live_.begin(), live_.end(), [&](const auto& s) { return !s->push(shared); }),
              live_.end());
}

void Hub::admit(const std::function<EventMsg()>& resync) {
  std::vector<std::shared_ptr<Subscriber>> fresh;
  {
    std::lock_guard lock(mutex_);
    fresh.swap(pending_);
  }
  if (fresh.empty()) return;
  auto shared = std::make_shared<const EventMsg>(resync());
  std::lock_guard lock(mutex_);
  for (auto& s : fresh) {
    if (s->push(shared)) live_.push_back(std::move(s));
  }
}

void Hub::close_all() {
  std::lock_guard lock(mutex_);
  for (auto& s : live_) s->close();
  for (auto& s : pending_) s->close();
  live_.clear();
  pending_.clear();
}

void Hub::set_state(nlohmann::json state) {
  std::lock_guard lock(mutex_);
  state_ = std::move(state);
}

nlohmann::json Hub::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::size_t Hub::live_count() const {
  std::lock_guard lock(mutex_);
  return live_.size();
}

bool Hub::has_pending() const {
  std::lock_guard lock(mutex_);
  return !pending_.empty();
}

}  // namespace chargebt::gateway
