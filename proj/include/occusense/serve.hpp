#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "occusense/detector.hpp"
#include "occusense/timeutil.hpp"

namespace occusense {

inline nlohmann::json event_json(const StatusEvent& event) {
  nlohmann::json doc;
  doc["status"] = status_name(event.status);
  if (event.reverberation_time) doc["reverberation_time"] = *event.reverberation_time;
  if (event.temperature) doc["temperature"] = *event.temperature;
  if (event.co2) doc["co2"] = *event.co2;
  doc["day_index"] = event.day_index;
  doc["slot_index"] = event.slot_index;
  doc["updated_at"] = format_iso8601_utc(event.updated_at);
  return doc;
}

inline nlohmann::json status_json(const DetectorState& state) {
  nlohmann::json doc;
  doc["status"] = status_name(state.last_status);
  if (state.last_reverberation_time) doc["reverberation_time"] = *state.last_reverberation_time;
  if (state.last_temperature) doc["temperature"] = *state.last_temperature;
  if (state.last_co2) doc["co2"] = *state.last_co2;
  if (state.last_event_slot && state.updated_at) {
    doc["day_index"] = state.last_event_slot->first;
    doc["slot_index"] = state.last_event_slot->second;
    doc["updated_at"] = format_iso8601_utc(*state.updated_at);
  }
  return doc;
}

// Snapshot shared between the single ingestion writer and any number of HTTP
// readers. publish() holds the lock only for the copy, so queries never stall
// the step loop.
class ServeState {
 public:
  void publish(const DetectorState& state, const std::optional<StatusEvent>& event) {
    std::lock_guard lock(mu_);
    state_ = state;
    if (event) history_.push_back(*event);
  }

  DetectorState state_copy() const {
    std::lock_guard lock(mu_);
    return state_;
  }

  std::vector<StatusEvent> history_copy() const {
    std::lock_guard lock(mu_);
    return history_;
  }

 private:
  mutable std::mutex mu_;
  DetectorState state_;
  std::vector<StatusEvent> history_;
};

// GET /status -> latest snapshot; GET /history -> every event this run, in
// order. Anything else is a 404 with a JSON error body.
inline std::unique_ptr<httplib::Server> make_status_server(const ServeState& state) {
  auto server = std::make_unique<httplib::Server>();
  server->Get("/status", [&state](const httplib::Request&, httplib::Response& res) {
    res.set_content(status_json(state.state_copy()).dump(), "application/json");
  });
  server->Get("/history", [&state](const httplib::Request&, httplib::Response& res) {
    nlohmann::json doc = nlohmann::json::array();
    for (const StatusEvent& e : state.history_copy()) doc.push_back(event_json(e));
    res.set_content(doc.dump(), "application/json");
  });
  server->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"error", "not found"}}.dump(), "application/json");
  });
  return server;
}

// Line-delimited TCP feed: binds host:port, accepts clients one at a time,
// and hands every received line to on_line. Stops after the first client
// disconnects when once is set. Returns false if the socket cannot be bound.
inline bool run_tcp_feed(const std::string& host, int port,
                         const std::function<void(const std::string&)>& on_line,
                         bool once = true) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) return false;
  int reuse = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof reuse);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    return false;
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listener, 1) != 0) {
    ::close(listener);
    return false;
  }
  do {
    const int client = ::accept(listener, nullptr, nullptr);
    if (client < 0) break;
    std::string carry;
    char buf[4096];
    for (;;) {
      const ssize_t got = ::read(client, buf, sizeof buf);
      if (got <= 0) break;
      carry.append(buf, static_cast<std::size_t>(got));
      std::size_t newline;
      while ((newline = carry.find('\n')) != std::string::npos) {
        std::string line = carry.substr(0, newline);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        carry.erase(0, newline + 1);
        on_line(line);
      }
    }
    if (!carry.empty()) on_line(carry);
    ::close(client);
  } while (!once);
  ::close(listener);
  return true;
}

}  // namespace occusense
