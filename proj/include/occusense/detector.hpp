#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "occusense/acoustics.hpp"
#include "occusense/dataset.hpp"
#include "occusense/errors.hpp"
#include "occusense/id3.hpp"
#include "occusense/log.hpp"

namespace occusense {

// Pure reverberation threshold: occupied when T <= theta.
struct ThresholdRule {
  double theta = 0.45;  // seconds
};

inline int threshold_detect(double reverberation_seconds, const ThresholdRule& rule) {
  if (!(reverberation_seconds > 0.0)) {
    throw InvalidFeature("reverberation time must be positive, got " +
                         std::to_string(reverberation_seconds));
  }
  if (!(rule.theta > 0.0)) {
    throw InvalidFeature("threshold must be positive, got " + std::to_string(rule.theta));
  }
  return reverberation_seconds <= rule.theta ? 1 : 0;
}

enum class Status { occupied, unoccupied, unknown };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::occupied: return "occupied";
    case Status::unoccupied: return "unoccupied";
    case Status::unknown: return "unknown";
  }
  return "?";
}

// One classification decision for one slot. Feature fields are empty when the
// slot's aggregates never became complete.
struct StatusEvent {
  int day_index = 0;
  int slot_index = 0;
  Status status = Status::unknown;
  std::optional<double> reverberation_time;
  std::optional<double> temperature;
  std::optional<double> co2;
  std::int64_t updated_at = 0;  // window close time, data clock
};

// Published snapshot of the detector. current_slot tracks the slot being
// aggregated; the last_* fields describe the most recent StatusEvent.
struct DetectorState {
  std::optional<std::pair<int, int>> current_slot;
  std::optional<std::pair<int, int>> last_event_slot;
  Status last_status = Status::unknown;
  std::optional<double> last_reverberation_time;
  std::optional<double> last_temperature;
  std::optional<double> last_co2;
  std::optional<std::int64_t> updated_at;
};

struct DetectorOptions {
  // Serve mode: a missing kind reuses the previous slot's value once before
  // the status degrades to unknown. Off by default so replaying a file
  // matches batch windowize -> predict exactly.
  bool hold_last_value = false;
  Aggregation aggregation = Aggregation::mean;
};

// Single-writer streaming classifier. Slot boundaries follow reading
// timestamps, so file replay and live operation share this code path. A slot
// is classified once, when its opening window closes (the first reading at or
// past the window end, or flush() at end of stream).
class Detector {
 public:
  Detector(Schedule schedule, RoomModel room, std::shared_ptr<const DecisionTree> tree,
           ThresholdRule rule, DetectorOptions options = {})
      : schedule_(schedule),
        room_(std::move(room)),
        tree_(std::move(tree)),
        rule_(rule),
        options_(options) {
    schedule_.validate();
  }

  Detector(Schedule schedule, RoomModel room, ThresholdRule rule, DetectorOptions options = {})
      : Detector(schedule, std::move(room), nullptr, rule, options) {}

  // Folds one reading into the current slot's aggregates; emits at most one
  // StatusEvent, when a pending slot's window closes.
  std::optional<StatusEvent> step(const SensorReading& reading) {
    if (const char* problem = reading_value_problem(reading.kind, reading.value)) {
      throw InvalidFeature(std::string("reading rejected: ") + problem);
    }
    if (!base_day_) base_day_ = utc_day(reading.timestamp);

    std::optional<StatusEvent> event;
    if (pending_ && reading.timestamp >= window_end_ && !emitted_) {
      event = close_pending();
    }

    const auto ref = schedule_.locate(reading.timestamp, *base_day_);
    const bool before_pending =
        ref && pending_ &&
        std::pair{ref->day_index, ref->slot_index} < std::pair{pending_->first, pending_->second};
    if (before_pending || (ref && ref->day_index < 0)) {
      stale_log_.push_back(reading);
      log_warn("stale reading at " + format_iso8601_utc(reading.timestamp) + " ignored");
      return event;
    }
    if (!ref || !ref->in_window) return event;

    const std::pair<int, int> key{ref->day_index, ref->slot_index};
    if (!pending_ || key != *pending_) {
      pending_ = key;
      emitted_ = false;
      for (auto& values : aggregates_) values.clear();
      window_end_ = schedule_.window_end_epoch(*base_day_, key.first, key.second);
      state_.current_slot = key;
    }
    aggregates_[static_cast<int>(reading.kind)].push_back(reading.value);
    return event;
  }

  // Closes the pending slot at end of stream.
  std::optional<StatusEvent> flush() {
    if (pending_ && !emitted_) return close_pending();
    return std::nullopt;
  }

  const DetectorState& state() const { return state_; }
  const std::vector<StatusEvent>& history() const { return history_; }
  const std::vector<SensorReading>& stale_log() const { return stale_log_; }

 private:
  std::optional<StatusEvent> close_pending() {
    emitted_ = true;
    StatusEvent event;
    event.day_index = pending_->first;
    event.slot_index = pending_->second;
    event.updated_at = window_end_;

    std::array<std::optional<double>, 3> fused;
    for (int k = 0; k < 3; ++k) {
      if (!aggregates_[k].empty()) {
        fused[k] = detail::aggregate(aggregates_[k], options_.aggregation);
        last_known_[k] = *fused[k];
        holds_used_[k] = 0;
      } else if (options_.hold_last_value && last_known_[k] && holds_used_[k] < 1) {
        fused[k] = last_known_[k];
        holds_used_[k] += 1;
      }
    }

    event.co2 = fused[static_cast<int>(Kind::co2)];
    event.temperature = fused[static_cast<int>(Kind::temperature)];
    if (const auto freq = fused[static_cast<int>(Kind::frequency)]) {
      event.reverberation_time = room_reverberation(room_, *freq);
    }

    if (event.co2 && event.temperature && event.reverberation_time) {
      int label;
      if (tree_) {
        SlotSample sample;
        sample.day_index = event.day_index;
        sample.slot_index = event.slot_index;
        sample.temperature = *event.temperature;
        sample.co2 = *event.co2;
        sample.reverberation_time = *event.reverberation_time;
        label = predict(*tree_, sample);
      } else {
        label = threshold_detect(*event.reverberation_time, rule_);
      }
      event.status = label == 1 ? Status::occupied : Status::unoccupied;
    } else {
      event.status = Status::unknown;
    }

    state_.last_event_slot = pending_;
    state_.last_status = event.status;
    state_.last_reverberation_time = event.reverberation_time;
    state_.last_temperature = event.temperature;
    state_.last_co2 = event.co2;
    state_.updated_at = event.updated_at;
    history_.push_back(event);
    return event;
  }

  Schedule schedule_;
  RoomModel room_;
  std::shared_ptr<const DecisionTree> tree_;
  ThresholdRule rule_;
  DetectorOptions options_;

  std::optional<std::int64_t> base_day_;
  std::optional<std::pair<int, int>> pending_;
  bool emitted_ = false;
  std::int64_t window_end_ = 0;
  std::array<std::vector<double>, 3> aggregates_;
  std::array<std::optional<double>, 3> last_known_;
  std::array<int, 3> holds_used_ = {0, 0, 0};

  DetectorState state_;
  std::vector<StatusEvent> history_;
  std::vector<SensorReading> stale_log_;
};

// Replays pre-sorted readings through a detector and returns every emitted
// event, including the end-of-stream flush.
inline std::vector<StatusEvent> replay_readings(Detector& detector,
                                                std::span<const SensorReading> readings) {
  std::vector<StatusEvent> events;
  for (const SensorReading& r : readings) {
    if (auto event = detector.step(r)) events.push_back(*event);
  }
  if (auto event = detector.flush()) events.push_back(*event);
  return events;
}

}  // namespace occusense
