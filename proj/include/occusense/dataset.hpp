#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "occusense/acoustics.hpp"
#include "occusense/errors.hpp"
#include "occusense/timeutil.hpp"

namespace occusense {

enum class Kind { co2, temperature, frequency };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::co2: return "co2";
    case Kind::temperature: return "temperature";
    case Kind::frequency: return "frequency";
  }
  return "?";
}

inline std::optional<Kind> kind_from_name(std::string_view name) {
  if (name == "co2") return Kind::co2;
  if (name == "temperature") return Kind::temperature;
  if (name == "frequency") return Kind::frequency;
  return std::nullopt;
}

// One timestamped measurement from one sensor. Units: ppm for co2, degrees C
// for temperature, hertz for frequency.
struct SensorReading {
  std::int64_t timestamp = 0;  // UTC epoch seconds
  std::string sensor_id;
  Kind kind = Kind::co2;
  double value = 0.0;
};

// Physical plausibility check shared by ingestion and the live feed.
// Returns a reject reason, or nullptr when the value is acceptable.
inline const char* reading_value_problem(Kind kind, double value) {
  if (!std::isfinite(value)) return "value not finite";
  switch (kind) {
    case Kind::co2:
      if (!(value > 0.0)) return "co2 must be positive";
      break;
    case Kind::frequency:
      if (!(value > 0.0)) return "frequency must be positive";
      break;
    case Kind::temperature:
      if (value < -40.0 || value > 85.0) return "temperature outside [-40, 85]";
      break;
  }
  return nullptr;
}

struct RejectedRow {
  std::size_t line_no = 0;  // 1-based, header is line 1
  std::string raw;
  std::string reason;
};

struct IngestResult {
  std::vector<SensorReading> readings;  // timestamp order
  std::vector<RejectedRow> rejects;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<long> parse_long(std::string_view s) {
  s = trim(s);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Shortest round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string strip_bom(std::string line) {
  if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
    return line.substr(3);
  }
  return line;
}

}  // namespace detail

constexpr std::string_view kReadingsHeader = "timestamp,sensor_id,kind,value";
constexpr std::string_view kLabelsHeader = "day_index,slot_index,occupied";

// Parses one data row of the readings CSV. Returns the reading or a reject
// reason.
inline std::optional<SensorReading> parse_reading_line(std::string_view line, std::string* reason) {
  const std::vector<std::string> fields = detail::split_csv_line(detail::trim(line));
  if (fields.size() != 4) {
    if (reason) *reason = "expected 4 fields";
    return std::nullopt;
  }
  SensorReading reading;
  const auto ts = parse_iso8601_utc(detail::trim(fields[0]));
  if (!ts) {
    if (reason) *reason = "bad timestamp";
    return std::nullopt;
  }
  reading.timestamp = *ts;
  reading.sensor_id = std::string(detail::trim(fields[1]));
  if (reading.sensor_id.empty()) {
    if (reason) *reason = "empty sensor_id";
    return std::nullopt;
  }
  const auto kind = kind_from_name(detail::trim(fields[2]));
  if (!kind) {
    if (reason) *reason = "unknown kind";
    return std::nullopt;
  }
  reading.kind = *kind;
  const auto value = detail::parse_double(fields[3]);
  if (!value) {
    if (reason) *reason = "bad value";
    return std::nullopt;
  }
  reading.value = *value;
  if (const char* problem = reading_value_problem(reading.kind, reading.value)) {
    if (reason) *reason = problem;
    return std::nullopt;
  }
  return reading;
}

// Reads the whole stream. Malformed rows land in the rejects report; the
// accepted readings come back sorted by timestamp (stable).
inline IngestResult ingest_readings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("readings: empty input, expected header '" + std::string(kReadingsHeader) + "'");
  }
  if (detail::trim(detail::strip_bom(line)) != kReadingsHeader) {
    throw SchemaError("readings: header mismatch, expected '" + std::string(kReadingsHeader) + "'");
  }
  IngestResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::string reason;
    if (auto reading = parse_reading_line(line, &reason)) {
      result.readings.push_back(std::move(*reading));
    } else {
      result.rejects.push_back({line_no, line, reason});
    }
  }
  std::stable_sort(result.readings.begin(), result.readings.end(),
                   [](const SensorReading& a, const SensorReading& b) {
                     return a.timestamp < b.timestamp;
                   });
  return result;
}

inline IngestResult ingest_readings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open readings file '" + path.string() + "'");
  return ingest_readings(in);
}

inline void write_readings_csv(std::ostream& out, std::span<const SensorReading> readings) {
  out << kReadingsHeader << "\n";
  for (const SensorReading& r : readings) {
    out << format_iso8601_utc(r.timestamp) << ',' << r.sensor_id << ','
        << kind_name(r.kind) << ',' << detail::format_double(r.value) << "\n";
  }
}

// --- slot schedule -----------------------------------------------------------

// Daily lecture grid: slots_per_day back-to-back slots of slot_minutes each,
// the first opening at first_slot_minute past UTC midnight. Features are
// aggregated over the opening window_minutes of each slot.
struct Schedule {
  int first_slot_minute = 8 * 60;
  int slot_minutes = 50;
  int slots_per_day = 8;
  int window_minutes = 5;

  void validate() const {
    if (slots_per_day < 1) throw ScheduleError("schedule: slots_per_day must be >= 1");
    if (slot_minutes < 1) throw ScheduleError("schedule: slot_minutes must be >= 1");
    if (window_minutes < 1 || window_minutes > slot_minutes) {
      throw ScheduleError("schedule: window_minutes must be in [1, slot_minutes]");
    }
    if (first_slot_minute < 0 ||
        first_slot_minute + slots_per_day * slot_minutes > 24 * 60) {
      throw ScheduleError("schedule: slots must fit within one day");
    }
  }

  struct SlotRef {
    int day_index;
    int slot_index;
    bool in_window;
  };

  // Maps a timestamp onto the slot grid anchored at base_day (a UTC day
  // number). Nothing if the time of day falls outside every slot.
  std::optional<SlotRef> locate(std::int64_t ts, std::int64_t base_day) const {
    const std::int64_t day = utc_day(ts) - base_day;
    const int sod = seconds_of_day(ts);
    const int offset = sod - first_slot_minute * 60;
    if (offset < 0) return std::nullopt;
    const int slot = offset / (slot_minutes * 60);
    if (slot >= slots_per_day) return std::nullopt;
    const bool in_window = offset - slot * slot_minutes * 60 < window_minutes * 60;
    return SlotRef{static_cast<int>(day), slot, in_window};
  }

  std::int64_t slot_start_epoch(std::int64_t base_day, int day_index, int slot_index) const {
    return (base_day + day_index) * kSecondsPerDay +
           static_cast<std::int64_t>(first_slot_minute) * 60 +
           static_cast<std::int64_t>(slot_index) * slot_minutes * 60;
  }

  std::int64_t window_end_epoch(std::int64_t base_day, int day_index, int slot_index) const {
    return slot_start_epoch(base_day, day_index, slot_index) +
           static_cast<std::int64_t>(window_minutes) * 60;
  }
};

// --- slot samples ------------------------------------------------------------

// One feature vector for one 50-minute slot. label: 0 not occupied, 1
// occupied, empty when unlabeled.
struct SlotSample {
  int day_index = 0;
  int slot_index = 0;
  double temperature = std::numeric_limits<double>::quiet_NaN();
  double co2 = std::numeric_limits<double>::quiet_NaN();
  double reverberation_time = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> label;

  bool complete() const {
    return std::isfinite(temperature) && std::isfinite(co2) && std::isfinite(reverberation_time);
  }
};

struct Dataset {
  std::vector<SlotSample> samples;
  static constexpr std::array<const char*, 3> feature_names = {"temperature", "co2",
                                                               "reverberation_time"};

  std::vector<int> days() const {
    std::vector<int> out;
    for (const SlotSample& s : samples) out.push_back(s.day_index);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct IncompleteSlot {
  int day_index;
  int slot_index;
  std::vector<Kind> missing;
};

struct WindowizeResult {
  std::vector<SlotSample> samples;  // unlabeled, (day, slot) order
  std::vector<IncompleteSlot> incompletes;
};

enum class Aggregation { mean, median };

namespace detail {

inline double aggregate(std::vector<double>& values, Aggregation how) {
  if (how == Aggregation::median) {
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace detail

// Buckets readings into slot opening windows, fuses duplicate sensors per
// kind, and converts the fused frequency to a reverberation time through the
// room model. Slots with at least one kind but not all three go to the
// incompletes report.
inline WindowizeResult windowize(const std::vector<SensorReading>& readings,
                                 const Schedule& schedule, const RoomModel& room,
                                 Aggregation aggregation = Aggregation::mean) {
  schedule.validate();
  WindowizeResult result;
  if (readings.empty()) return result;

  std::int64_t base_day = utc_day(readings.front().timestamp);
  for (const SensorReading& r : readings) base_day = std::min(base_day, utc_day(r.timestamp));

  // (day, slot) -> per-kind raw values, in reading order.
  std::map<std::pair<int, int>, std::array<std::vector<double>, 3>> buckets;
  for (const SensorReading& r : readings) {
    const auto ref = schedule.locate(r.timestamp, base_day);
    if (!ref || !ref->in_window) continue;
    buckets[{ref->day_index, ref->slot_index}][static_cast<int>(r.kind)].push_back(r.value);
  }

  for (auto& [key, per_kind] : buckets) {
    std::vector<Kind> missing;
    for (int k = 0; k < 3; ++k) {
      if (per_kind[k].empty()) missing.push_back(static_cast<Kind>(k));
    }
    if (!missing.empty()) {
      result.incompletes.push_back({key.first, key.second, std::move(missing)});
      continue;
    }
    SlotSample sample;
    sample.day_index = key.first;
    sample.slot_index = key.second;
    sample.co2 = detail::aggregate(per_kind[static_cast<int>(Kind::co2)], aggregation);
    sample.temperature = detail::aggregate(per_kind[static_cast<int>(Kind::temperature)], aggregation);
    const double freq = detail::aggregate(per_kind[static_cast<int>(Kind::frequency)], aggregation);
    sample.reverberation_time = room_reverberation(room, freq);
    result.samples.push_back(sample);
  }
  return result;
}

// --- labeling ----------------------------------------------------------------

using LabelMap = std::map<std::pair<int, int>, int>;

// Training mode: every sample must have a label.
inline Dataset label_samples(const std::vector<SlotSample>& samples, const LabelMap& labels) {
  Dataset dataset;
  for (const SlotSample& s : samples) {
    if (!s.complete()) {
      throw InvalidFeature("sample (day " + std::to_string(s.day_index) + ", slot " +
                           std::to_string(s.slot_index) + ") has a missing feature");
    }
    const auto it = labels.find({s.day_index, s.slot_index});
    if (it == labels.end()) {
      throw LabelCoverageError("no label for (day " + std::to_string(s.day_index) +
                               ", slot " + std::to_string(s.slot_index) + ")");
    }
    SlotSample labeled = s;
    labeled.label = it->second;
    dataset.samples.push_back(std::move(labeled));
  }
  return dataset;
}

// Inference mode: labels omitted entirely.
inline Dataset label_samples(const std::vector<SlotSample>& samples) {
  Dataset dataset;
  for (const SlotSample& s : samples) {
    if (!s.complete()) {
      throw InvalidFeature("sample (day " + std::to_string(s.day_index) + ", slot " +
                           std::to_string(s.slot_index) + ") has a missing feature");
    }
    SlotSample unlabeled = s;
    unlabeled.label.reset();
    dataset.samples.push_back(std::move(unlabeled));
  }
  return dataset;
}

// --- labels CSV ---------------------------------------------------------------

struct LabelRow {
  int day_index;
  int slot_index;
  int occupied;
};

inline void write_labels_csv(std::ostream& out, std::span<const LabelRow> rows) {
  out << kLabelsHeader << "\n";
  for (const LabelRow& r : rows) {
    out << r.day_index << ',' << r.slot_index << ',' << r.occupied << "\n";
  }
}

inline LabelMap read_labels_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(detail::strip_bom(line)) != kLabelsHeader) {
    throw SchemaError("labels: header mismatch, expected '" + std::string(kLabelsHeader) + "'");
  }
  LabelMap labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(detail::trim(line));
    const auto day = fields.size() == 3 ? detail::parse_long(fields[0]) : std::nullopt;
    const auto slot = fields.size() == 3 ? detail::parse_long(fields[1]) : std::nullopt;
    const auto occ = fields.size() == 3 ? detail::parse_long(fields[2]) : std::nullopt;
    if (!day || !slot || !occ || (*occ != 0 && *occ != 1)) {
      throw SchemaError("labels line " + std::to_string(line_no) + ": expected 'day,slot,0|1'");
    }
    labels[{static_cast<int>(*day), static_cast<int>(*slot)}] = static_cast<int>(*occ);
  }
  return labels;
}

inline LabelMap read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file '" + path.string() + "'");
  return read_labels_csv(in);
}

// --- features CSV --------------------------------------------------------------

constexpr std::string_view kFeaturesHeader =
    "day_index,slot_index,temperature,co2,reverberation_time";

inline void write_features_csv(std::ostream& out, const Dataset& dataset) {
  const bool labeled = !dataset.samples.empty() && dataset.samples.front().label.has_value();
  out << kFeaturesHeader << (labeled ? ",occupied" : "") << "\n";
  for (const SlotSample& s : dataset.samples) {
    out << s.day_index << ',' << s.slot_index << ',' << detail::format_double(s.temperature)
        << ',' << detail::format_double(s.co2) << ','
        << detail::format_double(s.reverberation_time);
    if (labeled) {
      if (!s.label) throw LabelCoverageError("mixed labeled and unlabeled samples in export");
      out << ',' << *s.label;
    }
    out << "\n";
  }
}

inline Dataset read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("features: empty input");
  const std::string header_line = detail::strip_bom(line);
  const std::string_view header = detail::trim(header_line);
  bool labeled = false;
  if (header == std::string(kFeaturesHeader) + ",occupied") {
    labeled = true;
  } else if (header != kFeaturesHeader) {
    throw SchemaError("features: header mismatch, expected '" + std::string(kFeaturesHeader) +
                      "[,occupied]'");
  }
  Dataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(detail::trim(line));
    const std::size_t expected = labeled ? 6 : 5;
    if (fields.size() != expected) {
      throw SchemaError("features line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expected) + " fields");
    }
    SlotSample s;
    const auto day = detail::parse_long(fields[0]);
    const auto slot = detail::parse_long(fields[1]);
    const auto temp = detail::parse_double(fields[2]);
    const auto co2 = detail::parse_double(fields[3]);
    const auto rt = detail::parse_double(fields[4]);
    if (!day || !slot || !temp || !co2 || !rt) {
      throw SchemaError("features line " + std::to_string(line_no) + ": bad field");
    }
    s.day_index = static_cast<int>(*day);
    s.slot_index = static_cast<int>(*slot);
    s.temperature = *temp;
    s.co2 = *co2;
    s.reverberation_time = *rt;
    if (labeled) {
      const auto occ = detail::parse_long(fields[5]);
      if (!occ || (*occ != 0 && *occ != 1)) {
        throw SchemaError("features line " + std::to_string(line_no) + ": occupied must be 0 or 1");
      }
      s.label = static_cast<int>(*occ);
    }
    dataset.samples.push_back(s);
  }
  return dataset;
}

inline Dataset read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open features file '" + path.string() + "'");
  return read_features_csv(in);
}

// --- synthetic generator --------------------------------------------------------

// Per-class feature statistics for the generator.
struct ClassStats {
  double rt_mean, rt_sd;
  double temp_mean, temp_sd;
  double co2_mean, co2_sd;
};

// Defaults fitted to the known-occupancy measurements shipped with the
// project documentation.
struct GeneratorParams {
  ClassStats occupied{0.470, 0.026, 22.97, 0.08, 686.0, 8.0};
  ClassStats unoccupied{1.506, 0.085, 23.16, 0.02, 714.2, 6.5};
  double label_noise_prob = 0.05;
  std::uint64_t seed = 1;

  void validate() const {
    for (const ClassStats& c : {occupied, unoccupied}) {
      if (c.rt_sd < 0 || c.temp_sd < 0 || c.co2_sd < 0) {
        throw ParamError("generator: standard deviations must be >= 0");
      }
      if (!(c.rt_mean > 0)) throw ParamError("generator: reverberation means must be positive");
    }
    if (occupied.rt_mean == unoccupied.rt_mean) {
      throw ParamError("generator: class reverberation means must differ");
    }
    if (label_noise_prob < 0.0 || label_noise_prob >= 1.0) {
      throw ParamError("generator: label_noise_prob must be in [0, 1)");
    }
  }
};

// Deterministic RNG: mt19937_64 plus explicit Box-Muller, so the draw
// sequence does not depend on the standard library's distribution
// implementations.
class SyntheticRng {
 public:
  explicit SyntheticRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in (0, 1), never exactly 0 or 1.
  double uniform01() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal(double mean, double sd) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

// Draws one labeled corpus: per slot, a fair coin picks the true class,
// features come from that class's Gaussians, then the label is flipped with
// label_noise_prob (features keep the true class).
inline Dataset generate_synthetic(const GeneratorParams& params, int days, int slots_per_day) {
  params.validate();
  if (days < 1 || slots_per_day < 1) {
    throw ParamError("generator: days and slots_per_day must be >= 1");
  }
  SyntheticRng rng(params.seed);
  Dataset dataset;
  for (int day = 0; day < days; ++day) {
    for (int slot = 0; slot < slots_per_day; ++slot) {
      const bool occupied = rng.bernoulli(0.5);
      const ClassStats& c = occupied ? params.occupied : params.unoccupied;
      SlotSample s;
      s.day_index = day;
      s.slot_index = slot;
      do {
        s.reverberation_time = rng.normal(c.rt_mean, c.rt_sd);
      } while (!(s.reverberation_time > 0.0));
      s.temperature = rng.normal(c.temp_mean, c.temp_sd);
      do {
        s.co2 = rng.normal(c.co2_mean, c.co2_sd);
      } while (!(s.co2 > 0.0));
      int label = occupied ? 1 : 0;
      if (params.label_noise_prob > 0.0 && rng.bernoulli(params.label_noise_prob)) label ^= 1;
      s.label = label;
      dataset.samples.push_back(s);
    }
  }
  return dataset;
}

// --- readings-level simulation ---------------------------------------------------

struct SimulatedCorpus {
  std::vector<SensorReading> readings;
  std::vector<LabelRow> labels;
  Dataset dataset;  // the generated slot features the readings encode
};

namespace detail {

// Distinct frequencies tabulated for the room, with the reverberation time
// each one produces. The generator inverts this map: a target T is realized
// by emitting the frequency whose achievable T is closest.
inline std::vector<std::pair<double, double>> achievable_reverberations(const RoomModel& room) {
  std::vector<double> freqs;
  for (const auto& [id, points] : room.table.materials) {
    for (const AbsorptionPoint& p : points) freqs.push_back(p.frequency);
  }
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  std::vector<std::pair<double, double>> out;
  for (double f : freqs) out.emplace_back(f, room_reverberation(room, f));
  return out;
}

inline double frequency_for_target(const std::vector<std::pair<double, double>>& achievable,
                                   double target_T) {
  double best_f = achievable.front().first;
  double best_err = std::abs(achievable.front().second - target_T);
  for (const auto& [f, T] : achievable) {
    const double err = std::abs(T - target_T);
    if (err < best_err) {
      best_err = err;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace detail

constexpr int kSimulatedSensors = 6;  // each reports all three kinds once per slot

// Expands a generated corpus into raw sensor readings replayable through
// ingest/windowize/the detector, plus the matching labels file rows.
// Temperature and co2 readings jitter in mean-preserving pairs around the
// slot value; frequency readings all carry the tabulated frequency closest
// (in resulting T) to the slot's target reverberation time.
inline SimulatedCorpus simulate_corpus(const GeneratorParams& params, int days,
                                       int slots_per_day, const Schedule& schedule,
                                       const RoomModel& room,
                                       std::int64_t base_day = days_from_civil(2026, 1, 5)) {
  schedule.validate();
  SimulatedCorpus corpus;
  corpus.dataset = generate_synthetic(params, days, slots_per_day);
  const auto achievable = detail::achievable_reverberations(room);
  SyntheticRng jitter(params.seed ^ 0x9E3779B97F4A7C15ULL);

  for (const SlotSample& s : corpus.dataset.samples) {
    corpus.labels.push_back({s.day_index, s.slot_index, *s.label});
    const std::int64_t start = schedule.slot_start_epoch(base_day, s.day_index, s.slot_index);
    const double freq = detail::frequency_for_target(achievable, s.reverberation_time);
    const double temp_spread[3] = {jitter.uniform01() * 0.02, jitter.uniform01() * 0.02,
                                   jitter.uniform01() * 0.02};
    const double co2_spread[3] = {jitter.uniform01() * 2.0, jitter.uniform01() * 2.0,
                                  jitter.uniform01() * 2.0};
    for (int sensor = 0; sensor < kSimulatedSensors; ++sensor) {
      const std::int64_t ts = start + 10 * sensor;  // inside the opening window
      const std::string id = "s" + std::to_string(sensor + 1);
      const double sign = sensor % 2 == 0 ? 1.0 : -1.0;
      corpus.readings.push_back({ts, id, Kind::co2, s.co2 + sign * co2_spread[sensor / 2]});
      corpus.readings.push_back(
          {ts, id, Kind::temperature, s.temperature + sign * temp_spread[sensor / 2]});
      corpus.readings.push_back({ts, id, Kind::frequency, freq});
    }
  }
  return corpus;
}

}  // namespace occusense
