// occusense: occupancy detection from CO2, temperature, and acoustic
// reverberation features. One binary, subcommand per pipeline stage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "occusense/acoustics.hpp"
#include "occusense/dataset.hpp"
#include "occusense/detector.hpp"
#include "occusense/eval.hpp"
#include "occusense/id3.hpp"
#include "occusense/log.hpp"
#include "occusense/serve.hpp"

namespace {

using namespace occusense;

struct ScheduleOpts {
  std::string slot_start = "08:00";
  int slot_minutes = 50;
  int slots_per_day = 8;
  int window_minutes = 5;

  Schedule to_schedule() const {
    int hh = 0, mm = 0;
    if (std::sscanf(slot_start.c_str(), "%2d:%2d", &hh, &mm) != 2 || hh < 0 || hh > 23 ||
        mm < 0 || mm > 59) {
      throw ScheduleError("slot start must be HH:MM, got '" + slot_start + "'");
    }
    Schedule schedule{hh * 60 + mm, slot_minutes, slots_per_day, window_minutes};
    schedule.validate();
    return schedule;
  }

  void add_options(CLI::App* cmd) {
    cmd->add_option("--slot-start", slot_start, "first slot start time, HH:MM UTC");
    cmd->add_option("--slot-minutes", slot_minutes, "slot length in minutes");
    cmd->add_option("--slots", slots_per_day, "slots per day");
    cmd->add_option("--window-minutes", window_minutes, "opening window used for aggregation");
  }
};

Aggregation parse_aggregation(const std::string& name) {
  if (name == "mean") return Aggregation::mean;
  if (name == "median") return Aggregation::median;
  throw ParamError("--aggregate must be mean or median");
}

struct DataOpts {
  std::string features_csv;
  std::string readings;
  std::string labels;
  std::string room;
  std::string aggregate = "mean";
  ScheduleOpts schedule;

  void add_options(CLI::App* cmd, bool with_labels) {
    cmd->add_option("--features-csv", features_csv,
                    "pre-windowed feature table (skips readings ingestion)");
    cmd->add_option("--readings", readings, "raw readings CSV");
    if (with_labels) cmd->add_option("--labels", labels, "labels CSV (day,slot,occupied)");
    cmd->add_option("--room", room, "room config JSON (defaults to the built-in room)");
    cmd->add_option("--aggregate", aggregate, "duplicate-sensor fusion, mean or median");
    schedule.add_options(cmd);
  }

  RoomModel load_room() const { return room.empty() ? default_room() : load_room_config(room); }

  // Ingests, windowizes, and (when requested) labels; or short-circuits to a
  // features CSV. Diagnostics go to stderr only.
  Dataset load_dataset(bool need_labels) const {
    if (!features_csv.empty()) {
      const Dataset dataset = read_features_csv(features_csv);
      if (need_labels) {
        for (const SlotSample& s : dataset.samples) {
          if (!s.label) {
            throw LabelCoverageError("features file '" + features_csv +
                                     "' has no occupied column");
          }
        }
      }
      return dataset;
    }
    if (readings.empty()) {
      throw ParamError("provide either --features-csv or --readings");
    }
    const IngestResult ingested = ingest_readings(std::filesystem::path(readings));
    for (const RejectedRow& r : ingested.rejects) {
      std::fprintf(stderr, "reject line %zu: %s (%s)\n", r.line_no, r.raw.c_str(),
                   r.reason.c_str());
    }
    const WindowizeResult windows = windowize(ingested.readings, schedule.to_schedule(),
                                              load_room(), parse_aggregation(aggregate));
    for (const IncompleteSlot& slot : windows.incompletes) {
      std::string kinds;
      for (Kind k : slot.missing) kinds += std::string(" ") + kind_name(k);
      std::fprintf(stderr, "incomplete slot (day %d, slot %d): missing%s\n", slot.day_index,
                   slot.slot_index, kinds.c_str());
    }
    if (!need_labels) return label_samples(windows.samples);
    if (labels.empty()) throw ParamError("--labels is required with --readings");
    return label_samples(windows.samples, read_labels_csv(std::filesystem::path(labels)));
  }
};

struct LearnerOpts {
  int k = 4;
  int max_depth = -1;
  std::string features;
  int tie_class = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--k", k, "minimum points per node (K)");
    cmd->add_option("--max-depth", max_depth, "depth cap, negative for unlimited");
    cmd->add_option("--features", features,
                    "enabled feature subset, e.g. reverberation_time,temperature");
    cmd->add_option("--tie-class", tie_class, "class for majority ties, 0 or 1");
  }

  LearnerConfig to_config() const {
    LearnerConfig config;
    config.k_min_points = k;
    config.max_depth = max_depth;
    if (!features.empty()) config.features = parse_feature_set(features);
    config.tie_class = tie_class;
    config.validate();
    return config;
  }
};

FoldPlan plan_for(const Dataset& dataset, const std::string& cv_mode) {
  CvMode mode;
  if (cv_mode == "std") {
    mode = CvMode::standard;
  } else if (cv_mode == "paper") {
    mode = CvMode::paper;
  } else {
    throw ParamError("--cv-mode must be std or paper");
  }
  return make_folds(dataset.days(), mode);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos || colon + 1 >= bind.size()) {
    throw ParamError("--bind must be addr:port, got '" + bind + "'");
  }
  const auto port = detail::parse_long(bind.substr(colon + 1));
  if (!port || *port < 1 || *port > 65535) {
    throw ParamError("bad port in --bind '" + bind + "'");
  }
  return {bind.substr(0, colon), static_cast<int>(*port)};
}

int run_train(const DataOpts& data, const LearnerOpts& learner, const std::string& model_path) {
  const Dataset dataset = data.load_dataset(true);
  const LearnerConfig config = learner.to_config();
  const DecisionTree tree = fit(dataset, config);
  save_model(model_path, tree);
  std::printf("model: %s\n", model_path.c_str());
  std::printf("depth: %d\n", tree.depth());
  std::printf("leaves: %d\n", tree.leaf_count());
  std::printf("training_accuracy: %.3f\n", 100.0 * training_accuracy(tree, dataset.samples));
  return 0;
}

int run_predict(const DataOpts& data, const std::string& model_path) {
  const DecisionTree tree = load_model(model_path);
  const Dataset dataset = data.load_dataset(false);
  std::printf("day_index,slot_index,predicted\n");
  for (const SlotSample& s : dataset.samples) {
    std::printf("%d,%d,%d\n", s.day_index, s.slot_index, predict(tree, s));
  }
  return 0;
}

int run_evaluate(const DataOpts& data, const LearnerOpts& learner, const std::string& cv_mode,
                 const std::string& out_csv, std::optional<std::uint64_t> seed) {
  const Dataset dataset = data.load_dataset(true);
  const EvalReport report =
      cross_validate(dataset, learner.to_config(), plan_for(dataset, cv_mode), seed);
  std::fputs(render_fold_report(report).c_str(), stdout);
  if (!out_csv.empty()) {
    std::ostringstream csv;
    write_fold_report_csv(csv, report);
    write_text_file(out_csv, csv.str());
    log_info("per-fold report written to " + out_csv);
  }
  return 0;
}

int run_ablate(const DataOpts& data, const LearnerOpts& learner, const std::string& cv_mode,
               const std::string& out_csv) {
  const Dataset dataset = data.load_dataset(true);
  const auto rows = ablation(dataset, learner.to_config(), plan_for(dataset, cv_mode));
  std::fputs(render_ablation_table(rows).c_str(), stdout);
  if (!out_csv.empty()) {
    std::ostringstream csv;
    write_ablation_csv(csv, rows);
    write_text_file(out_csv, csv.str());
    log_info("ablation table written to " + out_csv);
  }
  return 0;
}

int run_simulate(int days, int slots, double noise, std::uint64_t seed,
                 const std::string& room_path, const ScheduleOpts& schedule_opts,
                 const std::string& out_readings, const std::string& out_labels) {
  GeneratorParams params;
  params.label_noise_prob = noise;
  params.seed = seed;
  const RoomModel room = room_path.empty() ? default_room() : load_room_config(room_path);
  const SimulatedCorpus corpus =
      simulate_corpus(params, days, slots, schedule_opts.to_schedule(), room);
  {
    std::ofstream out(out_readings);
    if (!out) throw IoError("cannot write '" + out_readings + "'");
    write_readings_csv(out, corpus.readings);
  }
  {
    std::ofstream out(out_labels);
    if (!out) throw IoError("cannot write '" + out_labels + "'");
    write_labels_csv(out, corpus.labels);
  }
  std::printf("readings: %s (%zu rows)\n", out_readings.c_str(), corpus.readings.size());
  std::printf("labels: %s (%zu rows)\n", out_labels.c_str(), corpus.labels.size());
  return 0;
}

int run_features(const DataOpts& data, bool labeled) {
  const Dataset dataset = data.load_dataset(labeled);
  std::ostringstream out;
  write_features_csv(out, dataset);
  std::fputs(out.str().c_str(), stdout);
  return 0;
}

int run_serve(const DataOpts& data, const std::string& model_path, double theta,
              const std::string& bind, int feed_port, bool no_hold, bool exit_on_eof) {
  const RoomModel room = data.load_room();
  std::shared_ptr<const DecisionTree> tree;
  if (!model_path.empty()) {
    tree = std::make_shared<const DecisionTree>(load_model(model_path));
  }
  DetectorOptions options;
  options.hold_last_value = !no_hold;
  options.aggregation = parse_aggregation(data.aggregate);
  Detector detector(data.schedule.to_schedule(), room, tree, ThresholdRule{theta}, options);

  ServeState state;
  auto server = make_status_server(state);
  const auto [host, port] = split_bind(bind);
  if (!server->bind_to_port(host, port)) {
    throw Error("cannot bind status endpoint to " + bind);
  }
  std::thread server_thread([&server] { server->listen_after_bind(); });
  server->wait_until_ready();
  log_info("status endpoint at http://" + bind + " (GET /status, GET /history)");
  log_info(tree ? "classifying with the model file" : "classifying with the threshold rule");

  const auto on_line = [&](const std::string& line) {
    const std::string_view body = detail::trim(line);
    if (body.empty() || body == kReadingsHeader) return;
    std::string reason;
    const auto reading = parse_reading_line(body, &reason);
    if (!reading) {
      log_warn("feed line rejected: " + reason);
      return;
    }
    try {
      const auto event = detector.step(*reading);
      state.publish(detector.state(), event);
      if (event) log_info("slot (" + std::to_string(event->day_index) + ", " +
                          std::to_string(event->slot_index) + ") -> " +
                          status_name(event->status));
    } catch (const Error& e) {
      log_warn(std::string("reading dropped: ") + e.what());
    }
  };

  if (feed_port > 0) {
    log_info("reading line feed from tcp port " + std::to_string(feed_port));
    if (!run_tcp_feed("127.0.0.1", feed_port, on_line)) {
      server->stop();
      server_thread.join();
      throw Error("cannot bind feed port " + std::to_string(feed_port));
    }
  } else {
    std::string line;
    while (std::getline(std::cin, line)) on_line(line);
  }
  state.publish(detector.state(), detector.flush());

  if (!exit_on_eof) {
    log_info("input exhausted; still serving status queries");
    server_thread.join();  // runs until the process is killed
    return 0;
  }
  server->stop();
  server_thread.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occupancy detection from CO2, temperature, and acoustic reverberation"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "fit a decision tree and write the model file");
  DataOpts train_data;
  LearnerOpts train_learner;
  std::string train_model;
  train_data.add_options(train, true);
  train_learner.add_options(train);
  train->add_option("--model", train_model, "output model file")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "classify slots with a trained model");
  DataOpts predict_data;
  std::string predict_model;
  predict_data.add_options(predict_cmd, false);
  predict_cmd->add_option("--model", predict_model, "model file")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "day-wise cross validation report");
  DataOpts eval_data;
  LearnerOpts eval_learner;
  std::string eval_mode = "std";
  std::string eval_out;
  std::uint64_t eval_seed = 0;
  bool eval_seed_set = false;
  eval_data.add_options(evaluate, true);
  eval_learner.add_options(evaluate);
  evaluate->add_option("--cv-mode", eval_mode, "std (train 6 / test 1) or paper (train 1 / test 6)");
  evaluate->add_option("--out", eval_out, "write the per-fold report CSV here");
  evaluate->add_option("--seed", eval_seed, "seed recorded in the report")
      ->each([&](const std::string&) { eval_seed_set = true; });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "cross validation per feature subset");
  DataOpts ablate_data;
  LearnerOpts ablate_learner;
  std::string ablate_mode = "std";
  std::string ablate_out;
  ablate_data.add_options(ablate, true);
  ablate_learner.add_options(ablate);
  ablate->add_option("--cv-mode", ablate_mode, "std or paper");
  ablate->add_option("--out", ablate_out, "write the ablation CSV here");

  // simulate; the schedule's --slots doubles as the corpus slot count so the
  // generated readings always fill the grid they are replayed against
  auto* simulate = app.add_subcommand("simulate", "write a synthetic readings + labels corpus");
  int sim_days = 7;
  double sim_noise = 0.05;
  std::uint64_t sim_seed = 1;
  std::string sim_room;
  ScheduleOpts sim_schedule;
  std::string sim_out_readings = "readings.csv";
  std::string sim_out_labels = "labels.csv";
  simulate->add_option("--days", sim_days, "days to simulate");
  simulate->add_option("--noise", sim_noise, "label flip probability");
  simulate->add_option("--seed", sim_seed, "generator seed");
  simulate->add_option("--room", sim_room, "room config JSON");
  sim_schedule.add_options(simulate);
  simulate->add_option("--out-readings", sim_out_readings, "readings CSV path");
  simulate->add_option("--out-labels", sim_out_labels, "labels CSV path");

  // features
  auto* features = app.add_subcommand("features", "export the windowed feature table");
  DataOpts features_data;
  features_data.add_options(features, true);

  // serve
  auto* serve = app.add_subcommand("serve", "stream readings and publish occupancy status");
  DataOpts serve_data;
  std::string serve_model;
  double serve_theta = 0.45;
  std::string serve_bind = "127.0.0.1:8080";
  int serve_feed_port = 0;
  bool serve_no_hold = false;
  bool serve_exit_on_eof = false;
  serve->add_option("--room", serve_data.room, "room config JSON");
  serve->add_option("--aggregate", serve_data.aggregate,
                    "duplicate-sensor fusion, mean or median");
  serve_data.schedule.add_options(serve);
  serve->add_option("--model", serve_model, "model file; omit to use the threshold rule");
  serve->add_option("--theta", serve_theta, "occupied when T <= theta (seconds)");
  serve->add_option("--bind", serve_bind, "status endpoint addr:port");
  serve->add_option("--feed-port", serve_feed_port,
                    "read the line feed from this tcp port instead of stdin");
  serve->add_flag("--no-hold", serve_no_hold, "never reuse the previous slot's values");
  serve->add_flag("--exit-on-eof", serve_exit_on_eof, "stop serving when the input ends");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(train)) return run_train(train_data, train_learner, train_model);
    if (app.got_subcommand(predict_cmd)) return run_predict(predict_data, predict_model);
    if (app.got_subcommand(evaluate)) {
      return run_evaluate(eval_data, eval_learner, eval_mode, eval_out,
                          eval_seed_set ? std::optional<std::uint64_t>(eval_seed) : std::nullopt);
    }
    if (app.got_subcommand(ablate)) {
      return run_ablate(ablate_data, ablate_learner, ablate_mode, ablate_out);
    }
    if (app.got_subcommand(simulate)) {
      return run_simulate(sim_days, sim_schedule.slots_per_day, sim_noise, sim_seed, sim_room,
                          sim_schedule, sim_out_readings, sim_out_labels);
    }
    if (app.got_subcommand(features)) {
      return run_features(features_data, !features_data.labels.empty());
    }
    if (app.got_subcommand(serve)) {
      return run_serve(serve_data, serve_model, serve_theta, serve_bind, serve_feed_port,
                       serve_no_hold, serve_exit_on_eof);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const occusense::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
