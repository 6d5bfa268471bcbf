#include <catch2/catch_amalgamated.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "occusense/dataset.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("occusense_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(OCCUSENSE_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return {WEXITSTATUS(raw), slurp(out), slurp(err)};
}

fs::path fixture_features_csv() {
  static const fs::path path = [] {
    occusense::Dataset dataset;
    dataset.samples = testsupport::known_occupancy_samples();
    const fs::path p = work_dir() / "fixture_features.csv";
    std::ofstream out(p);
    occusense::write_features_csv(out, dataset);
    return p;
  }();
  return path;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  return lines;
}

}  // namespace

TEST_CASE("simulate is deterministic per seed and writes replayable files") {
  const fs::path dir = work_dir();
  const std::string base = " --days 7 --slots 8 --noise 0.05";
  const auto a = run_cli("simulate" + base + " --seed 11 --out-readings " +
                         (dir / "r1.csv").string() + " --out-labels " + (dir / "l1.csv").string());
  REQUIRE(a.exit_code == 0);
  const auto b = run_cli("simulate" + base + " --seed 11 --out-readings " +
                         (dir / "r2.csv").string() + " --out-labels " + (dir / "l2.csv").string());
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "r1.csv") == slurp(dir / "r2.csv"));
  CHECK(slurp(dir / "l1.csv") == slurp(dir / "l2.csv"));
  CHECK(count_lines(slurp(dir / "r1.csv")) == 1009);  // header + 1008 readings
  CHECK(count_lines(slurp(dir / "l1.csv")) == 57);

  const auto c = run_cli("simulate" + base + " --seed 12 --out-readings " +
                         (dir / "r3.csv").string() + " --out-labels " + (dir / "l3.csv").string());
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(dir / "r1.csv") != slurp(dir / "r3.csv"));
}

TEST_CASE("features exports the windowed table and reports incompletes on stderr") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 7 --slots 8 --seed 3 --out-readings " +
                  (dir / "fr.csv").string() + " --out-labels " + (dir / "fl.csv").string())
              .exit_code == 0);
  const auto res = run_cli("features --readings " + (dir / "fr.csv").string() + " --labels " +
                           (dir / "fl.csv").string());
  REQUIRE(res.exit_code == 0);
  CHECK(count_lines(res.out) == 57);  // header + 56 slots
  CHECK(res.out.rfind("day_index,slot_index,temperature,co2,reverberation_time,occupied", 0) ==
        0);

  // drop every frequency row of one slot: that slot becomes an incomplete
  std::istringstream in(slurp(dir / "fr.csv"));
  std::ostringstream filtered;
  std::string line;
  int dropped = 0;
  while (std::getline(in, line)) {
    if (line.find("frequency") != std::string::npos && line.rfind("2026-01-05T08:00", 0) == 0) {
      ++dropped;
      continue;
    }
    filtered << line << "\n";
  }
  REQUIRE(dropped == 6);
  std::ofstream(dir / "fr_gap.csv") << filtered.str();
  const auto gap = run_cli("features --readings " + (dir / "fr_gap.csv").string());
  REQUIRE(gap.exit_code == 0);
  CHECK(count_lines(gap.out) == 56);  // header + 55 slots
  CHECK(gap.err.find("incomplete slot (day 0, slot 0)") != std::string::npos);
  CHECK(gap.err.find("frequency") != std::string::npos);
}

TEST_CASE("train writes a model and prints the training summary") {
  const fs::path model = work_dir() / "model.json";
  const auto res = run_cli("train --features-csv " + fixture_features_csv().string() +
                           " --k 1 --model " + model.string());
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(model));
  CHECK(res.out.find("depth: ") != std::string::npos);
  CHECK(res.out.find("leaves: ") != std::string::npos);
  CHECK(res.out.find("training_accuracy: 100.000") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(model));
  CHECK(doc.at("format") == "occusense-tree/1");
  CHECK(doc.at("root").at("feature") == "reverberation_time");
}

TEST_CASE("train restricted to one feature never references the others") {
  const fs::path model = work_dir() / "model_rt.json";
  const auto res = run_cli("train --features-csv " + fixture_features_csv().string() +
                           " --k 1 --features reverberation_time --model " + model.string());
  REQUIRE(res.exit_code == 0);
  const std::string text = slurp(model);
  CHECK(text.find("temperature") == std::string::npos);
  CHECK(text.find("co2") == std::string::npos);
  CHECK(text.find("reverberation_time") != std::string::npos);
}

TEST_CASE("predict reproduces the fixture labels with the k=1 model") {
  const fs::path model = work_dir() / "model_predict.json";
  REQUIRE(run_cli("train --features-csv " + fixture_features_csv().string() +
                  " --k 1 --model " + model.string())
              .exit_code == 0);
  const auto res = run_cli("predict --features-csv " + fixture_features_csv().string() +
                           " --model " + model.string());
  REQUIRE(res.exit_code == 0);
  const auto samples = testsupport::known_occupancy_samples();
  std::istringstream lines(res.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "day_index,slot_index,predicted");
  for (const auto& s : samples) {
    REQUIRE(std::getline(lines, line));
    CHECK(line == std::to_string(s.day_index) + "," + std::to_string(s.slot_index) + "," +
                      std::to_string(*s.label));
  }
}

TEST_CASE("predict also consumes raw readings through the room model") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 2 --slots 4 --noise 0 --seed 6 --out-readings " +
                  (dir / "pr.csv").string() + " --out-labels " + (dir / "pl.csv").string())
              .exit_code == 0);
  // k=1: the 8-slot corpus has too few occupied samples for the default K
  const fs::path model = dir / "model_raw.json";
  REQUIRE(run_cli("train --readings " + (dir / "pr.csv").string() + " --labels " +
                  (dir / "pl.csv").string() + " --k 1 --model " + model.string())
              .exit_code == 0);
  const auto res = run_cli("predict --readings " + (dir / "pr.csv").string() + " --model " +
                           model.string());
  REQUIRE(res.exit_code == 0);
  CHECK(count_lines(res.out) == 9);  // header + 8 slots
  // noise-free corpus: predictions equal the written labels
  std::istringstream labels_in(slurp(dir / "pl.csv"));
  std::string labels_body((std::istreambuf_iterator<char>(labels_in)), {});
  const std::string expected =
      "day_index,slot_index,predicted" + labels_body.substr(labels_body.find('\n'));
  CHECK(res.out == expected);
}

TEST_CASE("train without labels fails with a labeled error") {
  const auto res = run_cli("train --readings missing.csv --model " +
                           (work_dir() / "nope.json").string());
  CHECK(res.exit_code != 0);
  CHECK(res.out.empty());
  CHECK(res.err.find("error:") != std::string::npos);
}

TEST_CASE("evaluate prints the report and honors --cv-mode and --out") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 7 --slots 8 --noise 0 --seed 5 --out-readings " +
                  (dir / "er.csv").string() + " --out-labels " + (dir / "el.csv").string())
              .exit_code == 0);
  const std::string data =
      " --readings " + (dir / "er.csv").string() + " --labels " + (dir / "el.csv").string();
  const auto res = run_cli("evaluate" + data + " --out " + (dir / "folds.csv").string() +
                           " --seed 5");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("mean accuracy: 100.000") != std::string::npos);
  CHECK(res.out.find("seed: 5") != std::string::npos);
  CHECK(slurp(dir / "folds.csv").rfind("fold,test_days", 0) == 0);

  const auto paper = run_cli("evaluate" + data + " --cv-mode paper");
  REQUIRE(paper.exit_code == 0);
  CHECK(paper.out.find("train 1 / test 6") != std::string::npos);

  const auto bad = run_cli("evaluate" + data + " --cv-mode sideways");
  CHECK(bad.exit_code != 0);
}

TEST_CASE("evaluate on a single-day corpus fails with a fold error") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 1 --slots 8 --seed 2 --out-readings " +
                  (dir / "one_r.csv").string() + " --out-labels " + (dir / "one_l.csv").string())
              .exit_code == 0);
  const auto res = run_cli("evaluate --readings " + (dir / "one_r.csv").string() + " --labels " +
                           (dir / "one_l.csv").string());
  CHECK(res.exit_code != 0);
  CHECK(res.err.find("at least 2 days") != std::string::npos);
}

TEST_CASE("ablate emits the seven-row table and CSV") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 4 --slots 6 --noise 0 --seed 9 --out-readings " +
                  (dir / "ar.csv").string() + " --out-labels " + (dir / "al.csv").string())
              .exit_code == 0);
  const auto res = run_cli("ablate --readings " + (dir / "ar.csv").string() + " --labels " +
                           (dir / "al.csv").string() + " --out " + (dir / "ablation.csv").string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("Included") != std::string::npos);
  CHECK(res.out.find("Not Included") != std::string::npos);
  CHECK(res.out.find("Reverberation time") != std::string::npos);
  const std::string csv = slurp(dir / "ablation.csv");
  CHECK(count_lines(csv) == 8);  // header + 7 subsets
  CHECK(csv.rfind("co2,temperature,reverberation,accuracy_mean", 0) == 0);
}

TEST_CASE("OCCUSENSE_LOG raises the stderr verbosity") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 2 --slots 3 --noise 0 --seed 4 --out-readings " +
                  (dir / "lr.csv").string() + " --out-labels " + (dir / "ll.csv").string())
              .exit_code == 0);
  const std::string args = "evaluate --readings " + (dir / "lr.csv").string() + " --labels " +
                           (dir / "ll.csv").string() + " --out " + (dir / "lf.csv").string();
  const auto quiet = run_cli(args);
  REQUIRE(quiet.exit_code == 0);
  CHECK(quiet.err.find("occusense info:") == std::string::npos);
  // env assignment goes in front of the binary, so build this command by hand
  const fs::path out = dir / "log_stdout.txt";
  const fs::path err = dir / "log_stderr.txt";
  const std::string cmd = "OCCUSENSE_LOG=info " + std::string(OCCUSENSE_CLI_PATH) + " " + args +
                          " >" + out.string() + " 2>" + err.string();
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(slurp(err).find("occusense info:") != std::string::npos);
}

TEST_CASE("serve ingests a line-delimited tcp feed") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 2 --slots 3 --noise 0 --seed 13 --out-readings " +
                  (dir / "tr.csv").string() + " --out-labels " + (dir / "tl.csv").string())
              .exit_code == 0);
  const int http_port = 20000 + static_cast<int>(::getpid() % 2000);
  const int feed_port = http_port + 2000;
  const std::string cmd = std::string(OCCUSENSE_CLI_PATH) + " serve --bind 127.0.0.1:" +
                          std::to_string(http_port) + " --feed-port " +
                          std::to_string(feed_port) + " --theta 0.9 --exit-on-eof 2>" +
                          (dir / "tcp_serve_err.txt").string();
  FILE* child = ::popen(cmd.c_str(), "r");
  REQUIRE(child != nullptr);

  int feed = -1;
  for (int attempt = 0; attempt < 200 && feed < 0; ++attempt) {
    feed = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(feed_port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(feed, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(feed);
      feed = -1;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  REQUIRE(feed >= 0);
  const std::string readings = slurp(dir / "tr.csv");
  REQUIRE(::write(feed, readings.data(), readings.size()) ==
          static_cast<ssize_t>(readings.size()));

  httplib::Client client("127.0.0.1", http_port);
  client.set_connection_timeout(1, 0);
  nlohmann::json events = nlohmann::json::array();
  for (int attempt = 0; attempt < 200 && events.size() < 5; ++attempt) {
    if (const auto res = client.Get("/history"); res && res->status == 200) {
      events = nlohmann::json::parse(res->body);
    }
    if (events.size() < 5) std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  CHECK(events.size() == 5);
  ::close(feed);  // feed ends -> flush -> exit
  CHECK(WEXITSTATUS(::pclose(child)) == 0);
}

TEST_CASE("serve replays a file, answers status queries, and exits on eof") {
  const fs::path dir = work_dir();
  REQUIRE(run_cli("simulate --days 2 --slots 4 --noise 0 --seed 8 --out-readings " +
                  (dir / "sr.csv").string() + " --out-labels " + (dir / "sl.csv").string())
              .exit_code == 0);
  const int port = 18000 + static_cast<int>(::getpid() % 2000);
  const std::string cmd = std::string(OCCUSENSE_CLI_PATH) + " serve --bind 127.0.0.1:" +
                          std::to_string(port) + " --theta 0.9 --exit-on-eof 2>" +
                          (dir / "serve_err.txt").string();
  FILE* child = ::popen(cmd.c_str(), "w");
  REQUIRE(child != nullptr);

  // feed every reading, then poll the endpoint while the pipe is still open
  const std::string readings = slurp(dir / "sr.csv");
  REQUIRE(std::fwrite(readings.data(), 1, readings.size(), child) == readings.size());
  REQUIRE(std::fflush(child) == 0);

  // wait until every slot but the trailing one has been classified
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1, 0);
  nlohmann::json events = nlohmann::json::array();
  for (int attempt = 0; attempt < 200 && events.size() < 7; ++attempt) {
    if (const auto res = client.Get("/history"); res && res->status == 200) {
      events = nlohmann::json::parse(res->body);
    }
    if (events.size() < 7) std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  REQUIRE(events.size() == 7);  // the trailing slot closes only on flush

  const auto res = client.Get("/status");
  REQUIRE(res);
  const nlohmann::json status = nlohmann::json::parse(res->body);
  CHECK((status.at("status") == "occupied" || status.at("status") == "unoccupied"));
  CHECK(status.contains("reverberation_time"));
  CHECK(status.contains("updated_at"));

  const int raw = ::pclose(child);  // closes stdin -> flush -> exit
  CHECK(WEXITSTATUS(raw) == 0);
}
