#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "occusense/dataset.hpp"
#include "occusense/errors.hpp"
#include "occusense/id3.hpp"

namespace occusense {

enum class CvMode { standard, paper };

inline const char* cv_mode_name(CvMode mode) {
  return mode == CvMode::standard ? "standard (train 6 / test 1)" : "paper (train 1 / test 6)";
}

struct Fold {
  std::set<int> train_days;
  std::set<int> test_days;
};

struct FoldPlan {
  std::vector<Fold> folds;
  CvMode mode = CvMode::standard;
};

// Standard mode: fold i trains on every day except i and tests on day i.
// The inverted mode trains on day i only and validates on the rest.
inline FoldPlan make_folds(const std::vector<int>& day_ids, CvMode mode) {
  if (day_ids.size() < 2) throw FoldError("cross validation needs at least 2 days");
  FoldPlan plan;
  plan.mode = mode;
  for (int held : day_ids) {
    Fold fold;
    for (int d : day_ids) {
      ((d == held) == (mode == CvMode::paper) ? fold.train_days : fold.test_days).insert(d);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

inline FoldPlan make_folds(int days, CvMode mode) {
  std::vector<int> day_ids;
  for (int d = 0; d < days; ++d) day_ids.push_back(d);
  return make_folds(day_ids, mode);
}

// Occupied (label 1) is the positive class.
struct Confusion {
  int tp = 0, tn = 0, fp = 0, fn = 0;

  int total() const { return tp + tn + fp + fn; }
  double accuracy_pct() const {
    return total() == 0 ? 0.0 : 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total());
  }
};

struct FoldResult {
  Fold fold;
  Confusion confusion;
  double accuracy_pct = 0.0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_accuracy_pct = 0.0;  // unweighted over folds
  CvMode mode = CvMode::standard;
  FeatureSet features;
  std::optional<std::uint64_t> seed;  // recorded when the corpus was generated
};

namespace detail {

inline void check_fold_partition(const Fold& fold) {
  for (int d : fold.test_days) {
    if (fold.train_days.count(d) != 0) {
      throw FoldError("fold leaks day " + std::to_string(d) + " into both partitions");
    }
  }
  if (fold.train_days.empty()) throw FoldError("fold has an empty training partition");
  if (fold.test_days.empty()) throw FoldError("fold has an empty test partition");
}

}  // namespace detail

// Per fold: fit on the train days, predict the test days, tally the
// confusion. Fold partitions are re-checked structurally on every run.
inline EvalReport cross_validate(const Dataset& dataset, const LearnerConfig& config,
                                 const FoldPlan& plan,
                                 std::optional<std::uint64_t> seed = std::nullopt) {
  config.validate();
  if (plan.folds.empty()) throw FoldError("fold plan is empty");
  const std::vector<int> dataset_days = dataset.days();
  const std::set<int> have(dataset_days.begin(), dataset_days.end());
  for (const Fold& fold : plan.folds) {
    for (int d : fold.train_days) {
      if (have.count(d) == 0) throw FoldError("plan references day " + std::to_string(d) + " absent from the dataset");
    }
    for (int d : fold.test_days) {
      if (have.count(d) == 0) throw FoldError("plan references day " + std::to_string(d) + " absent from the dataset");
    }
  }

  EvalReport report;
  report.mode = plan.mode;
  report.features = config.features;
  report.seed = seed;
  double accuracy_sum = 0.0;
  for (const Fold& fold : plan.folds) {
    detail::check_fold_partition(fold);
    std::vector<SlotSample> train;
    std::vector<SlotSample> test;
    for (const SlotSample& s : dataset.samples) {
      const bool in_train = fold.train_days.count(s.day_index) != 0;
      const bool in_test = fold.test_days.count(s.day_index) != 0;
      if (in_train && in_test) throw FoldError("sample day assigned to both partitions");
      if (in_train) train.push_back(s);
      if (in_test) test.push_back(s);
    }
    if (train.empty()) throw FoldError("fold has no training samples");

    const DecisionTree tree = fit(train, config);
    FoldResult result;
    result.fold = fold;
    for (const SlotSample& s : test) {
      const int truth = detail::require_label(s);
      const int predicted = predict(tree, s);
      if (predicted == 1) {
        (truth == 1 ? result.confusion.tp : result.confusion.fp) += 1;
      } else {
        (truth == 0 ? result.confusion.tn : result.confusion.fn) += 1;
      }
    }
    result.accuracy_pct = result.confusion.accuracy_pct();
    accuracy_sum += result.accuracy_pct;
    report.folds.push_back(std::move(result));
  }
  report.mean_accuracy_pct = accuracy_sum / static_cast<double>(report.folds.size());
  return report;
}

// One cross-validation row per non-empty subset of the three features.
struct AblationRow {
  bool co2 = false;
  bool temperature = false;
  bool reverberation = false;
  double mean_accuracy_pct = 0.0;
  std::vector<double> fold_accuracies_pct;
};

// Subsets are emitted in a fixed order: the six rows of the reference layout
// first, then the CO2-only subset that completes the enumeration.
inline std::vector<AblationRow> ablation(const Dataset& dataset, const LearnerConfig& config,
                                         const FoldPlan& plan) {
  static constexpr std::array<std::array<bool, 3>, 7> kSubsets = {{
      // co2, temperature, reverberation
      {true, false, true},
      {true, true, false},
      {true, true, true},
      {false, true, true},
      {false, false, true},
      {false, true, false},
      {true, false, false},
  }};
  std::vector<AblationRow> rows;
  for (const auto& subset : kSubsets) {
    LearnerConfig sub = config;
    sub.features = FeatureSet{subset[2], subset[1], subset[0]};
    const EvalReport report = cross_validate(dataset, sub, plan);
    AblationRow row;
    row.co2 = subset[0];
    row.temperature = subset[1];
    row.reverberation = subset[2];
    row.mean_accuracy_pct = report.mean_accuracy_pct;
    for (const FoldResult& f : report.folds) row.fold_accuracies_pct.push_back(f.accuracy_pct);
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- report rendering ------------------------------------------------------------

namespace detail {

inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string day_set(const std::set<int>& days) {
  std::string out;
  for (int d : days) {
    if (!out.empty()) out += ' ';
    out += std::to_string(d);
  }
  return out;
}

}  // namespace detail

inline std::string render_fold_report(const EvalReport& report) {
  std::ostringstream out;
  out << "cross validation: " << cv_mode_name(report.mode) << "\n";
  out << "features:";
  for (Feature f : kSplitOrder) {
    if (report.features.contains(f)) out << ' ' << feature_name(f);
  }
  out << "\n";
  if (report.seed) out << "seed: " << *report.seed << "\n";
  out << "fold  test_days  tp  tn  fp  fn  accuracy\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const FoldResult& f = report.folds[i];
    char line[128];
    std::snprintf(line, sizeof line, "%-4zu  %-9s  %-2d  %-2d  %-2d  %-2d  %s\n", i,
                  detail::day_set(f.fold.test_days).c_str(), f.confusion.tp, f.confusion.tn,
                  f.confusion.fp, f.confusion.fn, detail::pct(f.accuracy_pct).c_str());
    out << line;
  }
  out << "mean accuracy: " << detail::pct(report.mean_accuracy_pct) << "\n";
  return out.str();
}

inline void write_fold_report_csv(std::ostream& out, const EvalReport& report) {
  out << "fold,test_days,tp,tn,fp,fn,accuracy\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const FoldResult& f = report.folds[i];
    std::string days = detail::day_set(f.fold.test_days);
    for (char& c : days) {
      if (c == ' ') c = ';';
    }
    out << i << ',' << days << ',' << f.confusion.tp << ',' << f.confusion.tn << ','
        << f.confusion.fp << ',' << f.confusion.fn << ',' << detail::pct(f.accuracy_pct) << "\n";
  }
  out << "mean,,,,,," << detail::pct(report.mean_accuracy_pct) << "\n";
}

// Column layout: CO2 | Temperature | Reverberation time | Accuracy. The
// CO2-only row is starred: it completes the subset enumeration beyond the
// six-row reference layout.
inline std::string render_ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "CO2           Temperature   Reverberation time  Accuracy\n";
  for (const AblationRow& row : rows) {
    const bool extra = row.co2 && !row.temperature && !row.reverberation;
    char line[128];
    std::snprintf(line, sizeof line, "%-12s  %-12s  %-18s  %s%s\n",
                  row.co2 ? "Included" : "Not Included",
                  row.temperature ? "Included" : "Not Included",
                  row.reverberation ? "Included" : "Not Included",
                  detail::pct(row.mean_accuracy_pct).c_str(), extra ? " *" : "");
    out << line;
  }
  out << "* CO2-only subset, included to complete the enumeration\n";
  return out.str();
}

inline void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  const std::size_t folds = rows.empty() ? 0 : rows.front().fold_accuracies_pct.size();
  out << "co2,temperature,reverberation,accuracy_mean";
  for (std::size_t i = 0; i < folds; ++i) out << ",accuracy_fold_" << i;
  out << "\n";
  for (const AblationRow& row : rows) {
    out << (row.co2 ? 1 : 0) << ',' << (row.temperature ? 1 : 0) << ','
        << (row.reverberation ? 1 : 0) << ',' << detail::pct(row.mean_accuracy_pct);
    for (double a : row.fold_accuracies_pct) out << ',' << detail::pct(a);
    out << "\n";
  }
}

}  // namespace occusense
