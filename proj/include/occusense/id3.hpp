#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "occusense/dataset.hpp"
#include "occusense/errors.hpp"

namespace occusense {

constexpr std::string_view kModelFormat = "occusense-tree/1";

enum class Feature { reverberation_time, temperature, co2 };

// Fixed order used to break gain ties between features.
constexpr std::array<Feature, 3> kSplitOrder = {Feature::reverberation_time,
                                                Feature::temperature, Feature::co2};

inline const char* feature_name(Feature f) {
  switch (f) {
    case Feature::reverberation_time: return "reverberation_time";
    case Feature::temperature: return "temperature";
    case Feature::co2: return "co2";
  }
  return "?";
}

inline std::optional<Feature> feature_from_name(std::string_view name) {
  if (name == "reverberation_time") return Feature::reverberation_time;
  if (name == "temperature") return Feature::temperature;
  if (name == "co2") return Feature::co2;
  return std::nullopt;
}

inline double feature_value(const SlotSample& s, Feature f) {
  switch (f) {
    case Feature::reverberation_time: return s.reverberation_time;
    case Feature::temperature: return s.temperature;
    case Feature::co2: return s.co2;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Which of the three features the learner may split on.
struct FeatureSet {
  bool reverberation_time = true;
  bool temperature = true;
  bool co2 = true;

  bool contains(Feature f) const {
    switch (f) {
      case Feature::reverberation_time: return reverberation_time;
      case Feature::temperature: return temperature;
      case Feature::co2: return co2;
    }
    return false;
  }
  int count() const {
    return (reverberation_time ? 1 : 0) + (temperature ? 1 : 0) + (co2 ? 1 : 0);
  }
  bool operator==(const FeatureSet&) const = default;

  static FeatureSet all() { return {}; }
  static FeatureSet only(Feature f) {
    FeatureSet set{false, false, false};
    set.set(f, true);
    return set;
  }
  void set(Feature f, bool enabled) {
    switch (f) {
      case Feature::reverberation_time: reverberation_time = enabled; return;
      case Feature::temperature: temperature = enabled; return;
      case Feature::co2: co2 = enabled; return;
    }
  }
};

// Parses "reverberation_time,temperature" style lists.
inline FeatureSet parse_feature_set(std::string_view csv) {
  FeatureSet set{false, false, false};
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string_view token =
        detail::trim(csv.substr(start, comma == std::string_view::npos ? csv.size() - start
                                                                       : comma - start));
    if (!token.empty()) {
      const auto f = feature_from_name(token);
      if (!f) throw ParamError("unknown feature '" + std::string(token) + "'");
      set.set(*f, true);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (set.count() == 0) throw ParamError("feature list is empty");
  return set;
}

struct LearnerConfig {
  int k_min_points = 4;  // a node with fewer samples becomes a leaf
  int max_depth = -1;    // negative: unlimited
  FeatureSet features;
  int tie_class = 0;  // majority ties resolve to unoccupied

  void validate() const {
    if (k_min_points < 1) throw ParamError("k_min_points must be >= 1");
    if (features.count() == 0) throw ParamError("features_enabled must be non-empty");
    if (tie_class != 0 && tie_class != 1) throw ParamError("tie_class must be 0 or 1");
  }
};

// Internal nodes route value <= threshold to the left child; leaves carry the
// majority class of their training subset.
struct TreeNode {
  // internal
  Feature feature = Feature::reverberation_time;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  // leaf
  int leaf_class = -1;
  int support = 0;
  double purity = 0.0;

  bool is_leaf() const { return left == nullptr; }
};

struct DecisionTree {
  std::unique_ptr<TreeNode> root;
  int k_min_points = 4;
  FeatureSet features;

  int depth() const { return node_depth(root.get()); }
  int leaf_count() const { return count_leaves(root.get()); }

 private:
  static int node_depth(const TreeNode* n) {
    if (n == nullptr || n->is_leaf()) return 0;
    return 1 + std::max(node_depth(n->left.get()), node_depth(n->right.get()));
  }
  static int count_leaves(const TreeNode* n) {
    if (n == nullptr) return 0;
    if (n->is_leaf()) return 1;
    return count_leaves(n->left.get()) + count_leaves(n->right.get());
  }
};

// Shannon entropy of a binary label list, in bits.
inline double entropy(std::span<const int> labels) {
  if (labels.empty()) throw EmptyPartition("entropy of an empty label list");
  std::size_t ones = 0;
  for (int l : labels) ones += l == 1 ? 1 : 0;
  const std::size_t zeros = labels.size() - ones;
  if (ones == 0 || zeros == 0) return 0.0;
  const double p1 = static_cast<double>(ones) / static_cast<double>(labels.size());
  const double p0 = static_cast<double>(zeros) / static_cast<double>(labels.size());
  return -(p1 * std::log2(p1) + p0 * std::log2(p0));
}

namespace detail {

inline int require_label(const SlotSample& s) {
  if (!s.label) {
    throw UnlabeledSample("sample (day " + std::to_string(s.day_index) + ", slot " +
                          std::to_string(s.slot_index) + ") has no label");
  }
  return *s.label;
}

inline std::vector<int> labels_of(std::span<const SlotSample> samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const SlotSample& s : samples) out.push_back(require_label(s));
  return out;
}

}  // namespace detail

// Entropy reduction achieved by the <=/> split. A split leaving either side
// empty yields 0.
inline double information_gain(std::span<const SlotSample> samples, Feature feature,
                               double threshold) {
  const std::vector<int> parent = detail::labels_of(samples);
  std::vector<int> left;
  std::vector<int> right;
  for (const SlotSample& s : samples) {
    (feature_value(s, feature) <= threshold ? left : right).push_back(*s.label);
  }
  if (left.empty() || right.empty()) return 0.0;
  const double n = static_cast<double>(parent.size());
  const double gain =
      entropy(parent) - (static_cast<double>(left.size()) / n) * entropy(left) -
      (static_cast<double>(right.size()) / n) * entropy(right);
  return gain < 0.0 ? 0.0 : gain;
}

struct SplitChoice {
  Feature feature;
  double threshold;
  double gain;
};

namespace detail {

// Shared scan behind best_split and fit. Candidates are midpoints between
// consecutive distinct sorted values per enabled feature, visited in
// kSplitOrder then ascending threshold, so the first strict maximum realizes
// the tie-break rules. min_child filters splits that would starve a side.
inline std::optional<SplitChoice> search_split(std::span<const SlotSample> samples,
                                               const FeatureSet& features,
                                               std::size_t min_child) {
  std::optional<SplitChoice> best;
  for (Feature feature : kSplitOrder) {
    if (!features.contains(feature)) continue;
    std::vector<double> values;
    values.reserve(samples.size());
    for (const SlotSample& s : samples) values.push_back(feature_value(s, feature));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 1; i < values.size(); ++i) {
      const double threshold = (values[i - 1] + values[i]) / 2.0;
      if (min_child > 1) {
        std::size_t left = 0;
        for (const SlotSample& s : samples) {
          left += feature_value(s, feature) <= threshold ? 1 : 0;
        }
        if (left < min_child || samples.size() - left < min_child) continue;
      }
      const double gain = information_gain(samples, feature, threshold);
      if (gain > 0.0 && (!best || gain > best->gain)) {
        best = SplitChoice{feature, threshold, gain};
      }
    }
  }
  return best;
}

}  // namespace detail

// Maximizes information gain over midpoints of consecutive distinct values of
// every enabled feature. Ties go to the earlier feature in kSplitOrder, then
// the lower threshold. Nothing when no candidate has positive gain.
inline std::optional<SplitChoice> best_split(std::span<const SlotSample> samples,
                                             const LearnerConfig& config) {
  return detail::search_split(samples, config.features, 1);
}

namespace detail {

inline std::unique_ptr<TreeNode> build_node(std::vector<SlotSample> samples,
                                            const LearnerConfig& config, int depth) {
  const std::size_t n = samples.size();
  std::size_t ones = 0;
  for (const SlotSample& s : samples) ones += require_label(s) == 1 ? 1 : 0;
  const std::size_t zeros = n - ones;

  auto make_leaf = [&] {
    auto leaf = std::make_unique<TreeNode>();
    const std::size_t majority = std::max(ones, zeros);
    leaf->leaf_class = ones > zeros ? 1 : ones < zeros ? 0 : config.tie_class;
    leaf->support = static_cast<int>(n);
    leaf->purity = static_cast<double>(majority) / static_cast<double>(n);
    return leaf;
  };

  const bool pure = ones == 0 || zeros == 0;
  const bool too_small = n < static_cast<std::size_t>(config.k_min_points);
  const bool depth_capped = config.max_depth >= 0 && depth >= config.max_depth;
  if (pure || too_small || depth_capped) return make_leaf();

  // K-point rule: a child node is only created if it reaches k_min_points
  // samples, so the admissible candidates are the splits that keep both
  // sides at K or more.
  const auto split = detail::search_split(
      samples, config.features, static_cast<std::size_t>(config.k_min_points));
  if (!split) return make_leaf();

  std::vector<SlotSample> left_samples;
  std::vector<SlotSample> right_samples;
  for (SlotSample& s : samples) {
    (feature_value(s, split->feature) <= split->threshold ? left_samples : right_samples)
        .push_back(std::move(s));
  }
  auto node = std::make_unique<TreeNode>();
  node->feature = split->feature;
  node->threshold = split->threshold;
  node->left = build_node(std::move(left_samples), config, depth + 1);
  node->right = build_node(std::move(right_samples), config, depth + 1);
  return node;
}

}  // namespace detail

// Recursive induction. A node becomes a leaf when its labels are pure, it has
// fewer than k_min_points samples, no admissible split has positive gain, or
// max_depth is reached.
inline DecisionTree fit(const std::vector<SlotSample>& samples, const LearnerConfig& config) {
  config.validate();
  if (samples.empty()) throw EmptyPartition("fit needs at least one sample");
  DecisionTree tree;
  tree.k_min_points = config.k_min_points;
  tree.features = config.features;
  tree.root = detail::build_node(samples, config, 0);
  return tree;
}

inline DecisionTree fit(const Dataset& dataset, const LearnerConfig& config) {
  return fit(dataset.samples, config);
}

inline int predict(const TreeNode* node, const SlotSample& sample) {
  while (!node->is_leaf()) {
    const double v = feature_value(sample, node->feature);
    if (std::isnan(v)) {
      throw MissingFeature(std::string("sample is missing feature '") +
                           feature_name(node->feature) + "'");
    }
    node = v <= node->threshold ? node->left.get() : node->right.get();
  }
  return node->leaf_class;
}

inline int predict(const DecisionTree& tree, const SlotSample& sample) {
  return predict(tree.root.get(), sample);
}

// Fraction of samples the tree classifies as their own label.
inline double training_accuracy(const DecisionTree& tree, std::span<const SlotSample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const SlotSample& s : samples) {
    hits += predict(tree, s) == detail::require_label(s) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// --- model document ------------------------------------------------------------
//
// { "format": "occusense-tree/1", "k_min_points": 4,
//   "features": ["reverberation_time", ...],
//   "root": { "feature": "...", "threshold": t, "left": {...}, "right":
//             { "leaf": 1, "support": 5, "purity": 1.0 } } }

namespace detail {

inline nlohmann::json node_to_json(const TreeNode* node) {
  if (node->is_leaf()) {
    return {{"leaf", node->leaf_class}, {"support", node->support}, {"purity", node->purity}};
  }
  return {{"feature", feature_name(node->feature)},
          {"threshold", node->threshold},
          {"left", node_to_json(node->left.get())},
          {"right", node_to_json(node->right.get())}};
}

inline std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& doc,
                                                const std::string& path) {
  if (!doc.is_object()) throw ModelFormatError(path + ": node must be an object");
  auto node = std::make_unique<TreeNode>();
  if (doc.contains("leaf")) {
    if (!doc.at("leaf").is_number_integer()) throw ModelFormatError(path + ": leaf class must be an integer");
    node->leaf_class = doc.at("leaf").get<int>();
    if (node->leaf_class != 0 && node->leaf_class != 1) {
      throw ModelFormatError(path + ": leaf class must be 0 or 1");
    }
    if (!doc.contains("support") || !doc.at("support").is_number_integer() ||
        doc.at("support").get<int>() < 1) {
      throw ModelFormatError(path + ": leaf needs integer support >= 1");
    }
    node->support = doc.at("support").get<int>();
    if (!doc.contains("purity") || !doc.at("purity").is_number()) {
      throw ModelFormatError(path + ": leaf needs numeric purity");
    }
    node->purity = doc.at("purity").get<double>();
    if (!(node->purity >= 0.5 && node->purity <= 1.0)) {
      throw ModelFormatError(path + ": purity must be in [0.5, 1.0]");
    }
    return node;
  }
  if (!doc.contains("feature") || !doc.at("feature").is_string()) {
    throw ModelFormatError(path + ": internal node needs a feature name");
  }
  const auto feature = feature_from_name(doc.at("feature").get<std::string>());
  if (!feature) {
    throw ModelFormatError(path + ": unknown feature '" + doc.at("feature").get<std::string>() + "'");
  }
  node->feature = *feature;
  if (!doc.contains("threshold") || !doc.at("threshold").is_number() ||
      !std::isfinite(doc.at("threshold").get<double>())) {
    throw ModelFormatError(path + ": threshold must be a finite number");
  }
  node->threshold = doc.at("threshold").get<double>();
  if (!doc.contains("left") || !doc.contains("right")) {
    throw ModelFormatError(path + ": internal node needs left and right children");
  }
  node->left = node_from_json(doc.at("left"), path + ".left");
  node->right = node_from_json(doc.at("right"), path + ".right");
  return node;
}

}  // namespace detail

inline nlohmann::json serialize(const DecisionTree& tree) {
  nlohmann::json features = nlohmann::json::array();
  for (Feature f : kSplitOrder) {
    if (tree.features.contains(f)) features.push_back(feature_name(f));
  }
  return {{"format", std::string(kModelFormat)},
          {"k_min_points", tree.k_min_points},
          {"features", features},
          {"root", detail::node_to_json(tree.root.get())}};
}

inline DecisionTree deserialize(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("format") || !doc.at("format").is_string() ||
      doc.at("format").get<std::string>() != kModelFormat) {
    throw ModelFormatError("model: expected format '" + std::string(kModelFormat) + "'");
  }
  DecisionTree tree;
  if (!doc.contains("k_min_points") || !doc.at("k_min_points").is_number_integer() ||
      doc.at("k_min_points").get<int>() < 1) {
    throw ModelFormatError("model: k_min_points must be an integer >= 1");
  }
  tree.k_min_points = doc.at("k_min_points").get<int>();
  if (!doc.contains("features") || !doc.at("features").is_array() || doc.at("features").empty()) {
    throw ModelFormatError("model: features must be a non-empty array");
  }
  tree.features = FeatureSet{false, false, false};
  for (const nlohmann::json& name : doc.at("features")) {
    if (!name.is_string()) throw ModelFormatError("model: feature names must be strings");
    const auto f = feature_from_name(name.get<std::string>());
    if (!f) throw ModelFormatError("model: unknown feature '" + name.get<std::string>() + "'");
    tree.features.set(*f, true);
  }
  if (!doc.contains("root")) throw ModelFormatError("model: missing root");
  tree.root = detail::node_from_json(doc.at("root"), "root");
  return tree;
}

inline DecisionTree deserialize_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model: invalid document: ") + e.what());
  }
  return deserialize(doc);
}

inline void save_model(const std::filesystem::path& path, const DecisionTree& tree) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out << serialize(tree).dump(2) << "\n";
}

inline DecisionTree load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_string(text);
}

}  // namespace occusense
