#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "authorship/common.hpp"
#include "authorship/features.hpp"
#include "authorship/prediction.hpp"

namespace authorship {

// Training rows in column form: per feature, the nonzero entries sorted by
// value. Absent entries are zeros, which is how sparse rows are split.
class TrainingData {
 public:
  TrainingData(const FeatureMatrix& x, std::vector<std::size_t> labels, std::size_t num_classes);
  TrainingData(const std::vector<std::vector<double>>& x, std::vector<std::size_t> labels, std::size_t num_classes);

  std::size_t num_rows() const { return labels_.size(); }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<std::size_t>& labels() const { return labels_; }

  struct Entry {
    double value;
    std::uint32_t row;
  };
  std::span<const Entry> column(std::size_t feature) const {
    return {entries_.data() + offsets_[feature], offsets_[feature + 1] - offsets_[feature]};
  }
  // Feature values of one training row, dense.
  std::vector<double> row_values(std::size_t row) const;

 private:
  void finish(std::vector<std::vector<Entry>> columns);

  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

// Read access to one sample's features, dense or sparse.
class RowView {
 public:
  explicit RowView(std::span<const double> dense) : dense_(dense), is_dense_(true) {}
  RowView(std::span<const std::size_t> columns, std::span<const double> values)
      : columns_(columns), values_(values), is_dense_(false) {}
  double value(std::size_t feature) const;

 private:
  std::span<const double> dense_;
  std::span<const std::size_t> columns_;
  std::span<const double> values_;
  bool is_dense_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> distribution;  // leaves only

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Binary tree; samples with value <= threshold descend left.
struct DecisionTree {
  std::size_t num_classes = 0;
  std::vector<TreeNode> nodes;

  const std::vector<double>& leaf_distribution(const RowView& x) const;
  // Leaf argmax, ties toward the lowest class index.
  std::size_t vote(const RowView& x) const;
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unbounded
  std::size_t min_leaf = 1;
  std::size_t mtry = 0;  // candidate features per split; 0 = all
};

// Greedy CART growth minimizing weighted Gini impurity. `weights` has one
// entry per training row; rows with weight 0 are excluded. `counts` gives row
// multiplicities for the min_leaf rule (empty = 1 per included row).
DecisionTree train_tree(const TrainingData& data, std::span<const double> weights,
                        std::span<const std::size_t> counts, const TreeParams& params, Rng& rng);

double gini(std::span<const double> class_weights);

struct RandomForestConfig {
  std::size_t num_trees = 500;
  std::size_t mtry = 0;  // 0 = floor(sqrt(num_features))
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1;

  bool operator==(const RandomForestConfig&) const = default;
};

struct RandomForestModel {
  RandomForestConfig config;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::size_t mtry = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const RandomForestModel&) const = default;
};

RandomForestModel rf_train(const TrainingData& data, const RandomForestConfig& config);
// Fraction of trees voting for each class.
std::vector<double> rf_predict_row(const RandomForestModel& model, const RowView& x);

struct AdaBoostConfig {
  std::size_t num_rounds = 100;
  std::size_t max_depth = 3;
  std::uint64_t seed = 1;

  bool operator==(const AdaBoostConfig&) const = default;
};

struct BoostingRound {
  DecisionTree tree;
  double alpha = 0.0;
  bool operator==(const BoostingRound&) const = default;
};

struct AdaBoostModel {
  AdaBoostConfig config;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<BoostingRound> rounds;

  bool operator==(const AdaBoostModel&) const = default;
};

// Round weight used when a weak learner fits the weighted sample perfectly.
inline const double kPerfectRoundAlpha = std::log(1e12);

double samme_alpha(double weighted_error, std::size_t num_classes);
// Multiplies the weights of missed samples by exp(alpha), then renormalizes
// to sum 1.
void samme_reweight(std::span<double> weights, std::span<const std::uint8_t> missed, double alpha);
AdaBoostModel ada_train(const TrainingData& data, const AdaBoostConfig& config);
// Alpha-weighted vote share of each class.
std::vector<double> ada_predict_row(const AdaBoostModel& model, const RowView& x);

PredictionMatrix rf_predict_proba(const RandomForestModel& model, const FeatureMatrix& x,
                                  const std::vector<std::string>& class_order);
PredictionMatrix ada_predict_proba(const AdaBoostModel& model, const FeatureMatrix& x,
                                   const std::vector<std::string>& class_order);

// Versioned JSON model files.
std::string to_json(const RandomForestModel& model);
std::string to_json(const AdaBoostModel& model);
RandomForestModel rf_from_json(const std::string& text);
AdaBoostModel ada_from_json(const std::string& text);

}  // namespace authorship
