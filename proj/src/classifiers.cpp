#include "authorship/classifiers.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

namespace authorship {

using nlohmann::json;

TrainingData::TrainingData(const FeatureMatrix& x, std::vector<std::size_t> labels, std::size_t num_classes)
    : num_features_(x.cols()), num_classes_(num_classes), labels_(std::move(labels)) {
  if (labels_.size() != x.rows()) throw Error(ErrorCode::kInvalidArgument, "label count differs from row count");
  std::vector<std::vector<Entry>> columns(num_features_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = x.row_offsets[r]; k < x.row_offsets[r + 1]; ++k) {
      if (x.values[k] != 0.0) columns[x.columns[k]].push_back({x.values[k], static_cast<std::uint32_t>(r)});
    }
  }
  finish(std::move(columns));
}

TrainingData::TrainingData(const std::vector<std::vector<double>>& x, std::vector<std::size_t> labels,
                           std::size_t num_classes)
    : num_features_(x.empty() ? 0 : x.front().size()), num_classes_(num_classes), labels_(std::move(labels)) {
  if (labels_.size() != x.size()) throw Error(ErrorCode::kInvalidArgument, "label count differs from row count");
  std::vector<std::vector<Entry>> columns(num_features_);
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (x[r].size() != num_features_) throw Error(ErrorCode::kInvalidArgument, "ragged feature rows");
    for (std::size_t j = 0; j < num_features_; ++j) {
      if (x[r][j] != 0.0) columns[j].push_back({x[r][j], static_cast<std::uint32_t>(r)});
    }
  }
  finish(std::move(columns));
}

void TrainingData::finish(std::vector<std::vector<Entry>> columns) {
  for (auto label : labels_) {
    if (label >= num_classes_) throw Error(ErrorCode::kUnknownLabel, "class index " + std::to_string(label));
  }
  offsets_.assign(1, 0);
  for (auto& col : columns) {
    std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) {
      return a.value != b.value ? a.value < b.value : a.row < b.row;
    });
    entries_.insert(entries_.end(), col.begin(), col.end());
    offsets_.push_back(entries_.size());
  }
}

std::vector<double> TrainingData::row_values(std::size_t row) const {
  std::vector<double> out(num_features_, 0.0);
  for (std::size_t j = 0; j < num_features_; ++j) {
    for (const auto& e : column(j)) {
      if (e.row == row) out[j] = e.value;
    }
  }
  return out;
}

double RowView::value(std::size_t feature) const {
  if (is_dense_) return feature < dense_.size() ? dense_[feature] : 0.0;
  auto it = std::lower_bound(columns_.begin(), columns_.end(), feature);
  if (it == columns_.end() || *it != feature) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

const std::vector<double>& DecisionTree::leaf_distribution(const RowView& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x.value(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right);
  }
  return nodes[i].distribution;
}

std::size_t DecisionTree::vote(const RowView& x) const {
  const auto& d = leaf_distribution(x);
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double gini(std::span<const double> class_weights) {
  const double total = std::accumulate(class_weights.begin(), class_weights.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double w : class_weights) sq += (w / total) * (w / total);
  return 1.0 - sq;
}

namespace {

// Running class-weight sums for one side of a candidate split. `sq` tracks
// sum_c w_c^2 so the Gini term w - sq / w updates in O(1).
struct Side {
  std::vector<double> weight;
  double sq = 0.0;
  double total = 0.0;
  std::size_t count = 0;

  void add(std::size_t c, double w, std::size_t n) {
    sq += 2.0 * weight[c] * w + w * w;
    weight[c] += w;
    total += w;
    count += n;
  }
  void remove(std::size_t c, double w, std::size_t n) {
    sq += -2.0 * weight[c] * w + w * w;
    weight[c] -= w;
    total -= w;
    count -= n;
  }
};

struct PendingNode {
  int id;
  std::size_t depth;
  std::vector<std::uint32_t> rows;
};

}  // namespace

DecisionTree train_tree(const TrainingData& data, std::span<const double> weights,
                        std::span<const std::size_t> counts, const TreeParams& params, Rng& rng) {
  const std::size_t n_rows = data.num_rows();
  const std::size_t n_classes = data.num_classes();
  const std::size_t n_features = data.num_features();
  if (n_rows == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  if (weights.size() != n_rows) throw Error(ErrorCode::kInvalidArgument, "weight count differs from row count");
  if (!counts.empty() && counts.size() != n_rows) {
    throw Error(ErrorCode::kInvalidArgument, "count vector differs from row count");
  }
  if (params.min_leaf < 1) throw Error(ErrorCode::kInvalidArgument, "min_leaf must be >= 1");
  const auto& labels = data.labels();
  auto count_of = [&](std::size_t r) -> std::size_t { return counts.empty() ? 1 : counts[r]; };

  PendingNode root{0, 0, {}};
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!(weights[r] >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative or NaN sample weight");
    if (weights[r] > 0.0) root.rows.push_back(static_cast<std::uint32_t>(r));
  }
  if (root.rows.empty()) throw Error(ErrorCode::kEmptyInput, "all sample weights are zero");

  DecisionTree tree;
  tree.num_classes = n_classes;
  tree.nodes.emplace_back();

  std::vector<int> node_of(n_rows, -1);
  std::vector<std::size_t> feature_order(n_features);
  std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
  std::vector<TrainingData::Entry> local;
  std::vector<double> split_value(n_rows, 0.0);
  std::vector<PendingNode> stack;
  stack.push_back(std::move(root));

  while (!stack.empty()) {
    PendingNode node = std::move(stack.back());
    stack.pop_back();

    std::vector<double> class_weight(n_classes, 0.0);
    std::size_t node_count = 0;
    for (auto r : node.rows) {
      node_of[r] = node.id;
      class_weight[labels[r]] += weights[r];
      node_count += count_of(r);
    }
    const double node_weight = std::accumulate(class_weight.begin(), class_weight.end(), 0.0);
    const auto classes_present = std::count_if(class_weight.begin(), class_weight.end(), [](double w) { return w > 0; });

    auto make_leaf = [&] {
      auto& leaf = tree.nodes[static_cast<std::size_t>(node.id)];
      leaf.distribution.resize(n_classes);
      for (std::size_t c = 0; c < n_classes; ++c) leaf.distribution[c] = class_weight[c] / node_weight;
    };

    if (classes_present <= 1 || (params.max_depth > 0 && node.depth >= params.max_depth) ||
        node_count < 2 * params.min_leaf || n_features == 0) {
      make_leaf();
      continue;
    }

    std::size_t n_candidates = n_features;
    if (params.mtry > 0 && params.mtry < n_features) {
      n_candidates = params.mtry;
      for (std::size_t i = 0; i < n_candidates; ++i) {
        std::swap(feature_order[i], feature_order[i + rng.below(n_features - i)]);
      }
    }

    double parent_sq = 0.0;
    for (double w : class_weight) parent_sq += w * w;
    const double parent_score = parent_sq / node_weight;
    double best_score = parent_score + 1e-12 * node_weight;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (std::size_t ci = 0; ci < n_candidates; ++ci) {
      const std::size_t feature = feature_order[ci];
      local.clear();
      for (const auto& e : data.column(feature)) {
        if (node_of[e.row] == node.id) local.push_back(e);
      }
      if (local.empty()) continue;  // constant zero within the node

      std::vector<double> zero_weight = class_weight;
      std::size_t zero_count = node_count;
      for (const auto& e : local) {
        zero_weight[labels[e.row]] -= weights[e.row];
        zero_count -= count_of(e.row);
      }
      for (auto& w : zero_weight) w = std::max(0.0, w);
      const bool has_zero = zero_count > 0;

      Side left{std::vector<double>(n_classes, 0.0)};
      Side right{class_weight, parent_sq, node_weight, node_count};

      // Position where the implicit zero block sits among the sorted nonzeros.
      const std::size_t zero_at = static_cast<std::size_t>(
          std::lower_bound(local.begin(), local.end(), 0.0,
                           [](const TrainingData::Entry& e, double v) { return e.value < v; }) -
          local.begin());
      const std::size_t n_items = local.size() + (has_zero ? 1 : 0);
      auto item_value = [&](std::size_t i) {
        if (!has_zero) return local[i].value;
        if (i < zero_at) return local[i].value;
        if (i == zero_at) return 0.0;
        return local[i - 1].value;
      };

      for (std::size_t i = 0; i < n_items; ++i) {
        if (has_zero && i == zero_at) {
          for (std::size_t c = 0; c < n_classes; ++c) {
            if (zero_weight[c] > 0.0) {
              left.add(c, zero_weight[c], 0);
              right.remove(c, zero_weight[c], 0);
            }
          }
          left.count += zero_count;
          right.count -= zero_count;
        } else {
          const auto& e = local[has_zero && i > zero_at ? i - 1 : i];
          left.add(labels[e.row], weights[e.row], count_of(e.row));
          right.remove(labels[e.row], weights[e.row], count_of(e.row));
        }
        if (i + 1 == n_items) break;
        const double here = item_value(i);
        const double next = item_value(i + 1);
        if (here == next) continue;
        if (left.count < params.min_leaf || right.count < params.min_leaf) continue;
        if (left.total <= 0.0 || right.total <= 0.0) continue;
        const double score = left.sq / left.total + right.sq / right.total;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(feature);
          best_threshold = here + (next - here) / 2.0;
        }
      }
    }

    if (best_feature < 0) {
      make_leaf();
      continue;
    }

    const int left_id = static_cast<int>(tree.nodes.size());
    const int right_id = left_id + 1;
    tree.nodes.resize(tree.nodes.size() + 2);
    auto& split = tree.nodes[static_cast<std::size_t>(node.id)];
    split.feature = best_feature;
    split.threshold = best_threshold;
    split.left = left_id;
    split.right = right_id;

    for (const auto& e : data.column(static_cast<std::size_t>(best_feature))) {
      if (node_of[e.row] == node.id) split_value[e.row] = e.value;
    }
    PendingNode left_node{left_id, node.depth + 1, {}};
    PendingNode right_node{right_id, node.depth + 1, {}};
    for (auto r : node.rows) {
      (split_value[r] <= best_threshold ? left_node.rows : right_node.rows).push_back(r);
      split_value[r] = 0.0;
    }
    stack.push_back(std::move(right_node));
    stack.push_back(std::move(left_node));
  }
  return tree;
}

RandomForestModel rf_train(const TrainingData& data, const RandomForestConfig& config) {
  if (data.num_classes() < 2) throw Error(ErrorCode::kSingleClass, "random forest needs at least two classes");
  if (data.num_rows() == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  if (config.num_trees < 1 || config.min_leaf < 1) {
    throw Error(ErrorCode::kInvalidArgument, "num_trees and min_leaf must be >= 1");
  }
  RandomForestModel model;
  model.config = config;
  model.num_classes = data.num_classes();
  model.num_features = data.num_features();
  const auto p = data.num_features();
  model.mtry = config.mtry > 0 ? std::min(config.mtry, std::max<std::size_t>(p, 1))
                               : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
  const TreeParams params{0, config.min_leaf, model.mtry};
  const std::size_t n = data.num_rows();
  model.trees.reserve(config.num_trees);
  std::vector<std::size_t> counts(n);
  std::vector<double> weights(n);
  for (std::size_t t = 0; t < config.num_trees; ++t) {
    Rng rng(derive_seed(config.seed, "tree:" + std::to_string(t)));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
    for (std::size_t i = 0; i < n; ++i) weights[i] = static_cast<double>(counts[i]);
    model.trees.push_back(train_tree(data, weights, counts, params, rng));
  }
  return model;
}

std::vector<double> rf_predict_row(const RandomForestModel& model, const RowView& x) {
  std::vector<double> votes(model.num_classes, 0.0);
  for (const auto& tree : model.trees) votes[tree.vote(x)] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(model.trees.size());
  return votes;
}

double samme_alpha(double weighted_error, std::size_t num_classes) {
  return std::log((1.0 - weighted_error) / weighted_error) + std::log(static_cast<double>(num_classes) - 1.0);
}

void samme_reweight(std::span<double> weights, std::span<const std::uint8_t> missed, double alpha) {
  const double boost = std::exp(alpha);
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (missed[i]) weights[i] *= boost;
    sum += weights[i];
  }
  for (auto& w : weights) w /= sum;
}

AdaBoostModel ada_train(const TrainingData& data, const AdaBoostConfig& config) {
  const std::size_t m = data.num_classes();
  const std::size_t n = data.num_rows();
  if (m < 2) throw Error(ErrorCode::kSingleClass, "boosting needs at least two classes");
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");
  if (config.num_rounds < 1 || config.max_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "num_rounds and max_depth must be >= 1");
  }
  AdaBoostModel model;
  model.config = config;
  model.num_classes = m;
  model.num_features = data.num_features();

  std::vector<std::vector<double>> dense(n, std::vector<double>(data.num_features(), 0.0));
  for (std::size_t j = 0; j < data.num_features(); ++j) {
    for (const auto& e : data.column(j)) dense[e.row][j] = e.value;
  }

  const TreeParams params{config.max_depth, 1, 0};
  const double chance_error = 1.0 - 1.0 / static_cast<double>(m);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<std::uint8_t> missed(n);
  for (std::size_t round = 0; round < config.num_rounds; ++round) {
    Rng rng(derive_seed(config.seed, "round:" + std::to_string(round)));
    DecisionTree tree = train_tree(data, weights, {}, params, rng);
    double error = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      missed[i] = tree.vote(RowView(dense[i])) != data.labels()[i];
      if (missed[i]) error += weights[i];
      total += weights[i];
    }
    error /= total;
    if (error >= chance_error) break;
    if (error <= 0.0) {
      model.rounds.push_back({std::move(tree), kPerfectRoundAlpha});
      break;
    }
    const double alpha = samme_alpha(error, m);
    model.rounds.push_back({std::move(tree), alpha});
    samme_reweight(weights, missed, alpha);
  }
  if (model.rounds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "first weak learner is no better than chance");
  }
  return model;
}

std::vector<double> ada_predict_row(const AdaBoostModel& model, const RowView& x) {
  std::vector<double> score(model.num_classes, 0.0);
  double total = 0.0;
  for (const auto& r : model.rounds) {
    score[r.tree.vote(x)] += r.alpha;
    total += r.alpha;
  }
  for (auto& s : score) s /= total;
  return score;
}

namespace {

template <typename RowFn>
PredictionMatrix predict_matrix(const FeatureMatrix& x, std::size_t num_features, std::size_t num_classes,
                                const std::vector<std::string>& class_order, RowFn&& fn) {
  if (x.cols() != num_features) {
    throw Error(ErrorCode::kKindMismatch, "matrix has " + std::to_string(x.cols()) + " features, model expects " +
                                              std::to_string(num_features));
  }
  if (class_order.size() != num_classes) {
    throw Error(ErrorCode::kClassOrderMismatch, "class order size differs from model");
  }
  PredictionMatrix out(x.doc_ids, class_order);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto b = x.row_offsets[r];
    const auto e = x.row_offsets[r + 1];
    const RowView view(std::span<const std::size_t>(x.columns.data() + b, e - b),
                       std::span<const double>(x.values.data() + b, e - b));
    const auto probs = fn(view);
    std::copy(probs.begin(), probs.end(), out.row(r).begin());
  }
  return out;
}

json tree_to_json(const DecisionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       dist = json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    dist.push_back(n.distribution);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"distribution", dist}};
}

DecisionTree tree_from_json(const json& j, std::size_t num_classes) {
  DecisionTree tree;
  tree.num_classes = num_classes;
  const auto& feature = j.at("feature");
  tree.nodes.resize(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    auto& n = tree.nodes[i];
    n.feature = feature[i].get<int>();
    n.threshold = j.at("threshold")[i].get<double>();
    n.left = j.at("left")[i].get<int>();
    n.right = j.at("right")[i].get<int>();
    n.distribution = j.at("distribution")[i].get<std::vector<double>>();
    const bool bad_child = !n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                                            n.right >= static_cast<int>(feature.size()) ||
                                            n.left >= static_cast<int>(feature.size()));
    if (bad_child || (n.is_leaf() && n.distribution.size() != num_classes)) {
      throw Error(ErrorCode::kMalformedRecord, "malformed tree node " + std::to_string(i));
    }
  }
  return tree;
}

constexpr int kModelVersion = 1;

void check_header(const json& j, const char* format) {
  if (j.at("format").get<std::string>() != format || j.at("version").get<int>() != kModelVersion) {
    throw Error(ErrorCode::kMalformedRecord, std::string("expected ") + format + " v" + std::to_string(kModelVersion));
  }
}

}  // namespace

PredictionMatrix rf_predict_proba(const RandomForestModel& model, const FeatureMatrix& x,
                                  const std::vector<std::string>& class_order) {
  return predict_matrix(x, model.num_features, model.num_classes, class_order,
                        [&](const RowView& v) { return rf_predict_row(model, v); });
}

PredictionMatrix ada_predict_proba(const AdaBoostModel& model, const FeatureMatrix& x,
                                   const std::vector<std::string>& class_order) {
  return predict_matrix(x, model.num_features, model.num_classes, class_order,
                        [&](const RowView& v) { return ada_predict_row(model, v); });
}

std::string to_json(const RandomForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  json j = {{"format", "random-forest"},
            {"version", kModelVersion},
            {"num_classes", model.num_classes},
            {"num_features", model.num_features},
            {"mtry", model.mtry},
            {"config",
             {{"num_trees", model.config.num_trees},
              {"mtry", model.config.mtry},
              {"min_leaf", model.config.min_leaf},
              {"seed", model.config.seed}}},
            {"trees", std::move(trees)}};
  return j.dump() + "\n";
}

std::string to_json(const AdaBoostModel& model) {
  json rounds = json::array();
  for (const auto& r : model.rounds) rounds.push_back({{"alpha", r.alpha}, {"tree", tree_to_json(r.tree)}});
  json j = {{"format", "adaboost-samme"},
            {"version", kModelVersion},
            {"num_classes", model.num_classes},
            {"num_features", model.num_features},
            {"config",
             {{"num_rounds", model.config.num_rounds},
              {"max_depth", model.config.max_depth},
              {"seed", model.config.seed}}},
            {"rounds", std::move(rounds)}};
  return j.dump() + "\n";
}

RandomForestModel rf_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    check_header(j, "random-forest");
    RandomForestModel m;
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.num_features = j.at("num_features").get<std::size_t>();
    m.mtry = j.at("mtry").get<std::size_t>();
    const auto& c = j.at("config");
    m.config = {c.at("num_trees").get<std::size_t>(), c.at("mtry").get<std::size_t>(),
                c.at("min_leaf").get<std::size_t>(), c.at("seed").get<std::uint64_t>()};
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, m.num_classes));
    if (m.trees.empty()) throw Error(ErrorCode::kMalformedRecord, "forest without trees");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("random forest model: ") + e.what());
  }
}

AdaBoostModel ada_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    check_header(j, "adaboost-samme");
    AdaBoostModel m;
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.num_features = j.at("num_features").get<std::size_t>();
    const auto& c = j.at("config");
    m.config = {c.at("num_rounds").get<std::size_t>(), c.at("max_depth").get<std::size_t>(),
                c.at("seed").get<std::uint64_t>()};
    for (const auto& r : j.at("rounds")) {
      m.rounds.push_back({tree_from_json(r.at("tree"), m.num_classes), r.at("alpha").get<double>()});
    }
    if (m.rounds.empty()) throw Error(ErrorCode::kMalformedRecord, "boosting model without rounds");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("adaboost model: ") + e.what());
  }
}

}  // namespace authorship
