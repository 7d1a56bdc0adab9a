#include "authorship/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "authorship/common.hpp"

namespace authorship {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_order)
    : class_order_(std::move(class_order)), counts_(class_order_.size() * class_order_.size(), 0) {}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::false_negatives(std::size_t i) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i) s += at(i, j);
  }
  return s;
}

std::size_t ConfusionMatrix::false_positives(std::size_t i) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i) s += at(j, i);
  }
  return s;
}

std::size_t ConfusionMatrix::true_negatives(std::size_t i) const {
  return total() - true_positives(i) - false_negatives(i) - false_positives(i);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.class_order_ != class_order_) throw Error(ErrorCode::kClassOrderMismatch, "cannot add confusion matrices");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& class_order) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::kInvalidArgument, "label sequences differ in length");
  if (truth.empty()) throw Error(ErrorCode::kEmptyInput, "no labels to score");
  ConfusionMatrix cm(class_order);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] >= cm.size() || predicted[k] >= cm.size()) {
      throw Error(ErrorCode::kUnknownLabel, "class index out of range");
    }
    ++cm.at(truth[k], predicted[k]);
  }
  return cm;
}

ConfusionMatrix confusion(const std::vector<std::string>& truth, const std::vector<std::string>& predicted,
                          const std::vector<std::string>& class_order) {
  auto index = [&](const std::string& label) {
    auto it = std::find(class_order.begin(), class_order.end(), label);
    if (it == class_order.end()) throw Error(ErrorCode::kUnknownLabel, label);
    return static_cast<std::size_t>(it - class_order.begin());
  };
  std::vector<std::size_t> t, p;
  t.reserve(truth.size());
  p.reserve(predicted.size());
  for (const auto& l : truth) t.push_back(index(l));
  for (const auto& l : predicted) p.push_back(index(l));
  return confusion(std::span<const std::size_t>(t), std::span<const std::size_t>(p), class_order);
}

namespace {
double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace

MetricsResult metrics(const ConfusionMatrix& cm) {
  MetricsResult r;
  const std::size_t m = cm.size();
  r.per_class.recall.resize(m);
  r.per_class.precision.resize(m);
  r.per_class.f1.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto tp = static_cast<double>(cm.true_positives(i));
    const double recall = ratio(tp, tp + static_cast<double>(cm.false_negatives(i)));
    const double precision = ratio(tp, tp + static_cast<double>(cm.false_positives(i)));
    r.per_class.recall[i] = recall;
    r.per_class.precision[i] = precision;
    r.per_class.f1[i] = ratio(2.0 * precision * recall, precision + recall);
  }
  if (m > 0) {
    r.macro_recall = mean(r.per_class.recall);
    r.macro_precision = mean(r.per_class.precision);
    r.macro_f1 = mean(r.per_class.f1);
  }
  return r;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ComparisonResult welch_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw Error(ErrorCode::kDegenerateSample, "each sample needs at least two values");
  }
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  const double mx = mean(x);
  const double my = mean(y);
  const double sx = sample_sd(x);
  const double sy = sample_sd(y);
  const double vx = sx * sx / nx;
  const double vy = sy * sy / ny;

  ComparisonResult r;
  if (vx + vy == 0.0) {
    if (mx != my) throw Error(ErrorCode::kDegenerateSample, "zero variance with unequal means: t is infinite");
    r.t = 0.0;
    r.df = nx + ny - 2.0;
    r.p = 1.0;
    r.cohens_d = 0.0;
    return r;
  }
  r.t = (mx - my) / std::sqrt(vx + vy);
  r.df = (vx + vy) * (vx + vy) / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  const double pooled = std::sqrt(((nx - 1.0) * sx * sx + (ny - 1.0) * sy * sy) / (nx + ny - 2.0));
  r.cohens_d = (mx - my) / pooled;
  return r;
}

EvaluationReport make_report(std::string id, std::string category, std::vector<std::string> members,
                             std::vector<FoldScore> folds) {
  if (folds.empty()) throw Error(ErrorCode::kEmptyInput, "report without folds");
  EvaluationReport r;
  r.id = std::move(id);
  r.category = std::move(category);
  r.members = std::move(members);
  std::vector<double> f1, recall, precision;
  ConfusionMatrix pooled(folds.front().confusion.class_order());
  for (const auto& f : folds) {
    f1.push_back(f.metrics.macro_f1);
    recall.push_back(f.metrics.macro_recall);
    precision.push_back(f.metrics.macro_precision);
    pooled += f.confusion;
  }
  r.mean_macro_f1 = mean(f1);
  r.sd_macro_f1 = sample_sd(f1);
  r.mean_macro_recall = mean(recall);
  r.mean_macro_precision = mean(precision);
  r.pooled_macro_f1 = metrics(pooled).macro_f1;
  r.folds = std::move(folds);
  return r;
}

std::vector<RankedEntry> rank_report(std::span<const EvaluationReport> reports, std::size_t k,
                                     Aggregation aggregation) {
  std::vector<const EvaluationReport*> order;
  order.reserve(reports.size());
  for (const auto& r : reports) order.push_back(&r);
  std::sort(order.begin(), order.end(), [&](const EvaluationReport* a, const EvaluationReport* b) {
    const double sa = a->score(aggregation);
    const double sb = b->score(aggregation);
    if (sa != sb) return sa > sb;
    return a->id < b->id;
  });
  if (order.size() > k) order.resize(k);
  std::vector<RankedEntry> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.push_back({i + 1, order[i]->id, order[i]->members, order[i]->score(aggregation)});
  }
  return out;
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyInput, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> top_values(std::vector<double> values, std::size_t n) {
  std::sort(values.begin(), values.end(), std::greater<>());
  if (values.size() > n) values.resize(n);
  return values;
}

std::vector<BoxplotSummary> boxplot_data(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                                         std::size_t top_n) {
  std::vector<BoxplotSummary> out;
  for (const auto& [name, values] : groups) {
    if (values.empty()) throw Error(ErrorCode::kEmptyInput, "empty box-plot group " + name);
    auto used = top_values(values, top_n);
    std::sort(used.begin(), used.end());
    BoxplotSummary s;
    s.group = name;
    s.n_total = values.size();
    s.n_used = used.size();
    s.min = used.front();
    s.q1 = quantile(used, 0.25);
    s.median = quantile(used, 0.5);
    s.q3 = quantile(used, 0.75);
    s.max = used.back();
    s.mean = mean(used);
    s.sd = sample_sd(used);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

json report_json(const EvaluationReport& r, bool detailed) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    json entry{{"fold", f.fold},
               {"macro_f1", f.metrics.macro_f1},
               {"macro_recall", f.metrics.macro_recall},
               {"macro_precision", f.metrics.macro_precision}};
    if (detailed) {
      json cm = json::array();
      for (std::size_t i = 0; i < f.confusion.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < f.confusion.size(); ++j) row.push_back(f.confusion.at(i, j));
        cm.push_back(std::move(row));
      }
      entry["recall"] = f.metrics.per_class.recall;
      entry["precision"] = f.metrics.per_class.precision;
      entry["f1"] = f.metrics.per_class.f1;
      entry["confusion"] = std::move(cm);
    }
    folds.push_back(std::move(entry));
  }
  return {{"id", r.id},
          {"category", r.category},
          {"members", r.members},
          {"class_order", r.folds.empty() ? json::array() : json(r.folds.front().confusion.class_order())},
          {"mean_macro_f1", r.mean_macro_f1},
          {"sd_macro_f1", r.sd_macro_f1},
          {"mean_macro_recall", r.mean_macro_recall},
          {"mean_macro_precision", r.mean_macro_precision},
          {"pooled_macro_f1", r.pooled_macro_f1},
          {"folds", std::move(folds)}};
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  r.id = j.at("id").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.members = j.at("members").get<std::vector<std::string>>();
  r.mean_macro_f1 = j.at("mean_macro_f1").get<double>();
  r.sd_macro_f1 = j.at("sd_macro_f1").get<double>();
  r.mean_macro_recall = j.at("mean_macro_recall").get<double>();
  r.mean_macro_precision = j.at("mean_macro_precision").get<double>();
  r.pooled_macro_f1 = j.at("pooled_macro_f1").get<double>();
  const auto class_order = j.at("class_order").get<std::vector<std::string>>();
  for (const auto& f : j.at("folds")) {
    FoldScore s;
    s.fold = f.at("fold").get<std::size_t>();
    s.confusion = ConfusionMatrix(class_order);
    s.metrics.macro_f1 = f.at("macro_f1").get<double>();
    s.metrics.macro_recall = f.at("macro_recall").get<double>();
    s.metrics.macro_precision = f.at("macro_precision").get<double>();
    if (f.contains("confusion")) {
      const auto rows = f.at("confusion").get<std::vector<std::vector<std::size_t>>>();
      if (rows.size() != class_order.size()) throw Error(ErrorCode::kMalformedRecord, "confusion size in " + r.id);
      for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != class_order.size()) throw Error(ErrorCode::kMalformedRecord, "confusion size in " + r.id);
        for (std::size_t b = 0; b < rows[a].size(); ++b) s.confusion.at(a, b) = rows[a][b];
      }
      s.metrics.per_class.recall = f.at("recall").get<std::vector<double>>();
      s.metrics.per_class.precision = f.at("precision").get<std::vector<double>>();
      s.metrics.per_class.f1 = f.at("f1").get<std::vector<double>>();
    }
    r.folds.push_back(std::move(s));
  }
  return r;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) { return report_json(report, true).dump(1) + "\n"; }

std::string reports_to_json(std::span<const EvaluationReport> reports, bool detailed) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r, detailed));
  return arr.dump(1) + "\n";
}

std::vector<EvaluationReport> reports_from_json(const std::string& text) {
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::kMalformedRecord, "expected an array of reports");
    std::vector<EvaluationReport> out;
    for (const auto& j : arr) out.push_back(report_from_json(j));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("reports: ") + e.what());
  }
}

std::string ranking_to_csv(std::span<const RankedEntry> ranking) {
  std::string out = "rank,id,members,f1\n";
  for (const auto& e : ranking) {
    std::string members;
    for (std::size_t i = 0; i < e.members.size(); ++i) {
      if (i) members.push_back(' ');
      members += e.members[i];
    }
    out += csv::join({std::to_string(e.rank), e.id, members, format_double(e.f1)}) + "\n";
  }
  return out;
}

std::string boxplot_to_csv(std::span<const BoxplotSummary> rows) {
  std::string out = "group,n_total,n_used,min,q1,median,q3,max,mean,sd\n";
  for (const auto& s : rows) {
    out += csv::join({s.group, std::to_string(s.n_total), std::to_string(s.n_used), format_double(s.min),
                      format_double(s.q1), format_double(s.median), format_double(s.q3), format_double(s.max),
                      format_double(s.mean), format_double(s.sd)}) +
           "\n";
  }
  return out;
}

}  // namespace authorship
