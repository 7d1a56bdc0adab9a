#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace authorship {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> class_order);

  const std::vector<std::string>& class_order() const { return class_order_; }
  std::size_t size() const { return class_order_.size(); }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * size() + predicted]; }
  std::size_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * size() + predicted]; }
  std::size_t total() const;

  // One-vs-rest reduction for class i.
  std::size_t true_positives(std::size_t i) const { return at(i, i); }
  std::size_t false_negatives(std::size_t i) const;
  std::size_t false_positives(std::size_t i) const;
  std::size_t true_negatives(std::size_t i) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> class_order_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion(const std::vector<std::string>& truth, const std::vector<std::string>& predicted,
                          const std::vector<std::string>& class_order);
ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& class_order);

struct ClassMetrics {
  std::vector<double> recall;
  std::vector<double> precision;
  std::vector<double> f1;
};

struct MetricsResult {
  ClassMetrics per_class;
  double macro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_f1 = 0.0;
};

// Per-class recall, precision and F1 with 0/0 taken as 0; macro values are
// unweighted means over all classes.
MetricsResult metrics(const ConfusionMatrix& cm);

struct ComparisonResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double cohens_d = 0.0;
};

// Welch's unequal-variance two-sample t-test (two-sided) with Cohen's d on
// the pooled standard deviation.
ComparisonResult welch_t_test(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

enum class Aggregation {
  kFoldMean,  // macro F1 per fold, averaged
  kPooled,    // macro F1 of the confusion summed over folds
};

struct FoldScore {
  std::size_t fold = 0;
  ConfusionMatrix confusion;
  MetricsResult metrics;
};

struct EvaluationReport {
  std::string id;
  std::string category;
  std::vector<std::string> members;
  std::vector<FoldScore> folds;
  double mean_macro_f1 = 0.0;
  double sd_macro_f1 = 0.0;
  double mean_macro_recall = 0.0;
  double mean_macro_precision = 0.0;
  double pooled_macro_f1 = 0.0;

  double score(Aggregation aggregation) const {
    return aggregation == Aggregation::kFoldMean ? mean_macro_f1 : pooled_macro_f1;
  }
};

EvaluationReport make_report(std::string id, std::string category, std::vector<std::string> members,
                             std::vector<FoldScore> folds);

struct RankedEntry {
  std::size_t rank = 0;
  std::string id;
  std::vector<std::string> members;
  double f1 = 0.0;
};

// Descending score; equal scores ordered by id.
std::vector<RankedEntry> rank_report(std::span<const EvaluationReport> reports, std::size_t k,
                                     Aggregation aggregation = Aggregation::kFoldMean);

inline constexpr std::size_t kBoxplotTopN = 50;

struct BoxplotSummary {
  std::string group;
  std::size_t n_total = 0;
  std::size_t n_used = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

// Linear-interpolation quantile over ascending `sorted` values.
double quantile(std::span<const double> sorted, double p);
// The `n` largest values, descending; all values when there are fewer.
std::vector<double> top_values(std::vector<double> values, std::size_t n = kBoxplotTopN);

// Five-number summary plus mean and sd per group, computed on the top
// `top_n` entries when a group is larger.
std::vector<BoxplotSummary> boxplot_data(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                                         std::size_t top_n = kBoxplotTopN);

std::string report_to_json(const EvaluationReport& report);
// Without `detailed`, folds carry only their macro scores.
std::string reports_to_json(std::span<const EvaluationReport> reports, bool detailed = true);
std::vector<EvaluationReport> reports_from_json(const std::string& text);
std::string ranking_to_csv(std::span<const RankedEntry> ranking);
std::string boxplot_to_csv(std::span<const BoxplotSummary> rows);

}  // namespace authorship
