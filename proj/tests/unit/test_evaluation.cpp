#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "authorship/evaluation.hpp"
#include "helpers.hpp"

using namespace authorship;
using authorship::test::error_code_of;

namespace {

std::vector<double> parse_sample(const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(field);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(std::stod(item));
  return out;
}

struct WelchCase {
  std::vector<double> x, y;
  double t, df, p, d;
};

std::vector<WelchCase> load_welch_reference() {
  std::ifstream in(std::string(AUTHORSHIP_TEST_DATA) + "/welch_reference.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  std::vector<WelchCase> cases;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    REQUIRE(f.size() == 7);
    cases.push_back({parse_sample(f[1]), parse_sample(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                     std::stod(f[6])});
  }
  return cases;
}

// One-vs-rest oracle computed straight from label pairs.
MetricsResult brute_metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                            std::size_t m) {
  MetricsResult r;
  for (std::size_t c = 0; c < m; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      tp += truth[k] == c && pred[k] == c;
      fp += truth[k] != c && pred[k] == c;
      fn += truth[k] == c && pred[k] != c;
    }
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    r.per_class.recall.push_back(rec);
    r.per_class.precision.push_back(prec);
    r.per_class.f1.push_back(f1);
    r.macro_recall += rec / double(m);
    r.macro_precision += prec / double(m);
    r.macro_f1 += f1 / double(m);
  }
  return r;
}

std::vector<std::string> class_names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

EvaluationReport simple_report(const std::string& id, double f1_a, double f1_b) {
  std::vector<FoldScore> folds;
  for (double f : {f1_a, f1_b}) {
    FoldScore s;
    s.fold = folds.size();
    s.confusion = ConfusionMatrix({"x", "y"});
    s.confusion.at(0, 0) = 1;
    s.metrics.macro_f1 = f;
    folds.push_back(s);
  }
  return make_report(id, "test", {id}, folds);
}

}  // namespace

TEST_CASE("confusion and metrics on a small example") {
  const auto cm = confusion(std::vector<std::string>{"A", "A", "B"}, std::vector<std::string>{"A", "B", "B"}, {"A", "B"});
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 0) == 0);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.true_negatives(0) == 1);
  const auto m = metrics(cm);
  CHECK(m.per_class.recall == std::vector<double>{0.5, 1.0});
  CHECK(m.per_class.precision == std::vector<double>{1.0, 0.5});
  CHECK(m.per_class.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.macro_recall == doctest::Approx(0.75));
  CHECK(m.macro_precision == doctest::Approx(0.75));
}

TEST_CASE("perfect predictions give unit scores") {
  const std::vector<std::size_t> labels{0, 1, 2, 2, 1, 0};
  const auto m = metrics(confusion(std::span<const std::size_t>(labels), std::span<const std::size_t>(labels), class_names(3)));
  CHECK(m.macro_f1 == 1.0);
  CHECK(m.macro_recall == 1.0);
  CHECK(m.macro_precision == 1.0);
}

TEST_CASE("classes never predicted or never present score zero") {
  const std::vector<std::size_t> truth{0, 0, 1};
  const std::vector<std::size_t> pred{0, 0, 0};
  const auto m = metrics(confusion(std::span<const std::size_t>(truth), std::span<const std::size_t>(pred), class_names(3)));
  CHECK(m.per_class.precision[1] == 0.0);
  CHECK(m.per_class.f1[1] == 0.0);
  CHECK(m.per_class.recall[2] == 0.0);
  CHECK(m.per_class.f1[2] == 0.0);
  for (double v : m.per_class.f1) CHECK(std::isfinite(v));
}

TEST_CASE("metrics match a one-vs-rest oracle on random labelings") {
  Rng rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + rng.below(9);
    const std::size_t n = 1 + rng.below(80);
    std::vector<std::size_t> truth(n), pred(n);
    for (std::size_t k = 0; k < n; ++k) {
      truth[k] = rng.below(m);
      pred[k] = rng.below(3) == 0 ? truth[k] : rng.below(m);
    }
    const auto cm = confusion(std::span<const std::size_t>(truth), std::span<const std::size_t>(pred), class_names(m));
    CHECK(cm.total() == n);
    for (std::size_t c = 0; c < m; ++c) {
      CHECK(cm.true_positives(c) + cm.false_negatives(c) + cm.false_positives(c) + cm.true_negatives(c) == n);
    }
    const auto got = metrics(cm);
    const auto want = brute_metrics(truth, pred, m);
    for (std::size_t c = 0; c < m; ++c) {
      CHECK(std::abs(got.per_class.f1[c] - want.per_class.f1[c]) <= 1e-12);
      CHECK(std::abs(got.per_class.recall[c] - want.per_class.recall[c]) <= 1e-12);
      CHECK(std::abs(got.per_class.precision[c] - want.per_class.precision[c]) <= 1e-12);
    }
    CHECK(std::abs(got.macro_f1 - want.macro_f1) <= 1e-12);
    CHECK(got.macro_f1 >= 0.0);
    CHECK(got.macro_f1 <= 1.0);

    // Relabeling classes consistently leaves macro scores unchanged.
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<std::size_t> t2(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) {
      t2[k] = perm[truth[k]];
      p2[k] = perm[pred[k]];
    }
    const auto permuted = metrics(confusion(std::span<const std::size_t>(t2), std::span<const std::size_t>(p2), class_names(m)));
    CHECK(std::abs(permuted.macro_f1 - got.macro_f1) <= 1e-12);
  }
}

TEST_CASE("confusion errors") {
  CHECK(error_code_of([] { confusion(std::vector<std::string>{"A"}, std::vector<std::string>{"Z"}, {"A", "B"}); }) ==
        ErrorCode::kUnknownLabel);
  CHECK(error_code_of([] { confusion(std::vector<std::string>{}, std::vector<std::string>{}, {"A"}); }) ==
        ErrorCode::kEmptyInput);
  ConfusionMatrix a({"A", "B"});
  const ConfusionMatrix b({"B", "A"});
  CHECK(error_code_of([&] { a += b; }) == ErrorCode::kClassOrderMismatch);
}

TEST_CASE("Welch test on identical samples") {
  const std::vector<double> x{0.1, 0.4, 0.35, 0.8};
  const auto r = welch_t_test(x, x);
  CHECK(r.t == 0.0);
  CHECK(r.p == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.cohens_d == 0.0);
}

TEST_CASE("Welch test frozen case") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 3, 4, 5, 6};
  const auto r = welch_t_test(x, y);
  CHECK(std::abs(r.t - (-1.0)) <= 1e-12);
  CHECK(std::abs(r.df - 8.0) <= 1e-12);
  CHECK(std::abs(r.p - 0.34659350708733416) <= 1e-9);
  CHECK(std::abs(r.cohens_d - (-1.0 / std::sqrt(2.5))) <= 1e-12);
}

TEST_CASE("Welch test matches the reference table") {
  const auto cases = load_welch_reference();
  REQUIRE(cases.size() >= 100);
  for (const auto& c : cases) {
    const auto r = welch_t_test(c.x, c.y);
    CHECK(std::abs(r.t - c.t) <= 1e-9 * std::max(1.0, std::abs(c.t)));
    CHECK(std::abs(r.df - c.df) <= 1e-9 * std::max(1.0, c.df));
    CHECK(std::abs(r.p - c.p) <= 1e-9);
    CHECK(std::abs(r.cohens_d - c.d) <= 1e-9 * std::max(1.0, std::abs(c.d)));
  }
}

TEST_CASE("Welch test properties") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(2 + rng.below(10)), y(2 + rng.below(10));
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = 0.5 + 2.0 * rng.normal();
    const auto xy = welch_t_test(x, y);
    const auto yx = welch_t_test(y, x);
    CHECK(xy.t == doctest::Approx(-yx.t).epsilon(1e-12));
    CHECK(xy.p == doctest::Approx(yx.p).epsilon(1e-12));
    CHECK(xy.cohens_d == doctest::Approx(-yx.cohens_d).epsilon(1e-12));
    CHECK(xy.p >= 0.0);
    CHECK(xy.p <= 1.0);
    // Shifting y upward moves t down and, past the mean gap, p up then down.
    auto shifted = y;
    for (auto& v : shifted) v += 1.0;
    CHECK(welch_t_test(x, shifted).t < xy.t);
  }
}

TEST_CASE("Welch test degenerate samples") {
  const std::vector<double> same{0.5, 0.5, 0.5};
  const auto r = welch_t_test(same, same);
  CHECK(r.t == 0.0);
  CHECK(r.p == 1.0);
  CHECK(r.cohens_d == 0.0);
  const std::vector<double> other{0.25, 0.25, 0.25};
  CHECK(error_code_of([&] { welch_t_test(same, other); }) == ErrorCode::kDegenerateSample);
  const std::vector<double> one{0.5};
  CHECK(error_code_of([&] { welch_t_test(one, same); }) == ErrorCode::kDegenerateSample);
}

TEST_CASE("reports aggregate folds") {
  ConfusionMatrix a({"x", "y"}), b({"x", "y"});
  a.at(0, 0) = 2;
  a.at(1, 0) = 1;
  b.at(1, 1) = 3;
  std::vector<FoldScore> folds{{0, a, metrics(a)}, {1, b, metrics(b)}};
  const auto r = make_report("m", "single", {"m"}, folds);
  CHECK(r.mean_macro_f1 == doctest::Approx((metrics(a).macro_f1 + metrics(b).macro_f1) / 2.0));
  ConfusionMatrix pooled = a;
  pooled += b;
  CHECK(r.pooled_macro_f1 == metrics(pooled).macro_f1);
  const std::vector<double> f1{metrics(a).macro_f1, metrics(b).macro_f1};
  CHECK(r.sd_macro_f1 == doctest::Approx(sample_sd(f1)));
  CHECK(error_code_of([] { make_report("m", "single", {}, {}); }) == ErrorCode::kEmptyInput);
}

TEST_CASE("ranking orders by score then id") {
  const std::vector<EvaluationReport> reports{simple_report("b", 0.5, 0.7), simple_report("a", 0.6, 0.6),
                                              simple_report("c", 0.9, 0.9), simple_report("d", 0.1, 0.1)};
  const auto top = rank_report(reports, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].id == "c");
  CHECK(top[1].id == "a");  // tie with b resolved by id
  CHECK(top[2].id == "b");
  CHECK(top[2].rank == 3);
  CHECK(rank_report(reports, 100).size() == 4);
  CHECK(rank_report(reports, 0).empty());
  CHECK(ranking_to_csv(top).rfind("rank,id,members,f1\n1,c,c,0.9\n", 0) == 0);
}

TEST_CASE("quantiles and box plots") {
  const std::vector<double> four{1, 2, 3, 4};
  CHECK(quantile(four, 0.5) == 2.5);
  CHECK(quantile(four, 0.25) == 1.75);
  CHECK(quantile(four, 0.0) == 1.0);
  CHECK(quantile(four, 1.0) == 4.0);

  const auto single = boxplot_data({{"g", {0.7}}});
  REQUIRE(single.size() == 1);
  CHECK(single[0].min == 0.7);
  CHECK(single[0].q1 == 0.7);
  CHECK(single[0].median == 0.7);
  CHECK(single[0].q3 == 0.7);
  CHECK(single[0].max == 0.7);
  CHECK(single[0].sd == 0.0);

  Rng rng(5);
  std::vector<double> sixty(60);
  for (auto& v : sixty) v = rng.uniform();
  auto sorted = sixty;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> top50(sorted.begin() + 10, sorted.end());
  const auto box = boxplot_data({{"g", sixty}});
  CHECK(box[0].n_total == 60);
  CHECK(box[0].n_used == 50);
  CHECK(box[0].min == top50.front());
  CHECK(box[0].max == top50.back());
  CHECK(box[0].median == doctest::Approx((top50[24] + top50[25]) / 2.0).epsilon(1e-15));
  CHECK(box[0].mean == doctest::Approx(mean(top50)).epsilon(1e-15));
  CHECK(error_code_of([] { boxplot_data({{"g", {}}}); }) == ErrorCode::kEmptyInput);
  CHECK(boxplot_to_csv(single).rfind("group,n_total,n_used,min,q1,median,q3,max,mean,sd\n", 0) == 0);
}
