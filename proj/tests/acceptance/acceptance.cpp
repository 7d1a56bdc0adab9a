// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "authorship/common.hpp"
#include "authorship/config.hpp"
#include "authorship/ensemble.hpp"
#include "authorship/evaluation.hpp"
#include "authorship/pipeline.hpp"
#include "authorship/synthetic.hpp"

using namespace authorship;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and thresholds.
constexpr double kMetricsTol = 1e-12;
constexpr double kStochasticTol = 1e-9;
constexpr double kWelchTol = 1e-9;
constexpr double kRfTokenMin = 0.9;
constexpr double kShuffledMax = 0.25;
constexpr double kBandLow = 0.6, kBandHigh = 0.85;
constexpr double kGainDivergence = 0.15;
constexpr double kGainSignal = 2.0;
constexpr double kGainSignalSpread[] = {1.0, 0.85, 0.7, 1.15, 0.95};
constexpr int kGainRuns = 10, kGainVsSingle = 9, kGainVsGroup = 7;
constexpr double kEnumerationSeconds = 60, kGainSeconds = 600;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("authorship_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<PlmEntry> stub_models(double signal) {
  std::vector<PlmEntry> out;
  const char* ids[] = {"A", "B", "C", "D", "E"};
  for (std::size_t i = 0; i < 5; ++i) out.push_back({ids[i], signal * kGainSignalSpread[i], 1.0});
  return out;
}

// Writes the corpus and returns a default config rooted in `dir`.
ExperimentConfig experiment(const fs::path& dir, const Corpus& corpus, std::uint64_t seed,
                            std::vector<PlmEntry> plms) {
  write_file(dir / "corpus.jsonl", to_jsonl(corpus));
  auto c = default_config();
  c.corpus_path = dir / "corpus.jsonl";
  c.output_dir = dir / "out";
  c.plm_dir = dir / "plm";
  c.plm_models = std::move(plms);
  c.seed = seed;
  return c;
}

std::map<std::string, std::vector<EvaluationReport>> run_experiment(const ExperimentConfig& c) {
  if (!c.plm_models.empty()) write_stub_plm(c);
  run_pipeline(c);
  std::map<std::string, std::vector<EvaluationReport>> out;
  for (const auto& cat : report_categories()) {
    const auto p = c.output_dir / "reports" / (std::string(cat.name) + ".json");
    if (fs::exists(p)) out[cat.name] = reports_from_json(read_file(p));
  }
  return out;
}

double best(const std::map<std::string, std::vector<EvaluationReport>>& r, std::initializer_list<const char*> cats) {
  double b = 0.0;
  for (const char* c : cats) {
    auto it = r.find(c);
    if (it == r.end()) continue;
    for (const auto& e : it->second) b = std::max(b, e.mean_macro_f1);
  }
  return b;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

void enumeration_and_determinism() {
  const auto dir = scratch("enumeration");
  const auto c = experiment(dir, gen_synthetic({}), 1, stub_models(kGainSignal));
  const auto t0 = Clock::now();
  const auto r = run_experiment(c);
  const double elapsed = seconds_since(t0);
  auto count = [&](const char* cat) { return r.count(cat) ? r.at(cat).size() : 0; };
  const bool counts = count("plm-ensemble") == 26 && count("fc-ensemble") == 57 && count("integrated") == 1482 &&
                      count("plm-ensemble-weighted") == 26 && count("fc-ensemble-weighted") == 57 &&
                      count("integrated-weighted") == 1482;
  report("enumeration", counts && elapsed < kEnumerationSeconds,
         "plm-ensemble=" + std::to_string(count("plm-ensemble")) +
             " fc-ensemble=" + std::to_string(count("fc-ensemble")) +
             " integrated=" + std::to_string(count("integrated")) + " (expected 26/57/1482, weighted " +
             std::to_string(count("plm-ensemble-weighted")) + "/" + std::to_string(count("fc-ensemble-weighted")) +
             "/" + std::to_string(count("integrated-weighted")) + "), full pipeline " + fmt("%.1f", elapsed) +
             " s < " + fmt("%.0f", kEnumerationSeconds) + " s");

  auto c2 = c;
  c2.output_dir = dir / "out2";
  run_pipeline(c2);
  const auto a = tree_contents(c.output_dir), b = tree_contents(c2.output_dir);
  std::size_t differing = 0;
  for (const auto& [path, bytes] : a) differing += !b.count(path) || b.at(path) != bytes;
  differing += b.size() > a.size() ? b.size() - a.size() : 0;
  report("determinism", a == b && !a.empty(),
         std::to_string(a.size()) + " artifacts compared between two fresh runs, " + std::to_string(differing) +
             " differ");
  fs::remove_all(dir);
}

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
    r.per_class.recall.push_back(rec);
    r.per_class.precision.push_back(prec);
    r.per_class.f1.push_back(prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0);
  }
  auto avg = [&](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(m);
  };
  r.macro_recall = avg(r.per_class.recall);
  r.macro_precision = avg(r.per_class.precision);
  r.macro_f1 = avg(r.per_class.f1);
  return r;
}

void metrics_oracle() {
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng.below(11);
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < m; ++i) classes.push_back("c" + std::to_string(i));
    std::vector<std::size_t> truth, pred;
    for (std::size_t t = 0; t < m; ++t) {
      for (std::size_t p = 0; p < m; ++p) {
        const std::size_t n = rng.below(51);
        for (std::size_t k = 0; k < n; ++k) {
          truth.push_back(t);
          pred.push_back(p);
        }
      }
    }
    const auto got = metrics(confusion(truth, pred, classes));
    const auto want = brute_metrics(truth, pred, m);
    auto diff = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    for (std::size_t c = 0; c < m; ++c) {
      diff(got.per_class.recall[c], want.per_class.recall[c]);
      diff(got.per_class.precision[c], want.per_class.precision[c]);
      diff(got.per_class.f1[c], want.per_class.f1[c]);
    }
    diff(got.macro_recall, want.macro_recall);
    diff(got.macro_precision, want.macro_precision);
    diff(got.macro_f1, want.macro_f1);
  }
  report("metrics-oracle", worst <= kMetricsTol,
         "1000 confusion matrices (M <= 12, counts <= 50), max |diff| " + fmt("%.3g", worst) + " <= " +
             fmt("%.0e", kMetricsTol));
}

ModelOutput random_output(Rng& rng, const std::string& id, ModelGroup group, const std::vector<std::string>& docs,
                          const std::vector<std::string>& classes) {
  ModelOutput o{id, group, PredictionMatrix(docs, classes)};
  std::vector<double> logits(classes.size());
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (auto& v : logits) v = 3.0 * rng.normal();
    const auto p = softmax(logits);
    std::copy(p.begin(), p.end(), o.matrix.row(r).begin());
  }
  return o;
}

void voting_invariances() {
  Rng rng(2002);
  std::size_t violations = 0, checks = 0;
  auto expect = [&](bool ok) {
    ++checks;
    violations += !ok;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.below(11), n = 1 + rng.below(20), k = 2 + rng.below(5);
    const VoteMode mode = trial % 2 ? VoteMode::kGrouped : VoteMode::kPooled;
    std::vector<std::string> classes, docs;
    for (std::size_t i = 0; i < m; ++i) classes.push_back("c" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) docs.push_back("d" + std::to_string(i));

    std::vector<ModelOutput> outs;
    std::vector<std::string> ids;
    std::vector<double> weights;
    for (std::size_t i = 0; i < k; ++i) {
      const auto group = i % 2 ? ModelGroup::kPlm : ModelGroup::kFeatureClassifier;
      outs.push_back(random_output(rng, "m" + std::to_string(i), group, docs, classes));
      ids.push_back(outs.back().model_id);
      weights.push_back(0.05 + rng.uniform());
    }
    const auto base = soft_vote(outs, {ids, weights, mode});

    for (std::size_t r = 0; r < n; ++r) {
      double s = 0;
      bool in_range = true;
      for (double v : base.fused.row(r)) {
        s += v;
        in_range = in_range && v >= 0.0 && v <= 1.0 + kStochasticTol;
      }
      expect(in_range && std::abs(s - 1.0) <= kStochasticTol);
    }

    const double scale = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
    auto scaled = weights;
    for (auto& w : scaled) w *= scale;
    expect(soft_vote(outs, {ids, scaled, mode}).predicted == base.predicted);

    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<ModelOutput> p_outs;
    std::vector<std::string> p_ids;
    std::vector<double> p_weights;
    for (auto i : perm) {
      p_outs.push_back(outs[i]);
      p_ids.push_back(ids[i]);
      p_weights.push_back(weights[i]);
    }
    std::reverse(p_outs.begin(), p_outs.end());
    const auto permuted = soft_vote(p_outs, {p_ids, p_weights, mode});
    expect(permuted.predicted == base.predicted && permuted.fused.values == base.fused.values);

    std::vector<ModelOutput> copies;
    std::vector<std::string> copy_ids;
    for (std::size_t i = 0; i < k; ++i) {
      copies.push_back(outs[0]);
      copies.back().model_id = "copy" + std::to_string(i);
      copies.back().group = i % 2 ? ModelGroup::kPlm : ModelGroup::kFeatureClassifier;
      copy_ids.push_back(copies.back().model_id);
    }
    const auto same = soft_vote(copies, {copy_ids, weights, mode});
    bool identical = true;
    for (std::size_t i = 0; i < same.fused.values.size(); ++i) {
      identical = identical && std::abs(same.fused.values[i] - outs[0].matrix.values[i]) <= kStochasticTol;
    }
    for (std::size_t r = 0; r < n; ++r) identical = identical && same.predicted[r] == outs[0].matrix.argmax(r);
    expect(identical);
  }
  report("voting-invariances", violations == 0,
         "200 random output sets, " + std::to_string(checks) + " checks (idempotence, weight scale, permutation, " +
             "row sums within " + fmt("%.0e", kStochasticTol) + "), " + std::to_string(violations) + " violations");
}

std::vector<double> parse_sample(const std::string& field) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    const auto end = std::min(field.find(';', start), field.size());
    out.push_back(parse_double(std::string_view(field).substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

void welch_oracle() {
  std::ifstream in(std::string(AUTHORSHIP_TEST_DATA) + "/welch_reference.csv");
  std::string line;
  std::getline(in, line);
  std::size_t n = 0;
  double dt = 0, dp = 0, ddf = 0, dd = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != 7) break;
    const auto x = parse_sample(f[1]), y = parse_sample(f[2]);
    const auto r = welch_t_test(x, y);
    dt = std::max(dt, std::abs(r.t - parse_double(f[3])));
    ddf = std::max(ddf, std::abs(r.df - parse_double(f[4])));
    dp = std::max(dp, std::abs(r.p - parse_double(f[5])));
    dd = std::max(dd, std::abs(r.cohens_d - parse_double(f[6])));
    ++n;
  }
  report("welch-oracle", n == 100 && dt < kWelchTol && dp < kWelchTol,
         std::to_string(n) + " reference pairs, max |dt| " + fmt("%.3g", dt) + ", max |dp| " + fmt("%.3g", dp) +
             " (< " + fmt("%.0e", kWelchTol) + "); max |ddf| " + fmt("%.3g", ddf) + ", max |dd| " +
             fmt("%.3g", dd));
}

void classifier_sanity() {
  double worst_token = 1.0;
  std::string token_scores;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dir = scratch("rf_token_" + std::to_string(seed));
    SyntheticCorpusSpec spec;
    spec.seed = seed;
    auto c = experiment(dir, gen_synthetic(spec), seed, {});
    FeatureSpec token;
    token.kind = FeatureKind::token_ngram(1);
    c.features = {token};
    c.classifiers = {ClassifierKind::kRandomForest};
    const auto r = run_experiment(c);
    const double f1 = r.at("fc-single").at(0).mean_macro_f1;
    worst_token = std::min(worst_token, f1);
    token_scores += (seed > 1 ? " " : "") + fmt("%.3f", f1);
    fs::remove_all(dir);
  }

  double worst_shuffled = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dir = scratch("shuffled_" + std::to_string(seed));
    SyntheticCorpusSpec spec;
    spec.seed = seed;
    auto docs = gen_synthetic(spec).documents();
    std::vector<std::string> labels;
    for (const auto& d : docs) labels.push_back(d.author);
    Rng rng(derive_seed(seed, "shuffle"));
    rng.shuffle(labels);
    for (std::size_t i = 0; i < docs.size(); ++i) docs[i].author = labels[i];
    const auto r = run_experiment(experiment(dir, Corpus(std::move(docs)), seed, {}));
    worst_shuffled = std::max(worst_shuffled, best(r, {"fc-single"}));
    fs::remove_all(dir);
  }
  report("classifier-sanity", worst_token >= kRfTokenMin && worst_shuffled <= kShuffledMax,
         "rf_token1 macro F1 over 5 seeds [" + token_scores + "], min " + fmt("%.3f", worst_token) +
             " >= " + fmt("%.2f", kRfTokenMin) + "; shuffled labels, worst of 6 models x 5 seeds " +
             fmt("%.3f", worst_shuffled) + " <= " + fmt("%.2f", kShuffledMax));
}

void ensemble_gain() {
  const auto t0 = Clock::now();
  int vs_single = 0, vs_group = 0, in_band = 0;
  for (int seed = 1; seed <= kGainRuns; ++seed) {
    const auto dir = scratch("gain_" + std::to_string(seed));
    SyntheticCorpusSpec spec;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.divergence = kGainDivergence;
    const auto r = run_experiment(experiment(dir, gen_synthetic(spec), spec.seed, stub_models(kGainSignal)));
    const double single = best(r, {"plm-single", "fc-single"});
    const double group = best(r, {"plm-ensemble", "plm-ensemble-weighted", "fc-ensemble", "fc-ensemble-weighted"});
    const double integrated = best(r, {"integrated", "integrated-weighted"});
    vs_single += integrated >= single;
    vs_group += integrated >= group;
    in_band += single >= kBandLow && single <= kBandHigh;
    std::printf("  seed %2d: best single %.3f, best group ensemble %.3f, best integrated %.3f\n", seed, single, group,
                integrated);
    fs::remove_all(dir);
  }
  const double elapsed = seconds_since(t0);
  report("ensemble-gain",
         vs_single >= kGainVsSingle && vs_group >= kGainVsGroup && in_band == kGainRuns && elapsed < kGainSeconds,
         "integrated >= best single in " + std::to_string(vs_single) + "/" + std::to_string(kGainRuns) +
             " (need " + std::to_string(kGainVsSingle) + "), >= best group ensemble in " + std::to_string(vs_group) +
             "/" + std::to_string(kGainRuns) + " (need " + std::to_string(kGainVsGroup) + "), best single in [" +
             fmt("%.2f", kBandLow) + ", " + fmt("%.2f", kBandHigh) + "] in " + std::to_string(in_band) + "/" +
             std::to_string(kGainRuns) + ", " + fmt("%.0f", elapsed) + " s < " + fmt("%.0f", kGainSeconds) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria{
      {"enumeration", enumeration_and_determinism},
      {"metrics-oracle", metrics_oracle},
      {"voting-invariances", voting_invariances},
      {"welch-oracle", welch_oracle},
      {"classifier-sanity", classifier_sanity},
      {"ensemble-gain", ensemble_gain},
  };
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(name, false, std::string("threw ") + e.what());
    }
  }
  return failures;
}
