#include "authorship/config.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "authorship/common.hpp"

namespace authorship {

namespace fs = std::filesystem;

std::string_view to_string(ClassifierKind kind) { return kind == ClassifierKind::kAdaBoost ? "ada" : "rf"; }

ClassifierKind parse_classifier_kind(std::string_view text) {
  if (text == "ada") return ClassifierKind::kAdaBoost;
  if (text == "rf") return ClassifierKind::kRandomForest;
  throw Error(ErrorCode::kConfig, "unknown classifier '" + std::string(text) + "' (expected ada or rf)");
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  for (const auto& id : {"char:2", "token:1", "phrase"}) {
    FeatureSpec spec;
    spec.kind = FeatureKind::parse(id);
    c.features.push_back(spec);
  }
  c.classifiers = {ClassifierKind::kAdaBoost, ClassifierKind::kRandomForest};
  return c;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, where + ": " + what);
}

void check_keys(const toml::table& t, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key.str() == a;
    if (!ok) fail(where, "unknown key '" + std::string(key.str()) + "'");
  }
}

const toml::table* table_at(const toml::table& t, std::string_view key, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) fail(where + "." + std::string(key), "expected a table");
  return node->as_table();
}

std::string get_string(const toml::table& t, std::string_view key, const std::string& where, std::string fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_string()) fail(where + "." + std::string(key), "expected a string");
  return node->value<std::string>().value();
}

std::uint64_t get_uint(const toml::table& t, std::string_view key, const std::string& where, std::uint64_t fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_integer()) fail(where + "." + std::string(key), "expected an integer");
  const auto v = node->value<std::int64_t>().value();
  if (v < 0) fail(where + "." + std::string(key), "must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double get_double(const toml::table& t, std::string_view key, const std::string& where, double fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_number()) fail(where + "." + std::string(key), "expected a number");
  return node->value<double>().value();
}

bool get_bool(const toml::table& t, std::string_view key, const std::string& where, bool fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_boolean()) fail(where + "." + std::string(key), "expected true or false");
  return node->value<bool>().value();
}

std::vector<std::string> get_strings(const toml::table& t, std::string_view key, const std::string& where,
                                     std::vector<std::string> fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  const auto* arr = node->as_array();
  if (!arr) fail(where + "." + std::string(key), "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    if (!item.is_string()) fail(where + "." + std::string(key), "expected an array of strings");
    out.push_back(item.value<std::string>().value());
  }
  return out;
}

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::string quote(const std::string& s) {
  std::ostringstream out;
  out << toml::value<std::string>(s);
  return out.str();
}

std::string quote_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + quote(items[i]);
  return out + "]";
}

// TOML floats need a fraction or exponent.
std::string toml_float(double v) {
  auto s = format_double(v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw Error(ErrorCode::kConfig, msg.str());
  }
  check_keys(root, "config",
             {"seed", "output_dir", "corpus", "folds", "features", "classifiers", "plm", "ensemble", "report"});

  ExperimentConfig c = default_config();
  c.seed = get_uint(root, "seed", "config", c.seed);
  c.output_dir = resolve(get_string(root, "output_dir", "config", "out"), base_dir);

  if (const auto* t = table_at(root, "corpus", "config")) {
    check_keys(*t, "corpus", {"path", "truncate"});
    c.corpus_path = resolve(get_string(*t, "path", "corpus", ""), base_dir);
    c.truncation = get_uint(*t, "truncate", "corpus", c.truncation);
  }
  if (c.corpus_path.empty()) fail("corpus.path", "is required");
  if (c.truncation < 1) fail("corpus.truncate", "must be at least 1");

  if (const auto* t = table_at(root, "folds", "config")) {
    check_keys(*t, "folds", {"num_folds", "train", "validation", "test"});
    c.num_folds = get_uint(*t, "num_folds", "folds", c.num_folds);
    c.ratios.train = get_uint(*t, "train", "folds", c.ratios.train);
    c.ratios.validation = get_uint(*t, "validation", "folds", c.ratios.validation);
    c.ratios.test = get_uint(*t, "test", "folds", c.ratios.test);
  }
  if (c.num_folds < 1) fail("folds.num_folds", "must be at least 1");
  if (c.ratios.test < 1) fail("folds.test", "must be at least 1");

  if (const auto* t = table_at(root, "features", "config")) {
    check_keys(*t, "features",
               {"kinds", "min_doc_freq", "max_features", "frequency_mode", "cross_token_boundaries", "preserved_pos"});
    FeatureSpec common;
    common.min_doc_freq = get_uint(*t, "min_doc_freq", "features", 1);
    if (common.min_doc_freq < 1) fail("features.min_doc_freq", "must be at least 1");
    if (const auto cap = get_uint(*t, "max_features", "features", 0)) common.max_features = cap;
    const auto mode = get_string(*t, "frequency_mode", "features", "relative");
    if (mode == "relative") common.frequency_mode = FrequencyMode::kRelativeFrequency;
    else if (mode == "raw") common.frequency_mode = FrequencyMode::kRawCount;
    else fail("features.frequency_mode", "expected relative or raw");
    common.cross_token_boundaries = get_bool(*t, "cross_token_boundaries", "features", true);
    c.features.clear();
    std::set<std::string> seen;
    for (const auto& id : get_strings(*t, "kinds", "features", {"char:2", "token:1", "phrase"})) {
      FeatureSpec spec = common;
      try {
        spec.kind = FeatureKind::parse(id);
      } catch (const Error& e) {
        fail("features.kinds", e.what());
      }
      if (!seen.insert(spec.kind.id()).second) fail("features.kinds", "duplicate kind " + id);
      c.features.push_back(spec);
    }
    if (t->get("preserved_pos")) {
      const auto pos = get_strings(*t, "preserved_pos", "features", {});
      c.phrase_rule.preserved_pos = std::set<std::string>(pos.begin(), pos.end());
      if (c.phrase_rule.preserved_pos.empty()) fail("features.preserved_pos", "must not be empty");
    }
  }
  if (c.features.empty()) fail("features.kinds", "must not be empty");

  if (const auto* t = table_at(root, "classifiers", "config")) {
    check_keys(*t, "classifiers", {"kinds", "rf", "ada"});
    c.classifiers.clear();
    std::set<std::string> seen;
    for (const auto& k : get_strings(*t, "kinds", "classifiers", {"ada", "rf"})) {
      try {
        c.classifiers.push_back(parse_classifier_kind(k));
      } catch (const Error& e) {
        fail("classifiers.kinds", e.what());
      }
      if (!seen.insert(k).second) fail("classifiers.kinds", "duplicate classifier " + k);
    }
    if (const auto* rf = table_at(*t, "rf", "classifiers")) {
      check_keys(*rf, "classifiers.rf", {"num_trees", "mtry", "min_leaf"});
      c.rf.num_trees = get_uint(*rf, "num_trees", "classifiers.rf", c.rf.num_trees);
      c.rf.mtry = get_uint(*rf, "mtry", "classifiers.rf", c.rf.mtry);
      c.rf.min_leaf = get_uint(*rf, "min_leaf", "classifiers.rf", c.rf.min_leaf);
    }
    if (const auto* ada = table_at(*t, "ada", "classifiers")) {
      check_keys(*ada, "classifiers.ada", {"num_rounds", "max_depth"});
      c.ada.num_rounds = get_uint(*ada, "num_rounds", "classifiers.ada", c.ada.num_rounds);
      c.ada.max_depth = get_uint(*ada, "max_depth", "classifiers.ada", c.ada.max_depth);
    }
  }
  if (c.classifiers.empty()) fail("classifiers.kinds", "must not be empty");
  if (c.rf.num_trees < 1 || c.rf.min_leaf < 1) fail("classifiers.rf", "num_trees and min_leaf must be at least 1");
  if (c.ada.num_rounds < 1 || c.ada.max_depth < 1) fail("classifiers.ada", "num_rounds and max_depth must be at least 1");

  c.plm_dir = resolve("plm", base_dir);
  if (const auto* t = table_at(root, "plm", "config")) {
    check_keys(*t, "plm", {"dir", "models"});
    c.plm_dir = resolve(get_string(*t, "dir", "plm", "plm"), base_dir);
    std::set<std::string> seen;
    if (const auto* node = t->get("models")) {
      const auto* arr = node->as_array();
      if (!arr) fail("plm.models", "expected an array");
      for (const auto& item : *arr) {
        PlmEntry e;
        if (item.is_string()) {
          e.id = item.value<std::string>().value();
        } else if (const auto* m = item.as_table()) {
          check_keys(*m, "plm.models", {"id", "stub_signal", "stub_noise"});
          e.id = get_string(*m, "id", "plm.models", "");
          e.stub_signal = get_double(*m, "stub_signal", "plm.models", e.stub_signal);
          e.stub_noise = get_double(*m, "stub_noise", "plm.models", e.stub_noise);
        } else {
          fail("plm.models", "entries must be ids or tables");
        }
        if (e.id.empty()) fail("plm.models", "empty model id");
        if (e.id.find_first_of("/\\,|{} ") != std::string::npos) fail("plm.models", "invalid characters in id " + e.id);
        if (!seen.insert(e.id).second) fail("plm.models", "duplicate id " + e.id);
        c.plm_models.push_back(e);
      }
    }
  }

  if (const auto* t = table_at(root, "ensemble", "config")) {
    check_keys(*t, "ensemble", {"modes", "integrated_mode"});
    c.unweighted = c.weighted = false;
    for (const auto& m : get_strings(*t, "modes", "ensemble", {"unweighted", "weighted"})) {
      if (m == "unweighted") c.unweighted = true;
      else if (m == "weighted") c.weighted = true;
      else fail("ensemble.modes", "expected unweighted or weighted, got " + m);
    }
    const auto im = get_string(*t, "integrated_mode", "ensemble", "grouped");
    if (im == "grouped") c.integrated_mode = VoteMode::kGrouped;
    else if (im == "pooled") c.integrated_mode = VoteMode::kPooled;
    else fail("ensemble.integrated_mode", "expected grouped or pooled");
  }
  if (c.weighted && c.ratios.validation == 0) {
    fail("ensemble.modes", "weighted ensembles need validation documents (folds.validation > 0)");
  }

  if (const auto* t = table_at(root, "report", "config")) {
    check_keys(*t, "report", {"top_k", "aggregation"});
    c.top_k = get_uint(*t, "top_k", "report", c.top_k);
    const auto agg = get_string(*t, "aggregation", "report", "fold_mean");
    if (agg == "fold_mean") c.aggregation = Aggregation::kFoldMean;
    else if (agg == "pooled") c.aggregation = Aggregation::kPooled;
    else fail("report.aggregation", "expected fold_mean or pooled");
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), fs::absolute(path).parent_path());
}

void apply_environment(ExperimentConfig& config) {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) config.output_dir = fs::path(root);
}

std::string config_to_toml(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "seed = " << c.seed << "\n";
  out << "output_dir = " << quote(c.output_dir.string()) << "\n\n";
  out << "[corpus]\npath = " << quote(c.corpus_path.string()) << "\ntruncate = " << c.truncation << "\n\n";
  out << "[folds]\nnum_folds = " << c.num_folds << "\ntrain = " << c.ratios.train
      << "\nvalidation = " << c.ratios.validation << "\ntest = " << c.ratios.test << "\n\n";
  const FeatureSpec& f = c.features.front();
  std::vector<std::string> kinds;
  for (const auto& s : c.features) kinds.push_back(s.kind.id());
  out << "[features]\nkinds = " << quote_list(kinds) << "\nmin_doc_freq = " << f.min_doc_freq
      << "\nmax_features = " << f.max_features.value_or(0) << "\nfrequency_mode = "
      << quote(f.frequency_mode == FrequencyMode::kRelativeFrequency ? "relative" : "raw")
      << "\ncross_token_boundaries = " << (f.cross_token_boundaries ? "true" : "false") << "\npreserved_pos = "
      << quote_list({c.phrase_rule.preserved_pos.begin(), c.phrase_rule.preserved_pos.end()}) << "\n\n";
  std::vector<std::string> clf;
  for (auto k : c.classifiers) clf.emplace_back(to_string(k));
  out << "[classifiers]\nkinds = " << quote_list(clf) << "\n\n";
  out << "[classifiers.rf]\nnum_trees = " << c.rf.num_trees << "\nmtry = " << c.rf.mtry
      << "\nmin_leaf = " << c.rf.min_leaf << "\n\n";
  out << "[classifiers.ada]\nnum_rounds = " << c.ada.num_rounds << "\nmax_depth = " << c.ada.max_depth << "\n\n";
  out << "[plm]\ndir = " << quote(c.plm_dir.string()) << "\nmodels = [";
  for (std::size_t i = 0; i < c.plm_models.size(); ++i) {
    const auto& m = c.plm_models[i];
    out << (i ? ", " : "") << "{ id = " << quote(m.id) << ", stub_signal = " << toml_float(m.stub_signal)
        << ", stub_noise = " << toml_float(m.stub_noise) << " }";
  }
  out << "]\n\n";
  std::vector<std::string> modes;
  if (c.unweighted) modes.emplace_back("unweighted");
  if (c.weighted) modes.emplace_back("weighted");
  out << "[ensemble]\nmodes = " << quote_list(modes) << "\nintegrated_mode = "
      << quote(c.integrated_mode == VoteMode::kGrouped ? "grouped" : "pooled") << "\n\n";
  out << "[report]\ntop_k = " << c.top_k << "\naggregation = "
      << quote(c.aggregation == Aggregation::kFoldMean ? "fold_mean" : "pooled") << "\n";
  return out.str();
}

}  // namespace authorship
