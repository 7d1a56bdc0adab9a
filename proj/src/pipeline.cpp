#include "authorship/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "authorship/classifiers.hpp"
#include "authorship/ensemble.hpp"
#include "authorship/features.hpp"
#include "authorship/interchange.hpp"
#include "authorship/synthetic.hpp"

namespace authorship {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStageVersion = "1";
constexpr const char* kIncomplete = "INCOMPLETE";
constexpr double kMinWeight = 1e-6;

const char* const kRoles[] = {"train", "validation", "test"};

std::string fold_dir(std::size_t f) { return "fold" + std::to_string(f); }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string set_id(const std::vector<std::string>& labels) { return "{" + join(labels, ",") + "}"; }

std::string pair_id(const std::vector<std::string>& plm, const std::vector<std::string>& fc) {
  return "{" + join(plm, ",") + "|" + join(fc, ",") + "}";
}

// Numeric labels sort by value so that "10" follows "9".
std::vector<std::string> sorted_labels(std::vector<std::string> v) {
  std::sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) {
    auto digits = [](const std::string& x) {
      return !x.empty() && std::all_of(x.begin(), x.end(), [](unsigned char ch) { return ch >= '0' && ch <= '9'; });
    };
    if (a.size() != b.size() && digits(a) && digits(b)) {
      return a.size() < b.size();
    }
    return a < b;
  });
  return v;
}

json config_echo(const ExperimentConfig& c) {
  json features = json::array();
  for (const auto& f : c.features) {
    features.push_back({{"kind", f.kind.id()},
                        {"min_doc_freq", f.min_doc_freq},
                        {"max_features", f.max_features ? json(*f.max_features) : json(nullptr)},
                        {"frequency_mode", f.frequency_mode == FrequencyMode::kRelativeFrequency ? "relative" : "raw"},
                        {"cross_token_boundaries", f.cross_token_boundaries}});
  }
  json classifiers = json::array();
  for (auto k : c.classifiers) classifiers.push_back(std::string(to_string(k)));
  json plm = json::array();
  for (const auto& m : c.plm_models) plm.push_back(m.id);
  return {{"corpus", c.corpus_path.string()},
          {"truncate", c.truncation},
          {"folds", {{"num_folds", c.num_folds},
                     {"train", c.ratios.train},
                     {"validation", c.ratios.validation},
                     {"test", c.ratios.test}}},
          {"features", features},
          {"preserved_pos", c.phrase_rule.preserved_pos},
          {"classifiers", classifiers},
          {"rf", {{"num_trees", c.rf.num_trees}, {"mtry", c.rf.mtry}, {"min_leaf", c.rf.min_leaf}}},
          {"ada", {{"num_rounds", c.ada.num_rounds}, {"max_depth", c.ada.max_depth}}},
          {"plm_models", plm},
          {"plm_dir", c.plm_dir.string()},
          {"ensemble", {{"unweighted", c.unweighted},
                        {"weighted", c.weighted},
                        {"integrated_mode", c.integrated_mode == VoteMode::kGrouped ? "grouped" : "pooled"}}},
          {"report", {{"top_k", c.top_k}, {"aggregation", c.aggregation == Aggregation::kFoldMean ? "fold_mean" : "pooled"}}},
          {"seed", c.seed}};
}

std::uint64_t model_seed(std::uint64_t master, const std::string& model_id, std::size_t fold) {
  return derive_seed(master, "model/" + model_id + "/" + fold_dir(fold));
}

std::vector<std::string> required_plm_splits(const ExperimentConfig& c) {
  std::vector<std::string> out{"test"};
  if (c.weighted) out.emplace_back("validation");
  return out;
}

fs::path plm_source(const ExperimentConfig& c, const std::string& id, std::size_t fold, const std::string& split) {
  return c.plm_dir / fold_dir(fold) / (id + "." + split + ".csv");
}

std::string file_digest(const fs::path& p) { return fs::exists(p) ? sha256_hex(read_file(p)) : "missing"; }

// Scores argmax predictions of one output against the corpus labels.
FoldScore score_fold(std::size_t fold, const PredictionMatrix& m, const Corpus& corpus) {
  std::vector<std::size_t> truth, pred;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    truth.push_back(corpus.label_index(corpus.find(m.doc_ids[r]).author));
    pred.push_back(m.argmax(r));
  }
  FoldScore s;
  s.fold = fold;
  s.confusion = confusion(std::span<const std::size_t>(truth), std::span<const std::size_t>(pred), corpus.labels());
  s.metrics = metrics(s.confusion);
  return s;
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kFolds: return "fold";
    case Stage::kExtract: return "extract";
    case Stage::kTrain: return "train";
    case Stage::kPredict: return "predict";
    case Stage::kImportPlm: return "import-plm";
    case Stage::kEnsemble: return "ensemble";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (auto s : kAllStages) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + std::string(text) + "'");
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(Verbatim{}, cause.code(), "stage '" + std::string(to_string(stage)) + "': " + cause.what()),
      stage_(stage) {}

std::string feature_slug(const FeatureKind& kind) {
  auto id = kind.id();
  id.erase(std::remove(id.begin(), id.end(), ':'), id.end());
  return id;
}

std::vector<FcModel> fc_models(const ExperimentConfig& config) {
  std::vector<FcModel> out;
  for (auto clf : config.classifiers) {
    for (const auto& spec : config.features) {
      out.push_back({std::string(to_string(clf)) + "_" + feature_slug(spec.kind), std::to_string(out.size() + 1), clf,
                     spec});
    }
  }
  return out;
}

const std::vector<ReportCategory>& report_categories() {
  static const std::vector<ReportCategory> kCategories{
      {'A', "plm-single", "PLMs"},
      {'B', "plm-ensemble", "Ensemble PLMs"},
      {'C', "plm-ensemble-weighted", "Weighted ensemble PLMs"},
      {'D', "fc-single", "Features & classifiers"},
      {'E', "fc-ensemble", "Ensemble features & classifiers"},
      {'F', "fc-ensemble-weighted", "Weighted ensemble features & classifiers"},
      {'G', "one-fc-with-plms", "Ensemble one feature & classifier and PLMs"},
      {'H', "one-plm-with-fcs", "Ensemble one PLM and features & classifiers"},
      {'I', "integrated", "Integrated ensemble"},
      {'J', "integrated-weighted", "Integrated weighted ensemble"},
  };
  return kCategories;
}

Pipeline::Pipeline(ExperimentConfig config, std::ostream* log) : config_(std::move(config)), log_(log) {
  if (config_.output_dir.empty()) throw Error(ErrorCode::kConfig, "output_dir is empty");
  std::set<std::string> labels;
  for (const auto& m : fc_models(config_)) labels.insert(m.label);
  for (const auto& p : config_.plm_models) {
    if (labels.count(p.id)) throw Error(ErrorCode::kConfig, "PLM id " + p.id + " collides with a classifier label");
  }
}

void Pipeline::say(const std::string& line) {
  if (log_) *log_ << line << std::endl;
}

fs::path Pipeline::stage_dir(Stage stage) const {
  switch (stage) {
    case Stage::kFolds: return config_.output_dir / "folds";
    case Stage::kExtract: return config_.output_dir / "features";
    case Stage::kTrain: return config_.output_dir / "models";
    case Stage::kPredict: return config_.output_dir / "predictions" / "fc";
    case Stage::kImportPlm: return config_.output_dir / "predictions" / "plm";
    case Stage::kEnsemble: return config_.output_dir / "reports";
    case Stage::kReport: return config_.output_dir / "tables";
  }
  return config_.output_dir;
}

const Corpus& Pipeline::corpus() {
  if (!corpus_) corpus_ = truncate(load_corpus(config_.corpus_path), config_.truncation);
  return *corpus_;
}

const FoldPlan& Pipeline::plan() {
  if (!plan_) plan_ = fold_plan_from_json(read_file(stage_dir(Stage::kFolds) / "folds.json"));
  return *plan_;
}

std::string Pipeline::stage_key(Stage stage) {
  if (auto it = keys_.find(stage); it != keys_.end()) return it->second;
  const auto& c = config_;
  const json echo = config_echo(c);
  json d{{"stage", std::string(to_string(stage))}, {"version", kStageVersion}};
  switch (stage) {
    case Stage::kFolds:
      if (corpus_sha_.empty()) corpus_sha_ = sha256_hex(read_file(c.corpus_path));
      d["corpus_sha256"] = corpus_sha_;
      d["truncate"] = echo["truncate"];
      d["folds"] = echo["folds"];
      d["seed"] = c.seed;
      break;
    case Stage::kExtract:
      d["upstream"] = stage_key(Stage::kFolds);
      d["features"] = echo["features"];
      d["preserved_pos"] = echo["preserved_pos"];
      break;
    case Stage::kTrain:
      d["upstream"] = stage_key(Stage::kExtract);
      d["classifiers"] = echo["classifiers"];
      d["rf"] = echo["rf"];
      d["ada"] = echo["ada"];
      break;
    case Stage::kPredict:
      d["upstream"] = stage_key(Stage::kTrain);
      break;
    case Stage::kImportPlm: {
      d["upstream"] = stage_key(Stage::kFolds);
      json files = json::array();
      for (const auto& m : c.plm_models) {
        for (std::size_t f = 0; f < c.num_folds; ++f) {
          for (const auto& split : required_plm_splits(c)) {
            const auto p = plm_source(c, m.id, f, split);
            files.push_back({m.id, f, split, file_digest(p), file_digest(manifest_path_for(p))});
          }
        }
      }
      d["plm"] = files;
      break;
    }
    case Stage::kEnsemble:
      d["upstream"] = {stage_key(Stage::kPredict), stage_key(Stage::kImportPlm)};
      d["ensemble"] = echo["ensemble"];
      break;
    case Stage::kReport:
      d["upstream"] = stage_key(Stage::kEnsemble);
      d["report"] = echo["report"];
      break;
  }
  return keys_[stage] = sha256_hex(d.dump());
}

namespace {

std::vector<Stage> upstream_of(Stage stage) {
  switch (stage) {
    case Stage::kFolds: return {};
    case Stage::kExtract: return {Stage::kFolds};
    case Stage::kTrain: return {Stage::kExtract};
    case Stage::kPredict: return {Stage::kTrain};
    case Stage::kImportPlm: return {Stage::kFolds};
    case Stage::kEnsemble: return {Stage::kPredict, Stage::kImportPlm};
    case Stage::kReport: return {Stage::kEnsemble};
  }
  return {};
}

}  // namespace

std::vector<StageResult> Pipeline::run_until(Stage stage) {
  std::vector<Stage> order;
  switch (stage) {
    case Stage::kFolds: order = {Stage::kFolds}; break;
    case Stage::kExtract: order = {Stage::kFolds, Stage::kExtract}; break;
    case Stage::kTrain: order = {Stage::kFolds, Stage::kExtract, Stage::kTrain}; break;
    case Stage::kPredict: order = {Stage::kFolds, Stage::kExtract, Stage::kTrain, Stage::kPredict}; break;
    case Stage::kImportPlm: order = {Stage::kFolds, Stage::kImportPlm}; break;
    default:
      order.assign(std::begin(kAllStages), std::end(kAllStages));
      if (stage == Stage::kEnsemble) order.pop_back();
  }
  std::vector<StageResult> results;
  std::set<Stage> ran;
  for (auto s : order) {
    bool stale = false;
    for (auto u : upstream_of(s)) stale = stale || ran.count(u);
    results.push_back(run_one(s, stale));
    if (!results.back().skipped) ran.insert(s);
  }
  write_manifest();
  return results;
}

std::vector<StageResult> Pipeline::run() { return run_until(Stage::kReport); }

StageResult Pipeline::run_one(Stage stage, bool force) {
  const fs::path dir = stage_dir(stage);
  const fs::path stamp = dir / ".stage";
  std::string key;
  try {
    key = stage_key(stage);
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
  if (!force && fs::exists(stamp) && !fs::exists(dir / kIncomplete) && read_file(stamp) == key + "\n") {
    say(std::string(to_string(stage)) + ": up to date");
    return {stage, true};
  }
  say(std::string(to_string(stage)) + ": running");
  fs::remove_all(dir);
  write_file(dir / kIncomplete, std::string(to_string(stage)) + "\n");
  try {
    execute(stage);
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, Error(ErrorCode::kIo, e.what()));
  }
  write_file(stamp, key + "\n");
  fs::remove(dir / kIncomplete);
  return {stage, false};
}

void Pipeline::execute(Stage stage) {
  switch (stage) {
    case Stage::kFolds: return do_folds();
    case Stage::kExtract: return do_extract();
    case Stage::kTrain: return do_train();
    case Stage::kPredict: return do_predict();
    case Stage::kImportPlm: return do_import_plm();
    case Stage::kEnsemble: return do_ensemble();
    case Stage::kReport: return do_report();
  }
}

void Pipeline::do_folds() {
  plan_ = make_fold_plan(corpus(), config_.num_folds, config_.ratios, derive_seed(config_.seed, "folds"));
  write_file(stage_dir(Stage::kFolds) / "folds.json", fold_plan_to_json(*plan_));
}

void Pipeline::do_extract() {
  const auto& plan = this->plan();
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    const auto train_docs = corpus().select(fold.train);
    for (const auto& spec : config_.features) {
      const fs::path dir = stage_dir(Stage::kExtract) / fold_dir(f) / feature_slug(spec.kind);
      const auto vocab = build_vocabulary(train_docs, spec, config_.phrase_rule);
      write_file(dir / "vocabulary.csv", vocabulary_to_csv(vocab));
      for (const char* role : kRoles) {
        const auto& ids = split_ids(fold, role);
        if (ids.empty()) continue;
        const auto docs = corpus().select(ids);
        write_file(dir / (std::string(role) + ".csv"),
                   matrix_to_triplet_csv(vectorize(docs, vocab, spec, config_.phrase_rule)));
      }
    }
  }
}

namespace {

FeatureMatrix load_features(const fs::path& features_root, std::size_t fold, const FeatureSpec& spec,
                            const std::string& role, const std::vector<std::string>& ids) {
  const fs::path dir = features_root / fold_dir(fold) / feature_slug(spec.kind);
  const auto vocab = vocabulary_from_csv(read_file(dir / "vocabulary.csv"));
  return matrix_from_triplet_csv(read_file(dir / (role + ".csv")), vocab, ids);
}

}  // namespace

void Pipeline::do_train() {
  const auto& plan = this->plan();
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    std::vector<std::size_t> labels;
    for (const auto& id : fold.train) labels.push_back(corpus().label_index(corpus().find(id).author));
    for (const auto& spec : config_.features) {
      const auto x = load_features(stage_dir(Stage::kExtract), f, spec, "train", fold.train);
      const TrainingData data(x, labels, corpus().labels().size());
      for (const auto& model : fc_models(config_)) {
        if (!(model.feature == spec)) continue;
        const fs::path out = stage_dir(Stage::kTrain) / fold_dir(f) / (model.id + ".json");
        const auto seed = model_seed(config_.seed, model.id, f);
        say("  " + fold_dir(f) + " " + model.id);
        if (model.classifier == ClassifierKind::kRandomForest) {
          auto cfg = config_.rf;
          cfg.seed = seed;
          write_file(out, to_json(rf_train(data, cfg)));
        } else {
          auto cfg = config_.ada;
          cfg.seed = seed;
          write_file(out, to_json(ada_train(data, cfg)));
        }
      }
    }
  }
}

void Pipeline::do_predict() {
  const auto& plan = this->plan();
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    for (const auto& model : fc_models(config_)) {
      const auto text = read_file(stage_dir(Stage::kTrain) / fold_dir(f) / (model.id + ".json"));
      std::optional<RandomForestModel> rf;
      std::optional<AdaBoostModel> ada;
      if (model.classifier == ClassifierKind::kRandomForest) rf = rf_from_json(text);
      else ada = ada_from_json(text);
      for (const std::string split : {"validation", "test"}) {
        const auto& ids = split_ids(fold, split);
        if (ids.empty()) continue;
        const auto x = load_features(stage_dir(Stage::kExtract), f, model.feature, split, ids);
        const auto p = rf ? rf_predict_proba(*rf, x, corpus().labels()) : ada_predict_proba(*ada, x, corpus().labels());
        write_predictions(stage_dir(Stage::kPredict) / fold_dir(f) / (model.id + "." + split + ".csv"), p,
                          {model.id, ModelGroup::kFeatureClassifier, f, split, corpus().labels()});
      }
    }
  }
}

void Pipeline::do_import_plm() {
  const auto& plan = this->plan();
  for (const auto& m : config_.plm_models) {
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      for (const auto& split : required_plm_splits(config_)) {
        const auto src = plm_source(config_, m.id, f, split);
        if (!fs::exists(src)) throw Error(ErrorCode::kIo, "missing PLM predictions " + src.string());
        const auto imported = import_prediction(src, plan, corpus().labels());
        const auto& man = imported.manifest;
        if (man.model_id != m.id || man.fold != f || man.split != split) {
          throw Error(ErrorCode::kInvalidArgument, src.string() + ": manifest declares " + man.model_id + " fold " +
                                                       std::to_string(man.fold) + " " + man.split);
        }
        const fs::path dst = stage_dir(Stage::kImportPlm) / fold_dir(f) / src.filename();
        write_file(dst, read_file(src));
        write_file(manifest_path_for(dst), read_file(manifest_path_for(src)));
      }
    }
  }
}

namespace {

struct Member {
  std::string label;
  ModelGroup group;
  // Per fold.
  std::vector<ModelOutput> test;
  std::vector<double> validation_f1;
};

PredictionMatrix read_matrix(const fs::path& csv, const std::vector<std::string>& ids,
                             const std::vector<std::string>& class_order) {
  auto m = prediction_from_csv(read_file(csv));
  if (m.doc_ids != ids) throw Error(ErrorCode::kDocMismatch, csv.string() + ": rows differ from the fold plan");
  if (m.class_order != class_order) throw Error(ErrorCode::kClassOrderMismatch, csv.string());
  return m;
}

class Scorer {
 public:
  Scorer(const std::vector<Member>& members, const Corpus& corpus, std::size_t folds)
      : corpus_(corpus), folds_(folds) {
    for (const auto& m : members) by_label_.emplace(m.label, &m);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<ModelOutput> outs;
      for (const auto& m : members) {
        outs.push_back(m.test[f]);
        outs.back().model_id = m.label;
      }
      outputs_.push_back(std::move(outs));
    }
  }

  EvaluationReport single(const Member& m, const std::string& category) const {
    std::vector<FoldScore> folds;
    for (std::size_t f = 0; f < folds_; ++f) folds.push_back(score_fold(f, m.test[f].matrix, corpus_));
    return make_report(m.label, category, {m.label}, std::move(folds));
  }

  EvaluationReport ensemble(const std::string& id, const std::string& category,
                            const std::vector<std::string>& labels, VoteMode mode, bool weighted) const {
    std::vector<FoldScore> folds;
    for (std::size_t f = 0; f < folds_; ++f) {
      EnsembleSpec spec{labels, {}, mode};
      for (const auto& l : labels) {
        spec.weights.push_back(weighted ? std::max(by_label_.at(l)->validation_f1[f], kMinWeight) : 1.0);
      }
      const auto result = soft_vote(outputs_[f], spec);
      folds.push_back(score_fold(f, result.fused, corpus_));
    }
    return make_report(id, category, labels, std::move(folds));
  }

 private:
  const Corpus& corpus_;
  std::size_t folds_;
  std::map<std::string, const Member*> by_label_;
  std::vector<std::vector<ModelOutput>> outputs_;
};

}  // namespace

void Pipeline::do_ensemble() {
  const auto& plan = this->plan();
  const auto& labels = corpus().labels();
  const std::size_t folds = plan.folds.size();

  std::vector<Member> plm, fc;
  auto load_member = [&](const std::string& label, ModelGroup group, const fs::path& root, const std::string& file_id) {
    Member m{label, group, {}, {}};
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& fold = plan.folds[f];
      m.test.push_back(
          {label, group, read_matrix(root / fold_dir(f) / (file_id + ".test.csv"), fold.test, labels)});
      if (config_.weighted) {
        const auto val = read_matrix(root / fold_dir(f) / (file_id + ".validation.csv"), fold.validation, labels);
        m.validation_f1.push_back(score_fold(f, val, corpus()).metrics.macro_f1);
      }
    }
    return m;
  };
  for (const auto& p : config_.plm_models) {
    plm.push_back(load_member(p.id, ModelGroup::kPlm, stage_dir(Stage::kImportPlm), p.id));
  }
  for (const auto& m : fc_models(config_)) {
    fc.push_back(load_member(m.label, ModelGroup::kFeatureClassifier, stage_dir(Stage::kPredict), m.id));
  }
  std::vector<Member> all = plm;
  all.insert(all.end(), fc.begin(), fc.end());
  const Scorer scorer(all, corpus(), folds);

  std::vector<std::string> plm_labels, fc_labels;
  for (const auto& m : plm) plm_labels.push_back(m.label);
  for (const auto& m : fc) fc_labels.push_back(m.label);
  plm_labels = sorted_labels(plm_labels);
  fc_labels = sorted_labels(fc_labels);

  const fs::path out = stage_dir(Stage::kEnsemble);
  auto emit = [&](const std::string& category, const std::vector<EvaluationReport>& reports, bool detailed) {
    write_file(out / (category + ".json"), reports_to_json(reports, detailed));
    say("  " + category + ": " + std::to_string(reports.size()) + " reports");
  };

  if (!plm.empty()) {
    std::vector<EvaluationReport> r;
    for (const auto& m : plm) r.push_back(scorer.single(m, "plm-single"));
    emit("plm-single", r, true);
  }
  {
    std::vector<EvaluationReport> r;
    for (const auto& m : fc) r.push_back(scorer.single(m, "fc-single"));
    emit("fc-single", r, true);
  }

  // Subset enumeration sorts ids lexicographically; keep label order instead.
  auto subsets = [](const std::vector<std::string>& labels_in_order) {
    auto subs = enumerate_subsets(labels_in_order);
    for (auto& s : subs) s = sorted_labels(s);
    std::stable_sort(subs.begin(), subs.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return subs;
  };

  std::vector<bool> modes;
  if (config_.unweighted) modes.push_back(false);
  if (config_.weighted) modes.push_back(true);

  for (bool weighted : modes) {
    const std::string suffix = weighted ? "-weighted" : "";
    if (plm_labels.size() >= 2) {
      std::vector<EvaluationReport> r;
      for (const auto& s : subsets(plm_labels)) {
        r.push_back(scorer.ensemble(set_id(s), "plm-ensemble" + suffix, s, VoteMode::kPooled, weighted));
      }
      emit("plm-ensemble" + suffix, r, false);
    }
    if (fc_labels.size() >= 2) {
      std::vector<EvaluationReport> r;
      for (const auto& s : subsets(fc_labels)) {
        r.push_back(scorer.ensemble(set_id(s), "fc-ensemble" + suffix, s, VoteMode::kPooled, weighted));
      }
      emit("fc-ensemble" + suffix, r, false);
    }
    if (plm_labels.size() >= 2 && fc_labels.size() >= 2) {
      std::vector<EvaluationReport> r;
      const auto fc_subsets = subsets(fc_labels);
      for (const auto& ps : subsets(plm_labels)) {
        for (const auto& fs_ : fc_subsets) {
          auto members = ps;
          members.insert(members.end(), fs_.begin(), fs_.end());
          r.push_back(scorer.ensemble(pair_id(ps, fs_), "integrated" + suffix, members, config_.integrated_mode,
                                      weighted));
        }
      }
      emit("integrated" + suffix, r, false);
    }
  }

  if (config_.unweighted && plm_labels.size() >= 2 && !fc_labels.empty()) {
    std::vector<EvaluationReport> r;
    for (const auto& ps : subsets(plm_labels)) {
      for (const auto& one : fc_labels) {
        auto members = ps;
        members.push_back(one);
        r.push_back(scorer.ensemble(pair_id(ps, {one}), "one-fc-with-plms", members, VoteMode::kGrouped, false));
      }
    }
    emit("one-fc-with-plms", r, false);
  }
  if (config_.unweighted && !plm_labels.empty() && fc_labels.size() >= 2) {
    std::vector<EvaluationReport> r;
    const auto fc_subsets = subsets(fc_labels);
    for (const auto& one : plm_labels) {
      for (const auto& fs_ : fc_subsets) {
        std::vector<std::string> members{one};
        members.insert(members.end(), fs_.begin(), fs_.end());
        r.push_back(scorer.ensemble(pair_id({one}, fs_), "one-plm-with-fcs", members, VoteMode::kGrouped, false));
      }
    }
    emit("one-plm-with-fcs", r, false);
  }

  std::string models = "label,model_id,group\n";
  for (const auto& p : config_.plm_models) models += csv::join({p.id, p.id, "plm"}) + "\n";
  for (const auto& m : fc_models(config_)) models += csv::join({m.label, m.id, "feature_classifier"}) + "\n";
  write_file(out / "models.csv", models);
}

namespace {

std::vector<double> scores_of(std::span<const EvaluationReport> reports, Aggregation aggregation) {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(r.score(aggregation));
  return out;
}

}  // namespace

ComparisonResult compare_reports(std::span<const EvaluationReport> a, std::span<const EvaluationReport> b,
                                 Aggregation aggregation, std::size_t top_n) {
  const auto x = top_values(scores_of(a, aggregation), top_n);
  const auto y = top_values(scores_of(b, aggregation), top_n);
  return welch_t_test(x, y);
}

void Pipeline::do_report() {
  const fs::path in = stage_dir(Stage::kEnsemble);
  const fs::path out = stage_dir(Stage::kReport);
  std::map<char, std::vector<EvaluationReport>> groups;
  std::string table4 = "group,category,title,n,n_used,mean,sd,max\n";
  std::vector<std::pair<std::string, std::vector<double>>> box_groups;
  for (const auto& cat : report_categories()) {
    const fs::path p = in / (std::string(cat.name) + ".json");
    if (!fs::exists(p)) continue;
    auto reports = reports_from_json(read_file(p));
    if (reports.empty()) continue;
    const auto ranking = rank_report(reports, config_.top_k, config_.aggregation);
    write_file(out / "rankings" / (std::string(cat.name) + ".csv"), ranking_to_csv(ranking));
    const auto all = scores_of(reports, config_.aggregation);
    const auto used = top_values(all);
    table4 += csv::join({std::string(1, cat.letter), cat.name, cat.title, std::to_string(all.size()),
                         std::to_string(used.size()), format_double(mean(used)), format_double(sample_sd(used)),
                         format_double(used.front())}) +
              "\n";
    box_groups.emplace_back(std::string(1, cat.letter), all);
    groups[cat.letter] = std::move(reports);
  }
  write_file(out / "table4.csv", table4);
  write_file(out / "boxplot.csv", boxplot_to_csv(boxplot_data(box_groups)));

  std::string comparisons = "a,b,t,df,p,cohens_d\n";
  const std::pair<char, char> pairs[] = {{'I', 'B'}, {'I', 'E'}, {'I', 'G'}, {'I', 'H'},
                                         {'J', 'C'}, {'J', 'F'}};
  for (const auto& [a, b] : pairs) {
    if (!groups.count(a) || !groups.count(b)) continue;
    try {
      const auto r = compare_reports(groups[a], groups[b], config_.aggregation);
      comparisons += csv::join({std::string(1, a), std::string(1, b), format_double(r.t), format_double(r.df),
                                format_double(r.p), format_double(r.cohens_d)}) +
                     "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSample) throw;
      comparisons += csv::join({std::string(1, a), std::string(1, b), "", "", "", ""}) + "\n";
    }
  }
  write_file(out / "comparisons.csv", comparisons);
}

void Pipeline::write_manifest() {
  json stages = json::object();
  for (auto s : kAllStages) {
    const fs::path stamp = stage_dir(s) / ".stage";
    if (fs::exists(stamp) && !fs::exists(stage_dir(s) / kIncomplete)) {
      auto key = read_file(stamp);
      if (!key.empty() && key.back() == '\n') key.pop_back();
      stages[std::string(to_string(s))] = key;
    }
  }
  json seeds = json::object();
  seeds["folds"] = derive_seed(config_.seed, "folds");
  json models = json::object();
  for (const auto& m : fc_models(config_)) {
    json per_fold = json::array();
    for (std::size_t f = 0; f < config_.num_folds; ++f) per_fold.push_back(model_seed(config_.seed, m.id, f));
    models[m.id] = per_fold;
  }
  seeds["models"] = models;
  if (corpus_sha_.empty()) corpus_sha_ = sha256_hex(read_file(config_.corpus_path));
  const json manifest{{"format", "authorship-run"},
                      {"version", 1},
                      {"config", config_echo(config_)},
                      {"inputs", {{"corpus_sha256", corpus_sha_}}},
                      {"seeds", seeds},
                      {"stages", stages}};
  write_file(config_.output_dir / "manifest.json", manifest.dump(1) + "\n");
}

std::vector<StageResult> run_pipeline(const ExperimentConfig& config, std::ostream* log) {
  return Pipeline(config, log).run();
}

std::vector<fs::path> write_stub_plm(const ExperimentConfig& config, std::ostream* log) {
  Pipeline pipeline(config, log);
  pipeline.run_until(Stage::kFolds);
  const auto& plan = pipeline.plan();
  const auto& corpus = pipeline.corpus();
  std::vector<fs::path> written;
  for (const auto& m : config.plm_models) {
    const StubPlmSpec spec{m.id, m.stub_signal, m.stub_noise, derive_seed(config.seed, "stub-plm")};
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      for (const auto& split : required_plm_splits(config)) {
        const auto& ids = split_ids(plan.folds[f], split);
        const auto p = plm_source(config, m.id, f, split);
        write_predictions(p, stub_plm_predictions(spec, corpus, ids), {m.id, ModelGroup::kPlm, f, split, corpus.labels()});
        written.push_back(p);
      }
    }
  }
  return written;
}

}  // namespace authorship
