#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "authorship/common.hpp"
#include "authorship/config.hpp"
#include "authorship/corpus.hpp"
#include "authorship/evaluation.hpp"

namespace authorship {

enum class Stage { kFolds, kExtract, kTrain, kPredict, kImportPlm, kEnsemble, kReport };

inline constexpr Stage kAllStages[] = {Stage::kFolds,     Stage::kExtract,  Stage::kTrain, Stage::kPredict,
                                       Stage::kImportPlm, Stage::kEnsemble, Stage::kReport};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

// A failure inside a pipeline stage. what() starts with "stage '<name>': ".
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause);
  Stage stage() const noexcept { return stage_; }
  ErrorCode cause() const noexcept { return code(); }

 private:
  Stage stage_;
};

// One trained classifier on one feature family. `label` is the short name
// used in ensemble ids ("1".."N", classifiers outer, features inner).
struct FcModel {
  std::string id;  // e.g. "rf_token1"
  std::string label;
  ClassifierKind classifier;
  FeatureSpec feature;
};

std::vector<FcModel> fc_models(const ExperimentConfig& config);
// "char:2" -> "char2"
std::string feature_slug(const FeatureKind& kind);

// Report categories, keyed by their table letter.
struct ReportCategory {
  char letter;
  const char* name;
  const char* title;
};
const std::vector<ReportCategory>& report_categories();

struct StageResult {
  Stage stage;
  bool skipped = false;
};

// Runs the experiment stages against config.output_dir. Each stage writes to
// its own subdirectory, which holds an INCOMPLETE marker while the stage runs
// and is skipped on later runs when its content key is unchanged and no stage
// it reads from ran in the same call.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config, std::ostream* log = nullptr);

  // Runs `stage` after its prerequisites.
  std::vector<StageResult> run_until(Stage stage);
  std::vector<StageResult> run();

  const ExperimentConfig& config() const { return config_; }
  std::filesystem::path stage_dir(Stage stage) const;
  std::string stage_key(Stage stage);

  const Corpus& corpus();
  const FoldPlan& plan();

 private:
  StageResult run_one(Stage stage, bool force);
  void execute(Stage stage);
  void do_folds();
  void do_extract();
  void do_train();
  void do_predict();
  void do_import_plm();
  void do_ensemble();
  void do_report();
  void write_manifest();
  void say(const std::string& line);

  ExperimentConfig config_;
  std::ostream* log_;
  std::optional<Corpus> corpus_;
  std::optional<FoldPlan> plan_;
  std::map<Stage, std::string> keys_;
  std::string corpus_sha_;
};

std::vector<StageResult> run_pipeline(const ExperimentConfig& config, std::ostream* log = nullptr);

// Writes deterministic stub interchange files for every configured PLM into
// plm_dir/fold<f>/<id>.<split>.csv (test, plus validation when weighted
// ensembles are enabled). Runs the fold stage first.
std::vector<std::filesystem::path> write_stub_plm(const ExperimentConfig& config, std::ostream* log = nullptr);

// Welch comparison of two report collections using their top-`top_n`
// scores, as in the box-plot summaries.
ComparisonResult compare_reports(std::span<const EvaluationReport> a, std::span<const EvaluationReport> b,
                                 Aggregation aggregation = Aggregation::kFoldMean, std::size_t top_n = kBoxplotTopN);

}  // namespace authorship
