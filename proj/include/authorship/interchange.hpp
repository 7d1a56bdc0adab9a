#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "authorship/corpus.hpp"
#include "authorship/ensemble.hpp"
#include "authorship/prediction.hpp"

namespace authorship {

// Sidecar describing one prediction CSV. `split` names the fold role the
// rows cover: "test" or "validation".
struct PredictionManifest {
  std::string model_id;
  ModelGroup group = ModelGroup::kPlm;
  std::size_t fold = 0;
  std::string split = "test";
  std::vector<std::string> class_order;

  bool operator==(const PredictionManifest&) const = default;
};

// Header `doc_id,<label_1>,...,<label_M>`, one row per document.
std::string prediction_to_csv(const PredictionMatrix& matrix);
PredictionMatrix prediction_from_csv(const std::string& text);

std::string manifest_to_json(const PredictionManifest& manifest);
PredictionManifest manifest_from_json(const std::string& text);

// `dir/model.split.csv` -> `dir/model.split.json`.
std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

void write_predictions(const std::filesystem::path& csv_path, const PredictionMatrix& matrix,
                       const PredictionManifest& manifest);

struct ImportOptions {
  double tolerance = 1e-6;
  // Required group; nullopt accepts whatever the manifest declares.
  std::optional<ModelGroup> group = ModelGroup::kPlm;
};

struct ImportedPrediction {
  PredictionManifest manifest;
  ModelOutput output;  // rows reordered to the fold plan's id order
  std::filesystem::path source;
  std::string sha256;  // of the CSV bytes as read
};

// Reads CSV + manifest pairs and checks them against the fold plan and the
// corpus class order: exact doc coverage of the declared fold split, matching
// class order, and probability rows within tolerance.
ImportedPrediction import_prediction(const std::filesystem::path& csv_path, const FoldPlan& plan,
                                     const std::vector<std::string>& class_order, const ImportOptions& options = {});
std::vector<ImportedPrediction> import_predictions(const std::vector<std::filesystem::path>& csv_paths,
                                                   const FoldPlan& plan, const std::vector<std::string>& class_order,
                                                   const ImportOptions& options = {});

const std::vector<std::string>& split_ids(const FoldAssignment& fold, const std::string& split);

}  // namespace authorship
