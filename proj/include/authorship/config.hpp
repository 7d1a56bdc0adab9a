#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "authorship/classifiers.hpp"
#include "authorship/corpus.hpp"
#include "authorship/ensemble.hpp"
#include "authorship/evaluation.hpp"
#include "authorship/features.hpp"

namespace authorship {

enum class ClassifierKind { kAdaBoost, kRandomForest };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view text);

// A PLM whose predictions are imported from interchange files at
// `<plm.dir>/fold<f>/<id>.<split>.csv`. `stub_signal` and `stub_noise` are
// only read by the stub generator.
struct PlmEntry {
  std::string id;
  double stub_signal = 2.0;
  double stub_noise = 1.0;

  bool operator==(const PlmEntry&) const = default;
};

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  std::size_t truncation = kDefaultTruncation;

  std::size_t num_folds = 5;
  SplitRatios ratios;

  std::vector<FeatureSpec> features;
  PhrasePatternRule phrase_rule;

  std::vector<ClassifierKind> classifiers;
  RandomForestConfig rf;
  AdaBoostConfig ada;

  std::vector<PlmEntry> plm_models;
  std::filesystem::path plm_dir;

  bool unweighted = true;
  bool weighted = true;
  VoteMode integrated_mode = VoteMode::kGrouped;

  std::size_t top_k = 10;
  Aggregation aggregation = Aggregation::kFoldMean;

  std::filesystem::path output_dir;
  std::uint64_t seed = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

// Defaults: char:2, token:1 and phrase features; ada and rf classifiers.
ExperimentConfig default_config();

// TOML document; relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

inline constexpr const char* kOutputRootEnv = "AUTHORSHIP_OUTPUT_ROOT";
// Replaces output_dir with $AUTHORSHIP_OUTPUT_ROOT when that is set.
void apply_environment(ExperimentConfig& config);

// Canonical TOML rendering; parse_config(config_to_toml(c)) == c.
std::string config_to_toml(const ExperimentConfig& config);

}  // namespace authorship
