#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "authorship/prediction.hpp"

namespace authorship {

enum class ModelGroup { kPlm, kFeatureClassifier };

std::string_view to_string(ModelGroup group);
ModelGroup parse_model_group(std::string_view text);

struct ModelOutput {
  std::string model_id;
  ModelGroup group = ModelGroup::kFeatureClassifier;
  PredictionMatrix matrix;
};

// Checks rows are probability vectors: entries in [0, 1] and sums within
// `tolerance` of 1. Throws kRowSum naming the first offending doc_id.
void validate_rows(const PredictionMatrix& matrix, double tolerance = 1e-6);

// Numerically stable softmax (max-shifted). Throws on non-finite input.
std::vector<double> softmax(std::span<const double> logits);

enum class VoteMode {
  kPooled,   // one weighted mean over all members
  kGrouped,  // weighted mean within each group, then the mean of group vectors
};

struct EnsembleSpec {
  std::vector<std::string> member_ids;
  std::vector<double> weights;
  VoteMode mode = VoteMode::kPooled;

  static EnsembleSpec uniform(std::vector<std::string> member_ids, VoteMode mode = VoteMode::kPooled);
};

struct EnsembleResult {
  PredictionMatrix fused;
  std::vector<std::size_t> predicted;  // argmax class index per document
};

// Weighted soft voting normalized by the weight sum, so fused rows stay
// row-stochastic. Members are summed in model_id order, which makes the
// result independent of the order given in `spec`.
EnsembleResult soft_vote(std::span<const ModelOutput> outputs, const EnsembleSpec& spec);

// All subsets of size >= min_size, ordered by size then lexicographically
// over the sorted ids.
std::vector<std::vector<std::string>> enumerate_subsets(std::vector<std::string> ids, std::size_t min_size = 2);

struct IntegratedPair {
  std::vector<std::string> plm;
  std::vector<std::string> feature_classifier;
};

// Cross product of the PLM subsets and the feature-classifier subsets.
std::vector<IntegratedPair> integrated_enumerate(std::vector<std::string> plm_ids,
                                                 std::vector<std::string> fc_ids, std::size_t min_size = 2);

}  // namespace authorship
