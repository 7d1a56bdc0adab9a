#include "authorship/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "authorship/common.hpp"

namespace authorship {

std::string_view to_string(ModelGroup group) {
  return group == ModelGroup::kPlm ? "plm" : "feature_classifier";
}

ModelGroup parse_model_group(std::string_view text) {
  if (text == "plm") return ModelGroup::kPlm;
  if (text == "feature_classifier") return ModelGroup::kFeatureClassifier;
  throw Error(ErrorCode::kInvalidArgument, "unknown model group '" + std::string(text) + "'");
}

void validate_rows(const PredictionMatrix& matrix, double tolerance) {
  if (matrix.values.size() != matrix.rows() * matrix.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction matrix shape mismatch");
  }
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double sum = 0.0;
    for (double v : matrix.row(r)) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kRowSum, "probability outside [0, 1] for doc_id " + matrix.doc_ids[r]);
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::kRowSum, "row for doc_id " + matrix.doc_ids[r] + " sums to " + format_double(sum));
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kInvalidArgument, "softmax of an empty vector");
  for (double x : logits) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "softmax input is not finite");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

EnsembleSpec EnsembleSpec::uniform(std::vector<std::string> member_ids, VoteMode mode) {
  EnsembleSpec spec;
  spec.weights.assign(member_ids.size(), 1.0);
  spec.member_ids = std::move(member_ids);
  spec.mode = mode;
  return spec;
}

namespace {

struct Member {
  const ModelOutput* output;
  double weight;
};

void accumulate_mean(const std::vector<Member>& members, PredictionMatrix& into, double scale) {
  double total = 0.0;
  for (const auto& m : members) total += m.weight;
  for (const auto& m : members) {
    const double w = scale * m.weight / total;
    const auto& src = m.output->matrix.values;
    for (std::size_t i = 0; i < src.size(); ++i) into.values[i] += w * src[i];
  }
}

}  // namespace

EnsembleResult soft_vote(std::span<const ModelOutput> outputs, const EnsembleSpec& spec) {
  if (spec.member_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble has no members");
  if (spec.weights.size() != spec.member_ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weight count differs from member count");
  }
  std::map<std::string, const ModelOutput*> by_id;
  for (const auto& out : outputs) by_id.emplace(out.model_id, &out);

  // Canonical member order: by model_id.
  std::map<std::string, double> chosen;
  for (std::size_t i = 0; i < spec.member_ids.size(); ++i) {
    const double w = spec.weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kInvalidArgument, "weights must be positive");
    if (!by_id.count(spec.member_ids[i])) throw Error(ErrorCode::kUnknownMember, spec.member_ids[i]);
    if (!chosen.emplace(spec.member_ids[i], w).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate member " + spec.member_ids[i]);
    }
  }

  const PredictionMatrix& ref = by_id.at(chosen.begin()->first)->matrix;
  std::vector<Member> plm;
  std::vector<Member> fc;
  std::vector<Member> all;
  for (const auto& [id, w] : chosen) {
    const ModelOutput* out = by_id.at(id);
    if (out->matrix.doc_ids != ref.doc_ids) throw Error(ErrorCode::kDocMismatch, "doc_ids differ for member " + id);
    if (out->matrix.class_order != ref.class_order) {
      throw Error(ErrorCode::kClassOrderMismatch, "class order differs for member " + id);
    }
    if (out->matrix.values.size() != ref.values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "matrix shape differs for member " + id);
    }
    all.push_back({out, w});
    (out->group == ModelGroup::kPlm ? plm : fc).push_back({out, w});
  }

  EnsembleResult result;
  result.fused = PredictionMatrix(ref.doc_ids, ref.class_order);
  if (spec.mode == VoteMode::kPooled) {
    accumulate_mean(all, result.fused, 1.0);
  } else {
    const double groups = static_cast<double>(!plm.empty()) + static_cast<double>(!fc.empty());
    if (!plm.empty()) accumulate_mean(plm, result.fused, 1.0 / groups);
    if (!fc.empty()) accumulate_mean(fc, result.fused, 1.0 / groups);
  }
  result.predicted.reserve(result.fused.rows());
  for (std::size_t r = 0; r < result.fused.rows(); ++r) result.predicted.push_back(result.fused.argmax(r));
  return result;
}

std::vector<std::vector<std::string>> enumerate_subsets(std::vector<std::string> ids, std::size_t min_size) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate model id in enumeration");
  }
  if (ids.size() < min_size || min_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least " + std::to_string(min_size) + " models, got " +
                                                 std::to_string(ids.size()));
  }
  if (ids.size() > 24) throw Error(ErrorCode::kInvalidArgument, "too many models to enumerate");
  std::vector<std::vector<std::string>> out;
  const std::size_t n = ids.size();
  for (std::size_t k = min_size; k <= n; ++k) {
    // Lexicographic k-combinations of indices.
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<std::string> subset;
      subset.reserve(k);
      for (auto i : idx) subset.push_back(ids[i]);
      out.push_back(std::move(subset));
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return out;
}

std::vector<IntegratedPair> integrated_enumerate(std::vector<std::string> plm_ids,
                                                 std::vector<std::string> fc_ids, std::size_t min_size) {
  const auto plm = enumerate_subsets(std::move(plm_ids), min_size);
  const auto fc = enumerate_subsets(std::move(fc_ids), min_size);
  std::vector<IntegratedPair> out;
  out.reserve(plm.size() * fc.size());
  for (const auto& p : plm) {
    for (const auto& f : fc) out.push_back({p, f});
  }
  return out;
}

}  // namespace authorship
