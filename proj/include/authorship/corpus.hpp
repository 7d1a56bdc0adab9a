#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "authorship/common.hpp"

namespace authorship {

struct AnnotatedToken {
  std::string surface;
  std::optional<std::string> pos;
  bool phrase_start = false;

  bool operator==(const AnnotatedToken&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string author;
  std::vector<AnnotatedToken> tokens;
  // True when the source carried phrase-boundary flags for this document.
  bool phrase_annotated = false;

  bool operator==(const AnnotatedDocument&) const = default;
};

// Documents plus their distinct author labels in lexicographic order.
class Corpus {
 public:
  Corpus() = default;
  // Validates ids and tokens and derives the label list.
  explicit Corpus(std::vector<AnnotatedDocument> documents);

  const std::vector<AnnotatedDocument>& documents() const { return documents_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return documents_.size(); }

  // Position of `label` in labels(); throws kUnknownLabel.
  std::size_t label_index(const std::string& label) const;
  const AnnotatedDocument& find(const std::string& doc_id) const;
  // Documents in the order of `doc_ids`.
  std::vector<const AnnotatedDocument*> select(const std::vector<std::string>& doc_ids) const;
  std::map<std::string, std::size_t> author_counts() const;

 private:
  std::vector<AnnotatedDocument> documents_;
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_by_id_;
};

enum class CorpusFormat { kJsonl };

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = CorpusFormat::kJsonl);
Corpus parse_corpus_jsonl(const std::string& text);
std::string to_jsonl(const Corpus& corpus);

inline constexpr std::size_t kDefaultTruncation = 510;

AnnotatedDocument truncate(const AnnotatedDocument& doc, std::size_t limit = kDefaultTruncation);
Corpus truncate(const Corpus& corpus, std::size_t limit = kDefaultTruncation);

// Documents per author assigned to each role within every fold.
struct SplitRatios {
  std::size_t train = 16;
  std::size_t validation = 2;
  std::size_t test = 2;

  bool operator==(const SplitRatios&) const = default;
};

struct FoldAssignment {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  bool operator==(const FoldAssignment&) const = default;
};

struct FoldPlan {
  std::size_t num_folds = 0;
  std::vector<FoldAssignment> folds;

  bool operator==(const FoldPlan&) const = default;
};

// Per author: shuffle once by seed, cut 2*num_folds rotation blocks of sizes
// (validation, test), and give fold f blocks 2f and 2f+1. Every other document
// of that author trains in fold f.
FoldPlan make_fold_plan(const Corpus& corpus, std::size_t num_folds, const SplitRatios& ratios,
                        std::uint64_t seed);

std::string fold_plan_to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const std::string& text);

}  // namespace authorship
