#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "authorship/corpus.hpp"

namespace authorship {

// Joins the units of token n-grams and phrase patterns.
inline constexpr char kKeySeparator = '\x1f';

enum class FeatureFamily { kCharNgram, kTokenNgram, kPhrasePattern };

struct FeatureKind {
  FeatureFamily family = FeatureFamily::kTokenNgram;
  int n = 1;  // ignored for phrase patterns

  static FeatureKind char_ngram(int n) { return {FeatureFamily::kCharNgram, n}; }
  static FeatureKind token_ngram(int n) { return {FeatureFamily::kTokenNgram, n}; }
  static FeatureKind phrase_pattern() { return {FeatureFamily::kPhrasePattern, 0}; }

  // "char:2", "token:1", "phrase"
  std::string id() const;
  static FeatureKind parse(const std::string& id);

  bool operator==(const FeatureKind& other) const {
    return family == other.family && (family == FeatureFamily::kPhrasePattern || n == other.n);
  }
};

enum class FrequencyMode { kRawCount, kRelativeFrequency };

struct FeatureSpec {
  FeatureKind kind;
  std::size_t min_doc_freq = 1;
  std::optional<std::size_t> max_features;
  FrequencyMode frequency_mode = FrequencyMode::kRelativeFrequency;
  // Char n-grams span token boundaries (unsegmented text). Set false for
  // languages with whitespace-separated words.
  bool cross_token_boundaries = true;

  bool operator==(const FeatureSpec&) const = default;
};

struct PhrasePatternRule {
  std::set<std::string> preserved_pos = {"particle", "punctuation", "conjunction", "adjective"};

  bool operator==(const PhrasePatternRule&) const = default;
};

// Feature keys with contiguous column indices, ordered by descending total
// frequency and then by key.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(FeatureKind kind, std::vector<std::string> keys);

  const FeatureKind& kind() const { return kind_; }
  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  std::optional<std::size_t> find(const std::string& key) const;

 private:
  FeatureKind kind_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Compressed sparse rows; entries within a row are sorted by column.
struct FeatureMatrix {
  std::vector<std::string> doc_ids;
  Vocabulary vocabulary;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> columns;
  std::vector<double> values;

  std::size_t rows() const { return doc_ids.size(); }
  std::size_t cols() const { return vocabulary.size(); }
  double row_sum(std::size_t row) const;
  std::vector<double> dense_row(std::size_t row) const;
};

using DocumentView = std::span<const AnnotatedDocument* const>;

// Raw feature counts of one document. Keys are UTF-8; throws
// kAnnotationRequired for phrase patterns over unannotated text.
std::unordered_map<std::string, std::size_t> count_features(const AnnotatedDocument& doc, const FeatureKind& kind,
                                                             const PhrasePatternRule& rule = {},
                                                             bool cross_token_boundaries = true);

std::vector<std::string> utf8_characters(std::string_view text);

Vocabulary build_vocabulary(DocumentView docs, const FeatureSpec& spec, const PhrasePatternRule& rule = {});

// Counts only in-vocabulary features. Throws kKindMismatch when the spec and
// vocabulary disagree on the feature kind.
FeatureMatrix vectorize(DocumentView docs, const Vocabulary& vocabulary, const FeatureSpec& spec,
                        const PhrasePatternRule& rule = {});

FeatureMatrix extract(DocumentView docs, const FeatureSpec& spec, const PhrasePatternRule& rule = {});
FeatureMatrix extract_char_ngrams(const Corpus& corpus, int n, FeatureSpec spec = {});
FeatureMatrix extract_token_ngrams(const Corpus& corpus, int n, FeatureSpec spec = {});
FeatureMatrix extract_phrase_patterns(const Corpus& corpus, const PhrasePatternRule& rule = {},
                                      FeatureSpec spec = {});

std::vector<const AnnotatedDocument*> all_documents(const Corpus& corpus);

// Sparse triplets `doc_id,feature_index,value` and the vocabulary sidecar
// `feature_index,key,kind`.
std::string matrix_to_triplet_csv(const FeatureMatrix& matrix);
std::string vocabulary_to_csv(const Vocabulary& vocabulary);
Vocabulary vocabulary_from_csv(const std::string& text);
// Rows follow `doc_ids`; documents absent from the triplets get empty rows.
FeatureMatrix matrix_from_triplet_csv(const std::string& text, const Vocabulary& vocabulary,
                                      const std::vector<std::string>& doc_ids);

}  // namespace authorship
