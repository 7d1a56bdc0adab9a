#include "authorship/features.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace authorship {

std::string FeatureKind::id() const {
  switch (family) {
    case FeatureFamily::kCharNgram: return "char:" + std::to_string(n);
    case FeatureFamily::kTokenNgram: return "token:" + std::to_string(n);
    case FeatureFamily::kPhrasePattern: return "phrase";
  }
  return "?";
}

FeatureKind FeatureKind::parse(const std::string& id) {
  if (id == "phrase") return phrase_pattern();
  const auto colon = id.find(':');
  if (colon != std::string::npos) {
    int n = 0;
    const auto tail = std::string_view(id).substr(colon + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (ec == std::errc{} && ptr == tail.data() + tail.size() && n >= 1) {
      const auto head = id.substr(0, colon);
      if (head == "char") return char_ngram(n);
      if (head == "token") return token_ngram(n);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature kind '" + id + "'");
}

Vocabulary::Vocabulary(FeatureKind kind, std::vector<std::string> keys) : kind_(kind), keys_(std::move(keys)) {
  index_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate vocabulary key");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double FeatureMatrix::row_sum(std::size_t row) const {
  double s = 0.0;
  for (std::size_t k = row_offsets[row]; k < row_offsets[row + 1]; ++k) s += values[k];
  return s;
}

std::vector<double> FeatureMatrix::dense_row(std::size_t row) const {
  std::vector<double> out(cols(), 0.0);
  for (std::size_t k = row_offsets[row]; k < row_offsets[row + 1]; ++k) out[columns[k]] = values[k];
  return out;
}

std::vector<std::string> utf8_characters(std::string_view text) {
  std::vector<std::string> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (lead >= 0xF8 || i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;  // invalid sequence: fall back to a single byte unit
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

namespace {

void count_ngrams(const std::vector<std::string>& units, int n, bool join_with_separator,
                  std::unordered_map<std::string, std::size_t>& counts) {
  const auto width = static_cast<std::size_t>(n);
  if (units.size() < width) return;
  for (std::size_t i = 0; i + width <= units.size(); ++i) {
    std::string key = units[i];
    for (std::size_t k = 1; k < width; ++k) {
      if (join_with_separator) key.push_back(kKeySeparator);
      key += units[i + k];
    }
    ++counts[key];
  }
}

}  // namespace

std::unordered_map<std::string, std::size_t> count_features(const AnnotatedDocument& doc, const FeatureKind& kind,
                                                             const PhrasePatternRule& rule,
                                                             bool cross_token_boundaries) {
  std::unordered_map<std::string, std::size_t> counts;
  switch (kind.family) {
    case FeatureFamily::kCharNgram: {
      if (kind.n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
      if (cross_token_boundaries) {
        std::string text;
        for (const auto& t : doc.tokens) text += t.surface;
        count_ngrams(utf8_characters(text), kind.n, false, counts);
      } else {
        for (const auto& t : doc.tokens) count_ngrams(utf8_characters(t.surface), kind.n, false, counts);
      }
      break;
    }
    case FeatureFamily::kTokenNgram: {
      if (kind.n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
      std::vector<std::string> units;
      units.reserve(doc.tokens.size());
      for (const auto& t : doc.tokens) units.push_back(t.surface);
      count_ngrams(units, kind.n, true, counts);
      break;
    }
    case FeatureFamily::kPhrasePattern: {
      if (!doc.phrase_annotated) {
        throw Error(ErrorCode::kAnnotationRequired, "phrase boundaries missing in " + doc.doc_id);
      }
      std::string pattern;
      bool open = false;
      for (const auto& t : doc.tokens) {
        if (!t.pos) throw Error(ErrorCode::kAnnotationRequired, "POS tag missing in " + doc.doc_id);
        if (t.phrase_start && open) {
          ++counts[pattern];
          pattern.clear();
        } else if (open) {
          pattern.push_back(kKeySeparator);
        }
        open = true;
        pattern += rule.preserved_pos.count(*t.pos) ? t.surface : *t.pos;
      }
      if (open) ++counts[pattern];
      break;
    }
  }
  return counts;
}

std::vector<const AnnotatedDocument*> all_documents(const Corpus& corpus) {
  std::vector<const AnnotatedDocument*> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) out.push_back(&doc);
  return out;
}

Vocabulary build_vocabulary(DocumentView docs, const FeatureSpec& spec, const PhrasePatternRule& rule) {
  if (spec.min_doc_freq < 1) throw Error(ErrorCode::kInvalidArgument, "min_doc_freq must be >= 1");
  struct Stats {
    std::size_t total = 0;
    std::size_t doc_freq = 0;
  };
  std::unordered_map<std::string, Stats> stats;
  for (const auto* doc : docs) {
    for (const auto& [key, count] : count_features(*doc, spec.kind, rule, spec.cross_token_boundaries)) {
      auto& s = stats[key];
      s.total += count;
      ++s.doc_freq;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [key, s] : stats) {
    if (s.doc_freq >= spec.min_doc_freq) kept.emplace_back(key, s.total);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (spec.max_features && kept.size() > *spec.max_features) kept.resize(*spec.max_features);
  std::vector<std::string> keys;
  keys.reserve(kept.size());
  for (auto& [key, total] : kept) keys.push_back(std::move(key));
  return Vocabulary(spec.kind, std::move(keys));
}

FeatureMatrix vectorize(DocumentView docs, const Vocabulary& vocabulary, const FeatureSpec& spec,
                        const PhrasePatternRule& rule) {
  if (!(vocabulary.kind() == spec.kind)) {
    throw Error(ErrorCode::kKindMismatch,
                "vocabulary is " + vocabulary.kind().id() + " but " + spec.kind.id() + " was requested");
  }
  FeatureMatrix m;
  m.vocabulary = vocabulary;
  m.doc_ids.reserve(docs.size());
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto* doc : docs) {
    m.doc_ids.push_back(doc->doc_id);
    row.clear();
    for (const auto& [key, count] : count_features(*doc, spec.kind, rule, spec.cross_token_boundaries)) {
      if (auto col = vocabulary.find(key)) row.emplace_back(*col, static_cast<double>(count));
    }
    std::sort(row.begin(), row.end());
    double total = 0.0;
    for (const auto& [col, v] : row) total += v;
    for (const auto& [col, v] : row) {
      m.columns.push_back(col);
      m.values.push_back(spec.frequency_mode == FrequencyMode::kRelativeFrequency ? v / total : v);
    }
    m.row_offsets.push_back(m.columns.size());
  }
  return m;
}

FeatureMatrix extract(DocumentView docs, const FeatureSpec& spec, const PhrasePatternRule& rule) {
  return vectorize(docs, build_vocabulary(docs, spec, rule), spec, rule);
}

FeatureMatrix extract_char_ngrams(const Corpus& corpus, int n, FeatureSpec spec) {
  spec.kind = FeatureKind::char_ngram(n);
  const auto docs = all_documents(corpus);
  return extract(docs, spec);
}

FeatureMatrix extract_token_ngrams(const Corpus& corpus, int n, FeatureSpec spec) {
  spec.kind = FeatureKind::token_ngram(n);
  const auto docs = all_documents(corpus);
  return extract(docs, spec);
}

FeatureMatrix extract_phrase_patterns(const Corpus& corpus, const PhrasePatternRule& rule, FeatureSpec spec) {
  spec.kind = FeatureKind::phrase_pattern();
  const auto docs = all_documents(corpus);
  return extract(docs, spec, rule);
}

std::string matrix_to_triplet_csv(const FeatureMatrix& matrix) {
  std::string out = "doc_id,feature_index,value\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto id = csv::escape(matrix.doc_ids[r]);
    for (std::size_t k = matrix.row_offsets[r]; k < matrix.row_offsets[r + 1]; ++k) {
      out += id;
      out.push_back(',');
      out += std::to_string(matrix.columns[k]);
      out.push_back(',');
      out += format_double(matrix.values[k]);
      out.push_back('\n');
    }
  }
  return out;
}

std::string vocabulary_to_csv(const Vocabulary& vocabulary) {
  std::string out = "feature_index,key,kind\n";
  const auto kind = vocabulary.kind().id();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    out += std::to_string(i) + "," + csv::escape(vocabulary.keys()[i]) + "," + kind + "\n";
  }
  return out;
}

Vocabulary vocabulary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || csv::split_line(line) != std::vector<std::string>{"feature_index", "key", "kind"}) {
    throw Error(ErrorCode::kMalformedRecord, "vocabulary header");
  }
  std::vector<std::string> keys;
  std::optional<FeatureKind> kind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != 3 || fields[0] != std::to_string(keys.size())) {
      throw Error(ErrorCode::kMalformedRecord, "vocabulary row " + std::to_string(keys.size()));
    }
    const auto k = FeatureKind::parse(fields[2]);
    if (kind && !(*kind == k)) throw Error(ErrorCode::kKindMismatch, "mixed kinds in vocabulary");
    kind = k;
    keys.push_back(std::move(fields[1]));
  }
  // An empty vocabulary carries no kind column; callers re-tag it.
  return Vocabulary(kind.value_or(FeatureKind{}), std::move(keys));
}

FeatureMatrix matrix_from_triplet_csv(const std::string& text, const Vocabulary& vocabulary,
                                      const std::vector<std::string>& doc_ids) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < doc_ids.size(); ++i) row_of.emplace(doc_ids[i], i);
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(doc_ids.size());
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "doc_id,feature_index,value") {
    throw Error(ErrorCode::kMalformedRecord, "triplet header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != 3) throw Error(ErrorCode::kMalformedRecord, "triplet row: " + line);
    auto it = row_of.find(fields[0]);
    if (it == row_of.end()) throw Error(ErrorCode::kDocMismatch, "unexpected doc_id " + fields[0]);
    const std::size_t col = parse_size(fields[1]);
    if (col >= vocabulary.size()) throw Error(ErrorCode::kMalformedRecord, "feature index out of range");
    rows[it->second].emplace_back(col, parse_double(fields[2]));
  }
  FeatureMatrix m;
  m.doc_ids = doc_ids;
  m.vocabulary = vocabulary;
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    for (const auto& [col, v] : row) {
      m.columns.push_back(col);
      m.values.push_back(v);
    }
    m.row_offsets.push_back(m.columns.size());
  }
  return m;
}

}  // namespace authorship
