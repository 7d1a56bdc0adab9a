#include "doctest.h"

#include <map>
#include <set>

#include "authorship/features.hpp"
#include "helpers.hpp"

using namespace authorship;
using authorship::test::error_code_of;
using authorship::test::make_annotated;
using authorship::test::make_doc;

namespace {

std::map<std::string, double> row_as_map(const FeatureMatrix& m, std::size_t row) {
  std::map<std::string, double> out;
  for (std::size_t k = m.row_offsets[row]; k < m.row_offsets[row + 1]; ++k) {
    out[m.vocabulary.keys()[m.columns[k]]] = m.values[k];
  }
  return out;
}

FeatureSpec raw(FeatureKind kind) {
  FeatureSpec spec;
  spec.kind = kind;
  spec.frequency_mode = FrequencyMode::kRawCount;
  return spec;
}

const std::string kSep(1, kKeySeparator);

// Random documents over a small alphabet with POS tags and phrase flags.
Corpus random_corpus(Rng& rng, std::size_t n_docs) {
  const std::vector<std::string> surfaces{"a", "b", "ab", "は", "が", "。", "本", "x"};
  const std::vector<std::string> tags{"noun", "verb", "particle", "punctuation", "adjective"};
  std::vector<AnnotatedDocument> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::vector<std::tuple<std::string, std::string, bool>> toks;
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t i = 0; i < len; ++i) {
      toks.emplace_back(surfaces[rng.below(surfaces.size())], tags[rng.below(tags.size())],
                        i == 0 || rng.below(3) == 0);
    }
    docs.push_back(make_annotated("d" + std::to_string(d), "A" + std::to_string(d % 3), toks));
  }
  return Corpus(std::move(docs));
}

}  // namespace

TEST_CASE("char bigrams over unsegmented text") {
  const Corpus corpus({make_doc("d1", "X", {"ab", "ab"}), make_doc("d2", "Y", {"a"})});
  const auto m = extract_char_ngrams(corpus, 2, raw(FeatureKind::char_ngram(2)));
  CHECK(row_as_map(m, 0) == std::map<std::string, double>{{"ab", 2}, {"ba", 1}});
  CHECK(row_as_map(m, 1).empty());
  CHECK(m.row_sum(1) == 0.0);
  // Descending frequency, then key.
  CHECK(m.vocabulary.keys() == std::vector<std::string>{"ab", "ba"});
}

TEST_CASE("char n-grams count code points, not bytes") {
  const Corpus corpus({make_doc("d", "X", {"分類", "に"})});
  const auto m = extract_char_ngrams(corpus, 2, raw(FeatureKind::char_ngram(2)));
  CHECK(row_as_map(m, 0) == std::map<std::string, double>{{"分類", 1}, {"類に", 1}});
}

TEST_CASE("char n-grams can stay within tokens") {
  const Corpus corpus({make_doc("d", "X", {"ab", "ab"})});
  auto spec = raw(FeatureKind::char_ngram(2));
  spec.cross_token_boundaries = false;
  const auto m = extract_char_ngrams(corpus, 2, spec);
  CHECK(row_as_map(m, 0) == std::map<std::string, double>{{"ab", 2}});
}

TEST_CASE("token n-grams") {
  const Corpus corpus({make_doc("d1", "X", {"the", "cat", "the"}), make_doc("d2", "Y", {"a", "b"})});
  const auto uni = extract_token_ngrams(corpus, 1, raw(FeatureKind::token_ngram(1)));
  CHECK(row_as_map(uni, 0) == std::map<std::string, double>{{"the", 2}, {"cat", 1}});
  const auto bi = extract_token_ngrams(corpus, 2, raw(FeatureKind::token_ngram(2)));
  CHECK(row_as_map(bi, 1) == std::map<std::string, double>{{"a" + kSep + "b", 1}});
}

TEST_CASE("phrase patterns mask content words") {
  const Corpus corpus({make_annotated("d", "X",
                                      {{"BERT", "noun", true},
                                       {"は", "particle", false},
                                       {"分類", "noun", true},
                                       {"に", "particle", false},
                                       {"。", "punctuation", true}})});
  const auto m = extract_phrase_patterns(corpus, {}, raw(FeatureKind::phrase_pattern()));
  CHECK(row_as_map(m, 0) ==
        std::map<std::string, double>{{"noun" + kSep + "は", 1}, {"noun" + kSep + "に", 1}, {"。", 1}});
}

TEST_CASE("phrase patterns need annotations") {
  const Corpus plain({make_doc("d", "X", {"a"})});
  CHECK(error_code_of([&] { extract_phrase_patterns(plain); }) == ErrorCode::kAnnotationRequired);

  auto doc = make_annotated("d", "X", {{"a", "noun", true}, {"b", "particle", false}});
  doc.tokens[1].pos.reset();
  const Corpus missing_pos({doc});
  CHECK(error_code_of([&] { extract_phrase_patterns(missing_pos); }) == ErrorCode::kAnnotationRequired);
}

TEST_CASE("phrase pattern vocabulary matches a phrase-walk oracle") {
  Rng rng(17);
  const Corpus corpus = random_corpus(rng, 40);
  const PhrasePatternRule rule;
  // Oracle: split on phrase starts, then mask.
  std::set<std::string> expected;
  for (const auto& doc : corpus.documents()) {
    std::vector<std::vector<const AnnotatedToken*>> phrases;
    for (const auto& t : doc.tokens) {
      if (t.phrase_start || phrases.empty()) phrases.emplace_back();
      phrases.back().push_back(&t);
    }
    for (const auto& p : phrases) {
      std::string key;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) key += kSep;
        key += rule.preserved_pos.count(*p[i]->pos) ? p[i]->surface : *p[i]->pos;
      }
      expected.insert(key);
    }
  }
  const auto m = extract_phrase_patterns(corpus, rule, raw(FeatureKind::phrase_pattern()));
  CHECK(std::set<std::string>(m.vocabulary.keys().begin(), m.vocabulary.keys().end()) == expected);
}

TEST_CASE("masking soundness") {
  Rng rng(23);
  const Corpus corpus = random_corpus(rng, 60);
  const PhrasePatternRule rule;
  const auto m = extract_phrase_patterns(corpus, rule);
  std::set<std::string> masked_surfaces;
  std::set<std::string> preserved_surfaces;
  for (const auto& doc : corpus.documents()) {
    for (const auto& t : doc.tokens) {
      (rule.preserved_pos.count(*t.pos) ? preserved_surfaces : masked_surfaces).insert(t.surface);
    }
  }
  for (const auto& key : m.vocabulary.keys()) {
    std::size_t start = 0;
    while (start <= key.size()) {
      const auto end = std::min(key.find(kKeySeparator, start), key.size());
      const auto element = key.substr(start, end - start);
      // Every element is a POS tag or a surface of a preserved-POS token.
      CHECK((preserved_surfaces.count(element) || element == "noun" || element == "verb" ||
             element == "particle" || element == "punctuation" || element == "adjective"));
      start = end + 1;
    }
  }
}

TEST_CASE("row sums are preserved in raw count mode") {
  Rng rng(29);
  const Corpus corpus = random_corpus(rng, 50);
  const auto chars = extract_char_ngrams(corpus, 2, raw(FeatureKind::char_ngram(2)));
  const auto tokens = extract_token_ngrams(corpus, 1, raw(FeatureKind::token_ngram(1)));
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    std::string text;
    for (const auto& t : corpus.documents()[r].tokens) text += t.surface;
    const auto len = utf8_characters(text).size();
    CHECK(chars.row_sum(r) == static_cast<double>(len > 0 ? len - 1 : 0));
    CHECK(tokens.row_sum(r) == static_cast<double>(corpus.documents()[r].tokens.size()));
  }
}

TEST_CASE("relative frequency rows sum to one") {
  Rng rng(31);
  const Corpus corpus = random_corpus(rng, 30);
  const auto m = extract_token_ngrams(corpus, 2);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = m.row_sum(r);
    if (s != 0.0) CHECK(std::abs(s - 1.0) <= 1e-9);
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) CHECK(m.values[k] >= 0.0);
  }
}

TEST_CASE("vocabulary filters and caps deterministically") {
  const Corpus corpus({make_doc("d1", "X", {"a", "a", "a", "b", "c"}), make_doc("d2", "Y", {"b", "c", "d"}),
                       make_doc("d3", "Y", {"c", "e"})});
  auto spec = raw(FeatureKind::token_ngram(1));
  const auto docs = all_documents(corpus);
  CHECK(build_vocabulary(docs, spec).keys() == std::vector<std::string>{"a", "c", "b", "d", "e"});
  spec.min_doc_freq = 2;
  CHECK(build_vocabulary(docs, spec).keys() == std::vector<std::string>{"c", "b"});
  spec.min_doc_freq = 1;
  spec.max_features = 2;
  CHECK(build_vocabulary(docs, spec).keys() == std::vector<std::string>{"a", "c"});
  CHECK(build_vocabulary(docs, spec).keys() == build_vocabulary(docs, spec).keys());
}

TEST_CASE("vectorize with a training vocabulary") {
  const Corpus train({make_doc("t1", "X", {"a", "b", "a"}), make_doc("t2", "Y", {"c"})});
  const Corpus test({make_doc("q1", "X", {"a", "z", "c", "z"}), make_doc("q2", "Y", {"z", "y"})});
  const auto spec = raw(FeatureKind::token_ngram(1));
  const auto train_docs = all_documents(train);
  const auto vocab = build_vocabulary(train_docs, spec);

  const auto train_m = extract(train_docs, spec);
  const auto again = vectorize(train_docs, vocab, spec);
  CHECK(again.values == train_m.values);
  CHECK(again.columns == train_m.columns);

  const auto test_docs = all_documents(test);
  const auto m = vectorize(test_docs, vocab, spec);
  // Hand-filtered counts: OOV "z" and "y" dropped.
  CHECK(row_as_map(m, 0) == std::map<std::string, double>{{"a", 1}, {"c", 1}});
  CHECK(row_as_map(m, 1).empty());

  // Fold hygiene: every key comes from the training documents.
  for (const auto& key : vocab.keys()) CHECK((key == "a" || key == "b" || key == "c"));

  CHECK(error_code_of([&] { vectorize(test_docs, vocab, raw(FeatureKind::char_ngram(2))); }) ==
        ErrorCode::kKindMismatch);
}

TEST_CASE("triplet and vocabulary CSV round trip") {
  const Corpus corpus({make_doc("d,1", "X", {"a", ",", "a"}), make_doc("d2", "Y", {"q"})});
  const auto m = extract_token_ngrams(corpus, 1);
  const auto vocab = vocabulary_from_csv(vocabulary_to_csv(m.vocabulary));
  CHECK(vocab.keys() == m.vocabulary.keys());
  CHECK(vocab.kind() == m.vocabulary.kind());
  const auto back = matrix_from_triplet_csv(matrix_to_triplet_csv(m), vocab, m.doc_ids);
  CHECK(back.values == m.values);
  CHECK(back.columns == m.columns);
  CHECK(back.row_offsets == m.row_offsets);
}

TEST_CASE("feature kind ids") {
  CHECK(FeatureKind::parse("char:2") == FeatureKind::char_ngram(2));
  CHECK(FeatureKind::parse("token:1").id() == "token:1");
  CHECK(FeatureKind::parse("phrase") == FeatureKind::phrase_pattern());
  CHECK_THROWS_AS(FeatureKind::parse("char:0"), Error);
  CHECK_THROWS_AS(FeatureKind::parse("pos:1"), Error);
}
