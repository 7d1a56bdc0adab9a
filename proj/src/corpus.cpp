#include "authorship/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace authorship {

using nlohmann::json;

Corpus::Corpus(std::vector<AnnotatedDocument> documents) : documents_(std::move(documents)) {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (doc.doc_id.empty()) throw Error(ErrorCode::kMalformedRecord, "empty doc_id");
    if (doc.author.empty()) throw Error(ErrorCode::kMalformedRecord, "empty author in " + doc.doc_id);
    if (doc.tokens.empty()) throw Error(ErrorCode::kMalformedRecord, "no tokens in " + doc.doc_id);
    for (const auto& tok : doc.tokens) {
      if (tok.surface.empty()) throw Error(ErrorCode::kMalformedRecord, "empty surface in " + doc.doc_id);
    }
    if (doc.phrase_annotated && !doc.tokens.front().phrase_start) {
      throw Error(ErrorCode::kMalformedRecord, "first token of " + doc.doc_id + " must start a phrase");
    }
    if (!index_by_id_.emplace(doc.doc_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate doc_id " + doc.doc_id);
    }
    labels.insert(doc.author);
  }
  labels_.assign(labels.begin(), labels.end());
}

std::size_t Corpus::label_index(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) throw Error(ErrorCode::kUnknownLabel, label);
  return static_cast<std::size_t>(it - labels_.begin());
}

const AnnotatedDocument& Corpus::find(const std::string& doc_id) const {
  auto it = index_by_id_.find(doc_id);
  if (it == index_by_id_.end()) throw Error(ErrorCode::kDocMismatch, "unknown doc_id " + doc_id);
  return documents_[it->second];
}

std::vector<const AnnotatedDocument*> Corpus::select(const std::vector<std::string>& doc_ids) const {
  std::vector<const AnnotatedDocument*> out;
  out.reserve(doc_ids.size());
  for (const auto& id : doc_ids) out.push_back(&find(id));
  return out;
}

std::map<std::string, std::size_t> Corpus::author_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents_) ++counts[doc.author];
  return counts;
}

namespace {

AnnotatedDocument parse_record(const json& rec, std::size_t line_no) {
  const auto where = " (line " + std::to_string(line_no) + ")";
  if (!rec.is_object()) throw Error(ErrorCode::kMalformedRecord, "record is not an object" + where);
  auto get_string = [&](const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string()) {
      throw Error(ErrorCode::kMalformedRecord, std::string("missing string field '") + key + "'" + where);
    }
    return it->get<std::string>();
  };
  AnnotatedDocument doc;
  doc.doc_id = get_string("doc_id");
  doc.author = get_string("author");
  auto toks = rec.find("tokens");
  if (toks == rec.end() || !toks->is_array() || toks->empty()) {
    throw Error(ErrorCode::kMalformedRecord, "missing or empty 'tokens'" + where);
  }
  doc.tokens.reserve(toks->size());
  for (const auto& t : *toks) {
    if (!t.is_object()) throw Error(ErrorCode::kMalformedRecord, "token is not an object" + where);
    AnnotatedToken tok;
    auto s = t.find("s");
    if (s == t.end() || !s->is_string() || s->get_ref<const std::string&>().empty()) {
      throw Error(ErrorCode::kMalformedRecord, "token without surface" + where);
    }
    tok.surface = s->get<std::string>();
    if (auto p = t.find("p"); p != t.end() && !p->is_null()) {
      if (!p->is_string()) throw Error(ErrorCode::kMalformedRecord, "non-string pos" + where);
      tok.pos = p->get<std::string>();
    }
    if (auto b = t.find("b"); b != t.end() && !b->is_null()) {
      if (!b->is_boolean()) throw Error(ErrorCode::kMalformedRecord, "non-boolean phrase flag" + where);
      tok.phrase_start = b->get<bool>();
      doc.phrase_annotated = true;
    }
    doc.tokens.push_back(std::move(tok));
  }
  return doc;
}

}  // namespace

Corpus parse_corpus_jsonl(const std::string& text) {
  std::vector<AnnotatedDocument> docs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
    docs.push_back(parse_record(rec, line_no));
  }
  if (docs.empty()) throw Error(ErrorCode::kEmptyInput, "corpus has no documents");
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::kJsonl: return parse_corpus_jsonl(read_file(path));
  }
  throw Error(ErrorCode::kInvalidArgument, "unsupported corpus format");
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents()) {
    json toks = json::array();
    for (const auto& t : doc.tokens) {
      json j = {{"s", t.surface}, {"p", t.pos ? json(*t.pos) : json(nullptr)}};
      if (doc.phrase_annotated) j["b"] = t.phrase_start;
      toks.push_back(std::move(j));
    }
    json rec = {{"doc_id", doc.doc_id}, {"author", doc.author}, {"tokens", std::move(toks)}};
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

AnnotatedDocument truncate(const AnnotatedDocument& doc, std::size_t limit) {
  if (limit == 0) throw Error(ErrorCode::kInvalidArgument, "truncation limit must be >= 1");
  AnnotatedDocument out = doc;
  if (out.tokens.size() > limit) out.tokens.resize(limit);
  return out;
}

Corpus truncate(const Corpus& corpus, std::size_t limit) {
  std::vector<AnnotatedDocument> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) docs.push_back(truncate(doc, limit));
  return Corpus(std::move(docs));
}

FoldPlan make_fold_plan(const Corpus& corpus, std::size_t num_folds, const SplitRatios& ratios,
                        std::uint64_t seed) {
  if (num_folds == 0) throw Error(ErrorCode::kInvalidArgument, "num_folds must be >= 1");
  const std::size_t per_author = ratios.train + ratios.validation + ratios.test;
  const std::size_t rotated = num_folds * (ratios.validation + ratios.test);
  if (rotated > per_author) {
    throw Error(ErrorCode::kIndivisibleCorpus,
                std::to_string(num_folds) + " folds need " + std::to_string(rotated) +
                    " held-out documents per author but ratios cover only " + std::to_string(per_author));
  }

  std::map<std::string, std::vector<std::string>> by_author;
  for (const auto& doc : corpus.documents()) by_author[doc.author].push_back(doc.doc_id);

  FoldPlan plan;
  plan.num_folds = num_folds;
  plan.folds.resize(num_folds);
  for (auto& [author, ids] : by_author) {
    if (ids.size() != per_author) {
      throw Error(ErrorCode::kIndivisibleCorpus, "author " + author + " has " + std::to_string(ids.size()) +
                                                     " documents, ratios require " + std::to_string(per_author));
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, "fold-plan:" + author));
    rng.shuffle(ids);
    for (std::size_t f = 0; f < num_folds; ++f) {
      const std::size_t val_begin = f * (ratios.validation + ratios.test);
      const std::size_t test_begin = val_begin + ratios.validation;
      const std::size_t test_end = test_begin + ratios.test;
      auto& fold = plan.folds[f];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i >= val_begin && i < test_begin) {
          fold.validation.push_back(ids[i]);
        } else if (i >= test_begin && i < test_end) {
          fold.test.push_back(ids[i]);
        } else {
          fold.train.push_back(ids[i]);
        }
      }
    }
  }
  for (auto& fold : plan.folds) {
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.validation.begin(), fold.validation.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

std::string fold_plan_to_json(const FoldPlan& plan) {
  json folds = json::array();
  for (const auto& f : plan.folds) {
    folds.push_back({{"train", f.train}, {"validation", f.validation}, {"test", f.test}});
  }
  json j = {{"num_folds", plan.num_folds}, {"folds", std::move(folds)}};
  return j.dump(1) + "\n";
}

FoldPlan fold_plan_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    FoldPlan plan;
    plan.num_folds = j.at("num_folds").get<std::size_t>();
    for (const auto& f : j.at("folds")) {
      plan.folds.push_back({f.at("train").get<std::vector<std::string>>(),
                            f.at("validation").get<std::vector<std::string>>(),
                            f.at("test").get<std::vector<std::string>>()});
    }
    if (plan.folds.size() != plan.num_folds) {
      throw Error(ErrorCode::kMalformedRecord, "fold count does not match num_folds");
    }
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("fold plan: ") + e.what());
  }
}

}  // namespace authorship
