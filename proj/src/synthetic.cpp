#include "authorship/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "authorship/common.hpp"
#include "authorship/ensemble.hpp"

namespace authorship {

namespace {

const std::vector<std::string> kSyllables{
    "あ", "い", "う", "え", "お", "か", "き", "く", "け", "こ", "さ", "し", "す", "せ", "そ", "た",
    "ち", "つ", "て", "と", "な", "に", "ぬ", "ね", "の", "は", "ひ", "ふ", "へ", "ほ", "ま", "み",
    "む", "め", "も", "や", "ゆ", "よ", "ら", "り", "る", "れ", "ろ", "わ", "が", "ぎ", "ぐ", "げ",
    "ご", "ざ", "じ", "ず", "ぜ", "ぞ", "だ", "で", "ど", "ば", "び", "ぶ", "べ", "ぼ", "ぱ", "ぴ"};

const std::vector<std::string> kParticles{"は", "が", "を", "に", "で", "と", "の", "へ",
                                          "も", "や", "から", "まで", "より", "だけ"};

class Categorical {
 public:
  explicit Categorical(const std::vector<double>& weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) cumulative_.push_back(total += w);
  }
  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

std::vector<double> zipf(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
  return w;
}

std::vector<double> perturb(const std::vector<double>& base, double divergence, Rng& rng) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] * std::exp(divergence * rng.normal());
  return out;
}

double perturb_rate(double rate, double divergence, Rng& rng) {
  return std::clamp(rate * std::exp(0.3 * divergence * rng.normal()), 0.0, 0.95);
}

struct Lexicon {
  std::vector<std::string> content, particles, adjectives, conjunctions;
};

Lexicon make_lexicon(const SyntheticCorpusSpec& spec, Rng& rng) {
  std::set<std::string> used;
  auto fresh = [&](std::size_t min_len, std::size_t max_len, const std::string& suffix) {
    while (true) {
      std::string w;
      const std::size_t len = min_len + rng.below(max_len - min_len + 1);
      for (std::size_t i = 0; i < len; ++i) w += kSyllables[rng.below(kSyllables.size())];
      w += suffix;
      if (used.insert(w).second) return w;
    }
  };
  Lexicon lex;
  for (std::size_t i = 0; i < spec.particle_vocabulary; ++i) {
    if (i < kParticles.size()) {
      lex.particles.push_back(kParticles[i]);
      used.insert(kParticles[i]);
    } else {
      lex.particles.push_back(fresh(1, 1, "っ"));
    }
  }
  for (std::size_t i = 0; i < spec.content_vocabulary; ++i) lex.content.push_back(fresh(2, 4, ""));
  for (std::size_t i = 0; i < spec.adjective_vocabulary; ++i) lex.adjectives.push_back(fresh(1, 3, "い"));
  for (std::size_t i = 0; i < spec.conjunction_vocabulary; ++i) lex.conjunctions.push_back(fresh(2, 3, "ど"));
  return lex;
}

struct AuthorModel {
  Categorical content, particles, adjectives, conjunctions, particle_count;
  double adjective_rate, conjunction_rate, punctuation_rate, full_stop_share;
};

std::string author_label(std::size_t a, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n - 1).size());
  std::string digits = std::to_string(a);
  return "author" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

Corpus gen_synthetic(const SyntheticCorpusSpec& spec) {
  if (spec.num_authors < 1 || spec.docs_per_author < 1 || spec.tokens_per_doc < 1 || spec.content_vocabulary < 1 ||
      spec.particle_vocabulary < 1 || spec.adjective_vocabulary < 1 || spec.conjunction_vocabulary < 1 ||
      spec.tagset.content.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus counts must be at least 1");
  }
  if (!(spec.divergence >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "divergence must be non-negative");

  Rng lexicon_rng(derive_seed(spec.seed, "lexicon"));
  const Lexicon lex = make_lexicon(spec, lexicon_rng);
  const auto content_base = zipf(lex.content.size(), 1.0);
  const auto particle_base = zipf(lex.particles.size(), 0.8);
  const auto adjective_base = zipf(lex.adjectives.size(), 1.0);
  const auto conjunction_base = zipf(lex.conjunctions.size(), 0.8);
  std::vector<double> count_base(spec.max_particles + 1);
  for (std::size_t k = 0; k <= spec.max_particles; ++k) count_base[k] = k == 1 ? 2.0 : 1.0;

  std::vector<AnnotatedDocument> docs;
  for (std::size_t a = 0; a < spec.num_authors; ++a) {
    const std::string author = author_label(a, spec.num_authors);
    Rng arng(derive_seed(spec.seed, "author:" + author));
    const double d = spec.divergence;
    const AuthorModel model{Categorical(perturb(content_base, d, arng)),
                            Categorical(perturb(particle_base, d, arng)),
                            Categorical(perturb(adjective_base, d, arng)),
                            Categorical(perturb(conjunction_base, d, arng)),
                            Categorical(perturb(count_base, d, arng)),
                            perturb_rate(spec.adjective_rate, d, arng),
                            perturb_rate(spec.conjunction_rate, d, arng),
                            perturb_rate(spec.punctuation_rate, d, arng),
                            perturb_rate(0.6, d, arng)};

    for (std::size_t k = 0; k < spec.docs_per_author; ++k) {
      std::string num = std::to_string(k);
      if (num.size() < 2) num.insert(0, "0");
      AnnotatedDocument doc{author + "_" + num, author, {}, true};
      Rng rng(derive_seed(spec.seed, "doc:" + doc.doc_id));
      auto emit = [&](const std::string& surface, const std::string& pos, bool start) {
        doc.tokens.push_back({surface, pos, start});
      };
      while (doc.tokens.size() < spec.tokens_per_doc) {
        if (rng.uniform() < model.conjunction_rate) {
          emit(lex.conjunctions[model.conjunctions.sample(rng)], spec.tagset.conjunction, true);
          emit("、", spec.tagset.punctuation, false);
          continue;
        }
        bool start = true;
        if (rng.uniform() < model.adjective_rate) {
          emit(lex.adjectives[model.adjectives.sample(rng)], spec.tagset.adjective, true);
          start = false;
        }
        const std::size_t w = model.content.sample(rng);
        emit(lex.content[w], spec.tagset.content[w % spec.tagset.content.size()], start);
        const std::size_t particles = model.particle_count.sample(rng);
        for (std::size_t p = 0; p < particles; ++p) {
          emit(lex.particles[model.particles.sample(rng)], spec.tagset.particle, false);
        }
        if (rng.uniform() < model.punctuation_rate) {
          emit(rng.uniform() < model.full_stop_share ? "。" : "、", spec.tagset.punctuation, false);
        }
      }
      doc.tokens.resize(spec.tokens_per_doc);
      docs.push_back(std::move(doc));
    }
  }
  return Corpus(std::move(docs));
}

PredictionMatrix stub_plm_predictions(const StubPlmSpec& spec, const Corpus& corpus,
                                      const std::vector<std::string>& doc_ids) {
  PredictionMatrix m(doc_ids, corpus.labels());
  std::vector<double> logits(m.cols());
  for (std::size_t r = 0; r < doc_ids.size(); ++r) {
    const std::size_t truth = corpus.label_index(corpus.find(doc_ids[r]).author);
    Rng rng(derive_seed(spec.seed, spec.model_id + "/" + doc_ids[r]));
    for (std::size_t c = 0; c < logits.size(); ++c) logits[c] = spec.noise * rng.normal();
    logits[truth] += spec.signal;
    const auto p = softmax(logits);
    std::copy(p.begin(), p.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace authorship
