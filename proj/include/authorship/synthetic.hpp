#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "authorship/corpus.hpp"
#include "authorship/prediction.hpp"

namespace authorship {

struct PosTagset {
  std::vector<std::string> content{"noun", "verb", "adverb"};
  std::string particle = "particle";
  std::string adjective = "adjective";
  std::string conjunction = "conjunction";
  std::string punctuation = "punctuation";
};

struct SyntheticCorpusSpec {
  std::size_t num_authors = 10;
  std::size_t docs_per_author = 20;
  std::size_t tokens_per_doc = 510;
  // Spread of the per-author log-multiplicative perturbation applied to the
  // shared word distributions. 0 makes every author identical.
  double divergence = 1.0;
  PosTagset tagset;
  std::size_t content_vocabulary = 800;
  std::size_t particle_vocabulary = 14;
  std::size_t adjective_vocabulary = 60;
  std::size_t conjunction_vocabulary = 10;
  // Particles per phrase are drawn from 0..max_particles, with author-level
  // preferences.
  std::size_t max_particles = 2;
  double adjective_rate = 0.15;
  double conjunction_rate = 0.05;
  double punctuation_rate = 0.2;
  std::uint64_t seed = 1;
};

Corpus gen_synthetic(const SyntheticCorpusSpec& spec);

// Stand-in for an externally fine-tuned model: softmax of a noisy logit
// vector whose true-class entry is raised by `signal`. Each document's row
// depends only on (seed, model_id, doc_id), so validation and test exports
// are reproducible independently.
struct StubPlmSpec {
  std::string model_id;
  double signal = 2.0;
  double noise = 1.0;
  std::uint64_t seed = 1;
};

PredictionMatrix stub_plm_predictions(const StubPlmSpec& spec, const Corpus& corpus,
                                      const std::vector<std::string>& doc_ids);

}  // namespace authorship
