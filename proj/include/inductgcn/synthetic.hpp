#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/rng.hpp"

namespace inductgcn {

// A keyword corpus that is separable by construction: every class owns a
// disjoint pool of keywords, and a fixed share of each document is drawn from
// a noise pool shared by all classes.
struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t keywords_per_class = 20;
  std::size_t noise_words = 20;
  std::size_t train_docs = 40;
  std::size_t test_docs = 200;
  std::size_t doc_length = 30;
  double noise_fraction = 0.1;
  std::uint64_t seed = 7;
};

inline std::string synthetic_keyword(std::size_t cls, std::size_t k) {
  return "c" + std::to_string(cls) + "kw" + std::to_string(k);
}

inline std::string synthetic_noise_word(std::size_t k) { return "noise" + std::to_string(k); }

inline Corpus make_keyword_corpus(const SyntheticSpec &spec) {
  if (spec.classes == 0 || spec.keywords_per_class == 0 || spec.doc_length == 0) {
    throw ConfigError("synthetic corpus dimensions must be positive");
  }
  Rng rng(spec.seed);
  Corpus corpus;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    corpus.labels.push_back("class" + std::to_string(c));
  }
  const auto n_noise = spec.noise_words == 0
                           ? std::size_t{0}
                           : static_cast<std::size_t>(std::lround(spec.noise_fraction * static_cast<double>(spec.doc_length)));

  const auto make_doc = [&](std::size_t id, Split split) {
    const std::size_t cls = id % spec.classes;
    Document d{id, {}, corpus.labels[cls], split};
    for (std::size_t i = 0; i < spec.doc_length; ++i) {
      d.tokens.push_back(synthetic_keyword(cls, rng.uniform_index(spec.keywords_per_class)));
    }
    // Overwrite distinct random positions with noise words.
    std::vector<std::size_t> positions(spec.doc_length);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      positions[i] = i;
    }
    rng.shuffle(std::span(positions));
    for (std::size_t i = 0; i < n_noise; ++i) {
      d.tokens[positions[i]] = synthetic_noise_word(rng.uniform_index(spec.noise_words));
    }
    return d;
  };

  std::size_t id = 0;
  for (std::size_t i = 0; i < spec.train_docs; ++i, ++id) {
    corpus.documents.push_back(make_doc(id, Split::train));
  }
  for (std::size_t i = 0; i < spec.test_docs; ++i, ++id) {
    corpus.documents.push_back(make_doc(id, Split::test));
  }
  return corpus;
}

// Writes train/val documents to train_path and test documents to test_path
// in the `label<TAB>text` format.
inline void write_corpus_tsv(const Corpus &corpus, const std::string &train_path, const std::string &test_path) {
  std::ofstream train(train_path);
  std::ofstream test(test_path);
  if (!train || !test) {
    throw Error("cannot write corpus files");
  }
  for (const auto &d : corpus.documents) {
    auto &out = d.split == Split::test ? test : train;
    out << d.label.value_or("") << '\t';
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      out << (i ? " " : "") << d.tokens[i];
    }
    out << '\n';
  }
}

} // namespace inductgcn
