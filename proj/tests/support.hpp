#pragma once

// Shared fixtures and brute-force oracles for the test suites. The oracles
// deliberately use dense loops and explicit window sets so they stay
// independent of the sparse code paths they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "inductgcn/inductgcn.hpp"

namespace testing_support {

using namespace inductgcn;

inline std::vector<std::string> words(const std::string &text) { return tokenize(text); }

// The two-document corpus "word1 word1 word2 word3" / "word3 word4".
inline Corpus toy_corpus() {
  Corpus c;
  c.labels = {"a", "b"};
  c.documents.push_back({0, words("word1 word1 word2 word3"), "a", Split::train});
  c.documents.push_back({1, words("word3 word4"), "b", Split::train});
  return c;
}

struct Pipeline {
  Corpus corpus;
  Vocabulary vocab;
  DocFrequency dfreq;
  CooccurrenceStats cooc;
  TrainingGraph graph;
};

inline Pipeline build_pipeline(const Corpus &raw, std::size_t min_freq = 1, std::size_t window = 20) {
  PreprocessConfig cfg;
  cfg.min_train_frequency = min_freq;
  auto pre = preprocess(raw, cfg);
  Pipeline p;
  p.corpus = std::move(pre.corpus);
  p.vocab = std::move(pre.vocab);
  const auto train_docs = p.corpus.training_documents();
  p.dfreq = compute_doc_frequency(train_docs, p.vocab);
  p.cooc = compute_cooccurrence(train_docs, p.vocab, window);
  p.graph = build_training_graph(p.corpus, p.vocab, p.dfreq, p.cooc);
  return p;
}

// Small synthetic corpus with both train and val documents.
inline Corpus small_synthetic(std::size_t train_docs, std::size_t test_docs, std::uint64_t seed = 3,
                              std::size_t classes = 2) {
  SyntheticSpec spec;
  spec.classes = classes;
  spec.train_docs = train_docs;
  spec.test_docs = test_docs;
  spec.keywords_per_class = 8;
  spec.noise_words = 6;
  spec.doc_length = 12;
  spec.seed = seed;
  return make_keyword_corpus(spec);
}

// Random symmetric normalized graph with self-loops plus random features.
struct ToyProblem {
  CsrMatrix adj;
  CsrMatrix features;
  std::vector<int> labels;
  std::vector<std::size_t> mask;
};

inline ToyProblem toy_problem(std::uint64_t seed, std::size_t n = 9, std::size_t dim = 5, std::size_t classes = 3) {
  Rng rng(seed);
  std::vector<Triplet> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({i, i, 1.0});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.35) {
        const double w = rng.uniform(0.1, 2.0);
        edges.push_back({i, j, w});
        edges.push_back({j, i, w});
      }
    }
  }
  const auto raw = CsrMatrix::from_triplets(n, n, edges);
  ToyProblem t;
  t.adj = normalize_adjacency(raw, raw.row_sums());
  std::vector<Triplet> feats;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (rng.uniform() < 0.6) feats.push_back({i, j, rng.uniform(0.0, 1.5)});
    }
  }
  t.features = CsrMatrix::from_triplets(n, dim, feats);
  for (std::size_t i = 0; i < n; ++i) {
    t.labels.push_back(i < 6 ? static_cast<int>(rng.uniform_index(classes)) : -1);
    if (i < 6) t.mask.push_back(i);
  }
  return t;
}

// ----------------------------------------------------------------- oracles

inline DenseMatrix dense_mul(const DenseMatrix &a, const DenseMatrix &b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(k, j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

inline DenseMatrix dense_softmax(DenseMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double peak = -1e300;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      peak = std::max(peak, m(i, j));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      total += std::exp(m(i, j) - peak);
    }
    for (std::size_t j = 0; j < m.cols(); ++j) {
      m(i, j) = std::exp(m(i, j) - peak) / total;
    }
  }
  return m;
}

// Z = softmax(A relu(A X W0) W1) computed with dense triple loops.
inline DenseMatrix dense_gcn(const DenseMatrix &a, const DenseMatrix &x, const DenseMatrix &w0,
                             const DenseMatrix &w1) {
  auto h = dense_mul(dense_mul(a, x), w0);
  for (double &v : h.values()) {
    v = std::max(0.0, v);
  }
  return dense_softmax(dense_mul(dense_mul(a, h), w1));
}

// Z = softmax(A A X W)
inline DenseMatrix dense_sgc(const DenseMatrix &a, const DenseMatrix &x, const DenseMatrix &w) {
  return dense_softmax(dense_mul(dense_mul(a, dense_mul(a, x)), w));
}

// Co-occurrence statistics from explicitly materialized window sets.
struct WindowOracle {
  std::size_t n_windows = 0;
  std::vector<std::size_t> occ;
  std::vector<std::vector<std::size_t>> pair;
};

inline WindowOracle window_oracle(const std::vector<std::vector<std::size_t>> &docs, std::size_t vocab_size,
                                  std::size_t window) {
  std::vector<std::set<std::size_t>> windows;
  for (const auto &doc : docs) {
    if (doc.empty()) {
      continue;
    }
    if (doc.size() <= window) {
      windows.emplace_back(doc.begin(), doc.end());
      continue;
    }
    for (std::size_t s = 0; s + window <= doc.size(); ++s) {
      windows.emplace_back(doc.begin() + static_cast<std::ptrdiff_t>(s),
                           doc.begin() + static_cast<std::ptrdiff_t>(s + window));
    }
  }
  WindowOracle o;
  o.n_windows = windows.size();
  o.occ.assign(vocab_size, 0);
  o.pair.assign(vocab_size, std::vector<std::size_t>(vocab_size, 0));
  for (const auto &w : windows) {
    for (auto i : w) {
      ++o.occ[i];
      for (auto j : w) {
        if (i != j) {
          ++o.pair[i][j];
        }
      }
    }
  }
  return o;
}

} // namespace testing_support
