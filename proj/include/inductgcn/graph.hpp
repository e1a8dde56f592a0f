#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/features.hpp"
#include "inductgcn/sparse.hpp"
#include "inductgcn/vocabulary.hpp"

namespace inductgcn {

// Document nodes occupy [0, n_docs), word nodes [n_docs, n_docs + n_words).
struct NodeIndex {
  std::size_t n_docs = 0;
  std::size_t n_words = 0;

  std::size_t total() const { return n_docs + n_words; }
  std::size_t doc_node(std::size_t d) const { return d; }
  std::size_t word_node(std::size_t w) const { return n_docs + w; }
  bool is_word(std::size_t node) const { return node >= n_docs; }

  friend bool operator==(const NodeIndex &, const NodeIndex &) = default;
};

// How node input rows are built.
enum class NodeFeatures {
  // Documents are TF-IDF rows, words are one-hot rows (n x |V_word|).
  tfidf_documents,
  // Every node is its own one-hot row (n x n) for the transductive baseline.
  one_hot_nodes,
};

struct TrainingGraph {
  NodeIndex index;
  CsrMatrix adjacency_raw;
  CsrMatrix adjacency_norm;
  std::vector<double> degrees;
  CsrMatrix features;

  // Per document node: corpus id, class index (-1 when unlabeled), split.
  std::vector<std::size_t> doc_ids;
  std::vector<int> doc_labels;
  std::vector<Split> doc_splits;

  std::size_t word_word_edges = 0;
  std::size_t doc_word_edges = 0;

  std::span<const double> word_degrees() const {
    return std::span(degrees).subspan(index.n_docs, index.n_words);
  }

  // Undirected edges, self-loops excluded.
  std::size_t edge_count() const { return word_word_edges + doc_word_edges; }

  friend bool operator==(const TrainingGraph &, const TrainingGraph &) = default;
};

// out[i][j] = a[i][j] / sqrt(degrees[i] * degrees[j])
inline CsrMatrix normalize_adjacency(const CsrMatrix &a, std::span<const double> degrees) {
  if (degrees.size() != a.rows() || a.rows() != a.cols()) {
    throw std::invalid_argument("normalize_adjacency: degree vector does not match matrix");
  }
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (!(degrees[i] > 0.0)) {
      throw std::invalid_argument("normalize_adjacency: node " + std::to_string(i) + " has zero degree");
    }
  }
  CsrMatrix out = a;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto cols = out.row_cols(r);
    auto vals = out.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      vals[k] = vals[k] / std::sqrt(degrees[r] * degrees[cols[k]]);
    }
  }
  return out;
}

// Builds a corpus graph over the given documents (in node order) plus every
// vocabulary word. Edges: unit self-loops, word-word PMI above pmi_threshold,
// doc-word TF-IDF; all symmetric.
inline TrainingGraph build_graph(std::span<const Document> docs, std::span<const std::string> labels,
                                 const Vocabulary &vocab, const DocFrequency &dfreq,
                                 const CooccurrenceStats &cooc, double pmi_threshold,
                                 NodeFeatures feature_kind = NodeFeatures::tfidf_documents) {
  TrainingGraph g;
  g.index = {docs.size(), vocab.size()};
  const std::size_t n = g.index.total();

  std::vector<Triplet> edges;
  std::vector<Triplet> feats;
  edges.reserve(n + 2 * cooc.pair_occ.size());
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({i, i, 1.0});
  }

  for (const auto &[key, count] : cooc.pair_occ) {
    const auto i = static_cast<std::size_t>(key >> 32);
    const auto j = static_cast<std::size_t>(key & 0xffffffffu);
    const auto value = pmi(i, j, cooc);
    if (!value || !(*value > pmi_threshold)) {
      continue;
    }
    if (!std::isfinite(*value)) {
      throw NumericError("non-finite PMI between '" + vocab.word(i) + "' and '" + vocab.word(j) + "'");
    }
    edges.push_back({g.index.word_node(i), g.index.word_node(j), *value});
    edges.push_back({g.index.word_node(j), g.index.word_node(i), *value});
    ++g.word_word_edges;
  }

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto &doc = docs[d];
    g.doc_ids.push_back(doc.id);
    g.doc_splits.push_back(doc.split);
    int label = -1;
    if (doc.label) {
      const auto it = std::find(labels.begin(), labels.end(), *doc.label);
      if (it == labels.end()) {
        throw Error("document " + std::to_string(doc.id) + " has unknown label '" + *doc.label + "'");
      }
      label = static_cast<int>(it - labels.begin());
    }
    g.doc_labels.push_back(label);

    for (const auto &[w, value] : tfidf_vector(doc, vocab, dfreq)) {
      if (!std::isfinite(value)) {
        throw NumericError("non-finite TF-IDF for document " + std::to_string(doc.id));
      }
      edges.push_back({g.index.doc_node(d), g.index.word_node(w), value});
      edges.push_back({g.index.word_node(w), g.index.doc_node(d), value});
      ++g.doc_word_edges;
      if (feature_kind == NodeFeatures::tfidf_documents) {
        feats.push_back({g.index.doc_node(d), w, value});
      }
    }
  }

  g.adjacency_raw = CsrMatrix::from_triplets(n, n, std::move(edges));
  g.degrees = g.adjacency_raw.row_sums();
  g.adjacency_norm = normalize_adjacency(g.adjacency_raw, g.degrees);

  if (feature_kind == NodeFeatures::tfidf_documents) {
    for (std::size_t w = 0; w < vocab.size(); ++w) {
      feats.push_back({g.index.word_node(w), w, 1.0});
    }
    g.features = CsrMatrix::from_triplets(n, vocab.size(), std::move(feats));
  } else {
    g.features = CsrMatrix::identity(n);
  }
  return g;
}

// The inductive training graph: training and validation documents plus the
// training vocabulary. Test documents never enter it.
inline TrainingGraph build_training_graph(const Corpus &corpus, const Vocabulary &vocab, const DocFrequency &dfreq,
                                          const CooccurrenceStats &cooc, double pmi_threshold = 0.0) {
  const auto docs = corpus.training_documents();
  return build_graph(docs, corpus.labels, vocab, dfreq, cooc, pmi_threshold, NodeFeatures::tfidf_documents);
}

enum class BatchNormalization {
  // Frozen training word degrees, fresh document degree 1 + sum of TF-IDF.
  symmetric,
  // Raw TF-IDF weights and a unit self-loop.
  none,
};

// Adjacency rows for a batch of unseen documents. Columns [0, n_words) are
// word nodes, columns [n_words, n_words + b) are the batch documents, each of
// which links only to itself in that block.
struct TestBatchSubgraph {
  std::size_t batch_size = 0;
  std::size_t n_words = 0;
  CsrMatrix adjacency;
  CsrMatrix features;
  std::vector<std::size_t> doc_ids;
};

inline TestBatchSubgraph build_test_batch(std::span<const Document> batch, const Vocabulary &vocab,
                                          const DocFrequency &dfreq, std::span<const double> word_degrees,
                                          BatchNormalization mode = BatchNormalization::symmetric) {
  if (word_degrees.size() != vocab.size()) {
    throw Error("word degree table has " + std::to_string(word_degrees.size()) + " entries, vocabulary has " +
                std::to_string(vocab.size()));
  }
  TestBatchSubgraph out;
  out.batch_size = batch.size();
  out.n_words = vocab.size();
  const std::size_t b = batch.size();
  const std::size_t v = vocab.size();

  std::vector<Triplet> adj;
  std::vector<Triplet> feats;
  for (std::size_t d = 0; d < b; ++d) {
    out.doc_ids.push_back(batch[d].id);
    const auto row = tfidf_vector(batch[d], vocab, dfreq);
    double degree = 1.0;
    for (const auto &[w, value] : row) {
      degree += value;
    }
    for (const auto &[w, value] : row) {
      const double weight =
          mode == BatchNormalization::symmetric ? value / std::sqrt(degree * word_degrees[w]) : value;
      adj.push_back({d, w, weight});
      feats.push_back({d, w, value});
    }
    const double self = mode == BatchNormalization::symmetric ? 1.0 / std::sqrt(degree * degree) : 1.0;
    adj.push_back({d, v + d, self});
  }
  out.adjacency = CsrMatrix::from_triplets(b, v + b, std::move(adj));
  out.features = CsrMatrix::from_triplets(b, v, std::move(feats));
  return out;
}

inline TestBatchSubgraph build_test_batch(std::span<const Document> batch, const Vocabulary &vocab,
                                          const DocFrequency &dfreq, const TrainingGraph &train_graph,
                                          BatchNormalization mode = BatchNormalization::symmetric) {
  return build_test_batch(batch, vocab, dfreq, train_graph.word_degrees(), mode);
}

// Writes `<prefix>.edges.tsv` (src, dst, weight for each undirected edge and
// self-loop of the raw adjacency, src <= dst) and `<prefix>.nodes.tsv`
// (node index, kind, document id or word).
inline void dump_graph(const TrainingGraph &g, const Vocabulary &vocab, const std::string &prefix) {
  std::ofstream edges(prefix + ".edges.tsv");
  std::ofstream nodes(prefix + ".nodes.tsv");
  if (!edges || !nodes) {
    throw Error("cannot write graph dump at " + prefix);
  }
  edges.precision(17);
  for (std::size_t r = 0; r < g.adjacency_raw.rows(); ++r) {
    const auto cols = g.adjacency_raw.row_cols(r);
    const auto vals = g.adjacency_raw.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] >= r) {
        edges << r << '\t' << cols[k] << '\t' << vals[k] << '\n';
      }
    }
  }
  for (std::size_t d = 0; d < g.index.n_docs; ++d) {
    nodes << d << "\tdoc\t" << g.doc_ids[d] << '\n';
  }
  for (std::size_t w = 0; w < g.index.n_words; ++w) {
    nodes << g.index.word_node(w) << "\tword\t" << vocab.word(w) << '\n';
  }
}

} // namespace inductgcn
