#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/vocabulary.hpp"

namespace inductgcn {

struct DocFrequency {
  std::vector<std::size_t> df;
  std::size_t n_train = 0;

  // ln(n_train / df); 0 for a word present in every training document.
  double idf(std::size_t word) const {
    return std::log(static_cast<double>(n_train) / static_cast<double>(df[word]));
  }

  friend bool operator==(const DocFrequency &, const DocFrequency &) = default;
};

inline DocFrequency compute_doc_frequency(std::span<const Document> train_docs, const Vocabulary &vocab) {
  DocFrequency out;
  out.df.assign(vocab.size(), 0);
  out.n_train = train_docs.size();
  std::vector<std::size_t> last_doc(vocab.size(), SIZE_MAX);
  for (std::size_t d = 0; d < train_docs.size(); ++d) {
    for (const auto &t : train_docs[d].tokens) {
      if (auto w = vocab.find(t); w && last_doc[*w] != d) {
        last_doc[*w] = d;
        ++out.df[*w];
      }
    }
  }
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    if (out.df[w] == 0) {
      throw Error("internal: vocabulary word '" + vocab.word(w) + "' occurs in no training document");
    }
  }
  return out;
}

// Sorted (word index, value) pairs; absent words are structural zeros.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

// Raw term count times ln(n_train / df). Zero-weight entries are omitted.
inline SparseVector tfidf_vector(const Document &doc, const Vocabulary &vocab, const DocFrequency &dfreq) {
  std::unordered_map<std::size_t, std::size_t> tf;
  for (const auto &t : doc.tokens) {
    if (auto w = vocab.find(t)) {
      ++tf[*w];
    }
  }
  SparseVector out;
  out.reserve(tf.size());
  for (const auto &[w, count] : tf) {
    const double value = static_cast<double>(count) * dfreq.idf(w);
    if (value != 0.0) {
      out.emplace_back(w, value);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CooccurrenceStats {
  std::size_t window_size = 0;
  std::size_t n_windows = 0;
  std::vector<std::size_t> occ;
  // Keyed by pair_key(i, j) with i < j.
  std::unordered_map<std::uint64_t, std::size_t> pair_occ;

  static std::uint64_t pair_key(std::size_t i, std::size_t j) {
    if (i > j) {
      std::swap(i, j);
    }
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
  }

  std::size_t pair_count(std::size_t i, std::size_t j) const {
    const auto it = pair_occ.find(pair_key(i, j));
    return it == pair_occ.end() ? 0 : it->second;
  }
};

// Slides a window of window_size tokens with stride 1 over each document. A
// document shorter than the window contributes one window holding the whole
// document; an empty document contributes none. Occurrence counts are binary
// per window.
inline CooccurrenceStats compute_cooccurrence(std::span<const Document> train_docs, const Vocabulary &vocab,
                                              std::size_t window_size) {
  if (window_size < 1) {
    throw ConfigError("PMI window size must be >= 1");
  }
  if (vocab.size() >= (std::size_t{1} << 32)) {
    throw Error("vocabulary too large for co-occurrence keys");
  }
  CooccurrenceStats stats;
  stats.window_size = window_size;
  stats.occ.assign(vocab.size(), 0);

  std::vector<std::size_t> distinct;
  std::vector<std::size_t> stamp(vocab.size(), SIZE_MAX);
  std::size_t window_id = 0;
  for (const auto &doc : train_docs) {
    const auto ids = vocab.encode(doc.tokens);
    if (ids.empty()) {
      continue;
    }
    const std::size_t span = std::min(window_size, ids.size());
    const std::size_t n_windows = ids.size() - span + 1;
    for (std::size_t start = 0; start < n_windows; ++start, ++window_id) {
      distinct.clear();
      for (std::size_t k = start; k < start + span; ++k) {
        if (stamp[ids[k]] != window_id) {
          stamp[ids[k]] = window_id;
          distinct.push_back(ids[k]);
        }
      }
      for (std::size_t a = 0; a < distinct.size(); ++a) {
        ++stats.occ[distinct[a]];
        for (std::size_t b = a + 1; b < distinct.size(); ++b) {
          ++stats.pair_occ[CooccurrenceStats::pair_key(distinct[a], distinct[b])];
        }
      }
    }
    stats.n_windows += n_windows;
  }
  return stats;
}

// ln(p(i,j) / (p(i) p(j))) with probabilities estimated from window counts;
// nullopt when the pair never co-occurs.
inline std::optional<double> pmi(std::size_t i, std::size_t j, const CooccurrenceStats &stats) {
  if (i == j) {
    throw std::invalid_argument("pmi: self pairs are not defined");
  }
  const std::size_t joint = stats.pair_count(i, j);
  if (joint == 0) {
    return std::nullopt;
  }
  const double windows = static_cast<double>(stats.n_windows);
  const double p_ij = static_cast<double>(joint) / windows;
  const double p_i = static_cast<double>(stats.occ[i]) / windows;
  const double p_j = static_cast<double>(stats.occ[j]) / windows;
  return std::log(p_ij / (p_i * p_j));
}

} // namespace inductgcn
