#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/graph.hpp"
#include "inductgcn/model.hpp"
#include "inductgcn/sparse.hpp"

namespace inductgcn {

struct Prediction {
  std::size_t doc_id = 0;
  std::size_t label = 0;
  std::string label_name;
  std::vector<double> probabilities;
  std::vector<double> logits;

  friend bool operator==(const Prediction &, const Prediction &) = default;
};

namespace detail {

// rows of A_B times the stacked matrix [top; bottom], where top holds the
// word-node rows and bottom the batch-document rows.
inline DenseMatrix propagate_batch(const CsrMatrix &adjacency, const DenseMatrix &top, const DenseMatrix &bottom) {
  const std::size_t n_top = top.rows();
  DenseMatrix out(adjacency.rows(), top.cols());
  for (std::size_t r = 0; r < adjacency.rows(); ++r) {
    auto dst = out.row(r);
    const auto cols = adjacency.row_cols(r);
    const auto vals = adjacency.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto src = cols[k] < n_top ? top.row(cols[k]) : bottom.row(cols[k] - n_top);
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] += vals[k] * src[j];
      }
    }
  }
  return out;
}

inline std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

// Word-node input to the second layer, already multiplied by W1 for gcn.
inline DenseMatrix second_layer_words(const TrainedModel &model) {
  return model.params.kind == ModelKind::gcn ? matmul(model.h1_word, model.params.w1) : model.h1_word;
}

inline std::vector<Prediction> predict_batch(const TrainedModel &model, const TestBatchSubgraph &batch,
                                             const DenseMatrix &word_rows_2) {
  const std::size_t v = model.vocab.size();
  const std::size_t b = batch.batch_size;
  if (batch.n_words != v || batch.adjacency.cols() != v + b || batch.adjacency.rows() != b ||
      batch.features.cols() != model.params.input_dim() || model.h1_word.rows() != v) {
    throw Error("test batch was built against a different vocabulary (" + std::to_string(batch.n_words) +
                " words) than the model (" + std::to_string(v) + " words); rebuild the batch or reload the checkpoint");
  }
  const auto &params = model.params;

  // Layer 1: word rows are one-hot, so their contribution is W0 itself.
  DenseMatrix h1 = propagate_batch(batch.adjacency, params.w0, spmm(batch.features, params.w0));
  if (params.kind == ModelKind::gcn) {
    for (double &x : h1.values()) {
      x = std::max(x, 0.0);
    }
  }
  detail::require_finite(h1, "inference layer 1");

  // Layer 2 reuses the cached word representations from training.
  DenseMatrix logits = propagate_batch(batch.adjacency, word_rows_2,
                                       params.kind == ModelKind::gcn ? matmul(h1, params.w1) : h1);
  detail::require_finite(logits, "inference layer 2");
  DenseMatrix probs = logits;
  softmax_rows(probs);

  std::vector<Prediction> out;
  out.reserve(b);
  for (std::size_t r = 0; r < b; ++r) {
    const auto row = probs.row(r);
    Prediction p;
    p.doc_id = batch.doc_ids[r];
    p.label = argmax(row);
    p.label_name = model.labels.at(p.label);
    p.probabilities.assign(row.begin(), row.end());
    p.logits.assign(logits.row(r).begin(), logits.row(r).end());
    out.push_back(std::move(p));
  }
  return out;
}

} // namespace detail

// One-directional propagation into the batch documents only; the training
// graph is never touched. Ties in argmax go to the lowest class index.
inline std::vector<Prediction> predict_batch(const TrainedModel &model, const TestBatchSubgraph &batch) {
  return detail::predict_batch(model, batch, detail::second_layer_words(model));
}

inline TestBatchSubgraph build_test_batch(std::span<const Document> batch, const TrainedModel &model) {
  return build_test_batch(batch, model.vocab, model.dfreq, model.word_degrees, model.batch_normalization);
}

inline std::vector<Prediction> predict_documents(const TrainedModel &model, std::span<const Document> docs,
                                                 std::size_t batch_size = 64) {
  if (batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  const auto word_rows_2 = detail::second_layer_words(model);
  std::vector<Prediction> out;
  out.reserve(docs.size());
  for (std::size_t start = 0; start < docs.size(); start += batch_size) {
    const auto chunk = docs.subspan(start, std::min(batch_size, docs.size() - start));
    auto preds = detail::predict_batch(model, build_test_batch(chunk, model), word_rows_2);
    out.insert(out.end(), std::make_move_iterator(preds.begin()), std::make_move_iterator(preds.end()));
  }
  return out;
}

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<Prediction> predictions;
};

inline Evaluation evaluate(const TrainedModel &model, std::span<const Document> test_docs,
                           std::size_t batch_size = 64) {
  if (test_docs.empty()) {
    throw Error("evaluate: test set is empty");
  }
  std::vector<std::size_t> truth;
  truth.reserve(test_docs.size());
  for (const auto &d : test_docs) {
    if (!d.label) {
      throw Error("evaluate: document " + std::to_string(d.id) + " has no label");
    }
    const auto it = std::find(model.labels.begin(), model.labels.end(), *d.label);
    if (it == model.labels.end()) {
      throw Error("evaluate: label '" + *d.label + "' is unknown to the model");
    }
    truth.push_back(static_cast<std::size_t>(it - model.labels.begin()));
  }
  Evaluation e;
  e.predictions = predict_documents(model, test_docs, batch_size);
  e.total = test_docs.size();
  for (std::size_t i = 0; i < e.total; ++i) {
    e.correct += e.predictions[i].label == truth[i] ? 1 : 0;
  }
  e.accuracy = static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

inline Evaluation evaluate(const TrainedModel &model, const Corpus &corpus, std::size_t batch_size = 64) {
  const auto docs = corpus.test_documents();
  return evaluate(model, docs, batch_size);
}

} // namespace inductgcn
