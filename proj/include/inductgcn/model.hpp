#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/features.hpp"
#include "inductgcn/graph.hpp"
#include "inductgcn/rng.hpp"
#include "inductgcn/sparse.hpp"
#include "inductgcn/vocabulary.hpp"

namespace inductgcn {

// gcn: Z = softmax(A relu(A X W0) W1)
// sgc: Z = softmax(A (A X W0)), a single linear map after two hops
enum class ModelKind { gcn, sgc };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::gcn ? "gcn" : "sgc"; }

struct ModelParams {
  ModelKind kind = ModelKind::gcn;
  DenseMatrix w0; // input_dim x hidden (gcn) or input_dim x classes (sgc)
  DenseMatrix w1; // hidden x classes (gcn); empty for sgc

  std::size_t input_dim() const { return w0.rows(); }
  std::size_t hidden() const { return kind == ModelKind::gcn ? w0.cols() : 0; }
  std::size_t classes() const { return kind == ModelKind::gcn ? w1.cols() : w0.cols(); }
  std::size_t parameter_count() const { return w0.size() + w1.size(); }

  friend bool operator==(const ModelParams &, const ModelParams &) = default;
};

// Glorot-uniform fill in +-sqrt(6 / (fan_in + fan_out)).
inline void glorot_uniform(DenseMatrix &m, Rng &rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (double &v : m.values()) {
    v = rng.uniform(-bound, bound);
  }
}

inline ModelParams init_params(ModelKind kind, std::size_t input_dim, std::size_t hidden, std::size_t classes,
                               std::uint64_t seed) {
  if (input_dim == 0 || classes == 0 || (kind == ModelKind::gcn && hidden == 0)) {
    throw ConfigError("model dimensions must be positive");
  }
  Rng rng(seed);
  ModelParams p;
  p.kind = kind;
  if (kind == ModelKind::gcn) {
    p.w0 = DenseMatrix(input_dim, hidden);
    p.w1 = DenseMatrix(hidden, classes);
    glorot_uniform(p.w0, rng);
    glorot_uniform(p.w1, rng);
  } else {
    p.w0 = DenseMatrix(input_dim, classes);
    glorot_uniform(p.w0, rng);
  }
  return p;
}

struct ForwardPass {
  DenseMatrix pre1;   // A X W0
  DenseMatrix h1;     // relu(pre1) for gcn, pre1 for sgc
  DenseMatrix logits; // second-layer output before softmax
  DenseMatrix probs;
};

namespace detail {

inline void require_finite(const DenseMatrix &m, const char *where) {
  if (!m.all_finite()) {
    throw NumericError(std::string("non-finite values in ") + where);
  }
}

inline void hadamard(DenseMatrix &m, const DenseMatrix *scale) {
  if (scale == nullptr) {
    return;
  }
  auto dst = m.values();
  const auto src = scale->values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] *= src[i];
  }
}

} // namespace detail

// hidden_scale, when given, is an inverted-dropout mask applied to h1 before
// the second layer.
inline ForwardPass forward(const CsrMatrix &adjacency, const CsrMatrix &features, const ModelParams &params,
                           const DenseMatrix *hidden_scale = nullptr) {
  if (adjacency.rows() != adjacency.cols() || adjacency.cols() != features.rows() ||
      features.cols() != params.input_dim()) {
    throw Error("forward: adjacency " + std::to_string(adjacency.rows()) + "x" + std::to_string(adjacency.cols()) +
                ", features " + std::to_string(features.rows()) + "x" + std::to_string(features.cols()) +
                " and W0 " + std::to_string(params.w0.rows()) + "x" + std::to_string(params.w0.cols()) +
                " are inconsistent");
  }
  ForwardPass f;
  f.pre1 = spmm(adjacency, spmm(features, params.w0));
  f.h1 = f.pre1;
  if (params.kind == ModelKind::gcn) {
    for (double &v : f.h1.values()) {
      v = std::max(v, 0.0);
    }
  }
  detail::require_finite(f.h1, "layer 1");

  DenseMatrix h1_used = f.h1;
  detail::hadamard(h1_used, hidden_scale);
  f.logits = params.kind == ModelKind::gcn ? spmm(adjacency, matmul(h1_used, params.w1)) : spmm(adjacency, h1_used);
  detail::require_finite(f.logits, "layer 2");
  f.probs = f.logits;
  softmax_rows(f.probs);
  return f;
}

inline ForwardPass forward(const TrainingGraph &graph, const ModelParams &params) {
  return forward(graph.adjacency_norm, graph.features, params);
}

inline DenseMatrix sgc_forward(const TrainingGraph &graph, const DenseMatrix &w) {
  ModelParams p;
  p.kind = ModelKind::sgc;
  p.w0 = w;
  return forward(graph, p).probs;
}

inline constexpr double kProbabilityFloor = 1e-12;

struct CrossEntropy {
  double loss = 0.0;
  // Rows whose true-class probability was clamped at kProbabilityFloor.
  std::size_t clamped = 0;
};

inline CrossEntropy cross_entropy(const DenseMatrix &probs, std::span<const int> labels,
                                  std::span<const std::size_t> nodes) {
  if (nodes.empty()) {
    throw Error("cross_entropy: empty node mask");
  }
  CrossEntropy ce;
  for (auto node : nodes) {
    const int y = labels[node];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw Error("cross_entropy: node " + std::to_string(node) + " has no valid label");
    }
    double p = probs(node, static_cast<std::size_t>(y));
    if (p < kProbabilityFloor) {
      p = kProbabilityFloor;
      ++ce.clamped;
    }
    ce.loss -= std::log(p);
  }
  ce.loss /= static_cast<double>(nodes.size());
  return ce;
}

struct Gradients {
  DenseMatrix w0;
  DenseMatrix w1;
};

// Gradients of the mean cross-entropy over mask w.r.t. W0 and W1, given a
// forward pass computed with the same features and hidden_scale. Clamped
// rows keep the unclamped softmax gradient.
inline Gradients backward(const CsrMatrix &adjacency, const CsrMatrix &features, const ModelParams &params,
                          const ForwardPass &fwd, std::span<const int> labels, std::span<const std::size_t> mask,
                          const DenseMatrix *hidden_scale = nullptr, double weight_decay = 0.0) {
  const double inv_m = 1.0 / static_cast<double>(mask.size());
  DenseMatrix dlogits(fwd.probs.rows(), fwd.probs.cols());
  for (auto node : mask) {
    auto dst = dlogits.row(node);
    const auto src = fwd.probs.row(node);
    for (std::size_t c = 0; c < dst.size(); ++c) {
      dst[c] = src[c] * inv_m;
    }
    dst[static_cast<std::size_t>(labels[node])] -= inv_m;
  }

  Gradients g;
  DenseMatrix dh1;
  if (params.kind == ModelKind::gcn) {
    const DenseMatrix ds1 = spmm_transposed(adjacency, dlogits);
    DenseMatrix h1_used = fwd.h1;
    detail::hadamard(h1_used, hidden_scale);
    g.w1 = matmul_tn(h1_used, ds1);
    dh1 = matmul_nt(ds1, params.w1);
  } else {
    dh1 = spmm_transposed(adjacency, dlogits);
  }
  detail::hadamard(dh1, hidden_scale);
  if (params.kind == ModelKind::gcn) {
    auto d = dh1.values();
    const auto pre = fwd.pre1.values();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(pre[i] > 0.0)) {
        d[i] = 0.0;
      }
    }
  }
  g.w0 = spmm_transposed(features, spmm_transposed(adjacency, dh1));
  if (weight_decay > 0.0) {
    auto dst = g.w0.values();
    const auto src = params.w0.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] += weight_decay * src[i];
    }
  }
  return g;
}

inline double l2_penalty(const ModelParams &params, double weight_decay) {
  if (weight_decay <= 0.0) {
    return 0.0;
  }
  double sq = 0.0;
  for (double v : params.w0.values()) {
    sq += v * v;
  }
  return 0.5 * weight_decay * sq;
}

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
  std::size_t clamped = 0;
};

inline LossAndGrads loss_and_grads(const CsrMatrix &adjacency, const CsrMatrix &features, const ModelParams &params,
                                   std::span<const int> labels, std::span<const std::size_t> mask,
                                   double weight_decay = 0.0) {
  if (mask.empty()) {
    throw Error("loss_and_grads: training mask is empty");
  }
  const auto fwd = forward(adjacency, features, params);
  const auto ce = cross_entropy(fwd.probs, labels, mask);
  return {ce.loss + l2_penalty(params, weight_decay),
          backward(adjacency, features, params, fwd, labels, mask, nullptr, weight_decay), ce.clamped};
}

struct AdamState {
  double learning_rate = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  DenseMatrix m0, v0, m1, v1;

  static AdamState for_params(const ModelParams &p, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.m0 = DenseMatrix(p.w0.rows(), p.w0.cols());
    s.v0 = s.m0;
    s.m1 = DenseMatrix(p.w1.rows(), p.w1.cols());
    s.v1 = s.m1;
    return s;
  }
};

// One bias-corrected Adam update of a flat parameter block at step t (>= 1).
inline void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                        std::span<double> v, std::uint64_t t, double lr, double beta1, double beta2,
                        double epsilon) {
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

inline void adam_step(ModelParams &params, const Gradients &grads, AdamState &state) {
  if (grads.w0.rows() != params.w0.rows() || grads.w0.cols() != params.w0.cols() ||
      grads.w1.size() != params.w1.size() || state.m0.size() != params.w0.size() ||
      state.m1.size() != params.w1.size()) {
    throw Error("adam_step: gradient or state shape does not match parameters");
  }
  ++state.step;
  adam_update(params.w0.values(), grads.w0.values(), state.m0.values(), state.v0.values(), state.step,
              state.learning_rate, state.beta1, state.beta2, state.epsilon);
  adam_update(params.w1.values(), grads.w1.values(), state.m1.values(), state.v1.values(), state.step,
              state.learning_rate, state.beta1, state.beta2, state.epsilon);
}

// Tracks validation loss and signals a stop after `patience` consecutive
// epochs without strict improvement. patience 0 never stops.
class EarlyStopper {
public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Records the loss for the next epoch (1-based); returns true to stop.
  bool observe(double val_loss) {
    ++epoch_;
    improved_ = val_loss < best_loss_;
    if (improved_) {
      best_loss_ = val_loss;
      best_epoch_ = epoch_;
      since_best_ = 0;
    } else {
      ++since_best_;
    }
    return patience_ > 0 && since_best_ >= patience_;
  }

  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  std::size_t epochs() const { return epoch_; }

private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

struct TrainConfig {
  ModelKind kind = ModelKind::gcn;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t hidden = 200;
  double learning_rate = 0.02;
  double dropout = 0.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::size_t pmi_window = 20;
  double pmi_threshold = 0.0;

  void validate() const {
    if (max_epochs == 0) {
      throw ConfigError("max_epochs must be positive");
    }
    if (patience >= max_epochs) {
      throw ConfigError("patience must be smaller than max_epochs");
    }
    if (kind == ModelKind::gcn && hidden == 0) {
      throw ConfigError("hidden width must be positive");
    }
    if (!(learning_rate > 0.0)) {
      throw ConfigError("learning rate must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
      throw ConfigError("dropout must be in [0, 1)");
    }
    if (weight_decay < 0.0) {
      throw ConfigError("weight decay must be non-negative");
    }
    if (pmi_window < 1) {
      throw ConfigError("PMI window must be >= 1");
    }
  }

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

struct FitResult {
  ModelParams params;
  ForwardPass final_pass; // forward pass of the restored parameters
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t clamped = 0;
  bool early_stopping = false;
};

// Full-batch training on a fixed graph. labels holds one entry per node (-1
// for nodes outside every mask). Without validation nodes early stopping is
// off and the last epoch's parameters are kept.
inline FitResult fit(const CsrMatrix &adjacency, const CsrMatrix &features, std::span<const int> labels,
                     std::span<const std::size_t> train_nodes, std::span<const std::size_t> val_nodes,
                     std::size_t classes, const TrainConfig &config) {
  config.validate();
  if (train_nodes.empty()) {
    throw Error("no labeled training nodes");
  }
  FitResult out;
  ModelParams params = init_params(config.kind, features.cols(), config.hidden, classes, config.seed);
  AdamState adam = AdamState::for_params(params, config.learning_rate);
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  out.early_stopping = !val_nodes.empty() && config.patience > 0;
  EarlyStopper stopper(out.early_stopping ? config.patience : 0);

  ModelParams best = params;
  ForwardPass current = forward(adjacency, features, params);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Gradients grads;
    double train_loss = 0.0;
    if (config.dropout > 0.0) {
      const double keep = 1.0 - config.dropout;
      CsrMatrix dropped = features;
      for (double &v : dropped.values()) {
        v = dropout_rng.uniform() < keep ? v / keep : 0.0;
      }
      DenseMatrix scale(adjacency.rows(), params.kind == ModelKind::gcn ? config.hidden : classes);
      for (double &v : scale.values()) {
        v = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      const auto fwd = forward(adjacency, dropped, params, &scale);
      const auto ce = cross_entropy(fwd.probs, labels, train_nodes);
      train_loss = ce.loss + l2_penalty(params, config.weight_decay);
      out.clamped += ce.clamped;
      grads = backward(adjacency, dropped, params, fwd, labels, train_nodes, &scale, config.weight_decay);
    } else {
      const auto ce = cross_entropy(current.probs, labels, train_nodes);
      train_loss = ce.loss + l2_penalty(params, config.weight_decay);
      out.clamped += ce.clamped;
      grads = backward(adjacency, features, params, current, labels, train_nodes, nullptr, config.weight_decay);
    }
    if (!std::isfinite(train_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    out.train_loss.push_back(train_loss);
    adam_step(params, grads, adam);
    out.epochs_run = epoch;

    current = forward(adjacency, features, params);
    if (out.early_stopping) {
      const double val = cross_entropy(current.probs, labels, val_nodes).loss;
      out.val_loss.push_back(val);
      const bool stop = stopper.observe(val);
      if (stopper.improved()) {
        best = params;
      }
      if (stop) {
        break;
      }
    }
  }

  if (out.early_stopping) {
    out.best_epoch = stopper.best_epoch();
    out.params = std::move(best);
    out.final_pass = forward(adjacency, features, out.params);
  } else {
    out.best_epoch = out.epochs_run;
    out.params = std::move(params);
    out.final_pass = std::move(current);
  }
  return out;
}

// Everything inference needs, with no reference to training documents.
struct TrainedModel {
  ModelParams params;
  DenseMatrix h1_word; // post-layer-1 word rows of the training graph
  Vocabulary vocab;
  DocFrequency dfreq;
  std::vector<double> word_degrees;
  std::vector<std::string> labels;
  TrainConfig config;
  BatchNormalization batch_normalization = BatchNormalization::symmetric;
  bool lowercase = true;
  std::size_t min_train_frequency = 2;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;

  std::size_t parameter_count() const { return params.parameter_count(); }

  friend bool operator==(const TrainedModel &, const TrainedModel &) = default;
};

struct TrainingTargets {
  std::vector<int> labels; // per node
  std::vector<std::size_t> train_nodes;
  std::vector<std::size_t> val_nodes;
};

// Loss targets for a graph: labeled train-split documents form the training
// mask, val-split documents the validation mask; words and test nodes are in
// neither.
inline TrainingTargets training_targets(const TrainingGraph &graph) {
  TrainingTargets t;
  t.labels.assign(graph.index.total(), -1);
  for (std::size_t d = 0; d < graph.index.n_docs; ++d) {
    const int y = graph.doc_labels[d];
    if (y < 0 || graph.doc_splits[d] == Split::test) {
      continue;
    }
    t.labels[d] = y;
    (graph.doc_splits[d] == Split::val ? t.val_nodes : t.train_nodes).push_back(d);
  }
  return t;
}

inline TrainedModel train(const TrainingGraph &graph, std::span<const std::string> labels, const Vocabulary &vocab,
                          const DocFrequency &dfreq, const TrainConfig &config, FitResult *details = nullptr) {
  if (graph.features.cols() != vocab.size()) {
    throw Error("train: graph features do not match the vocabulary");
  }
  const auto targets = training_targets(graph);
  auto result = fit(graph.adjacency_norm, graph.features, targets.labels, targets.train_nodes, targets.val_nodes,
                    labels.size(), config);

  TrainedModel model;
  model.params = result.params;
  const auto &h1 = result.final_pass.h1;
  model.h1_word = DenseMatrix(graph.index.n_words, h1.cols());
  for (std::size_t w = 0; w < graph.index.n_words; ++w) {
    const auto src = h1.row(graph.index.word_node(w));
    std::copy(src.begin(), src.end(), model.h1_word.row(w).begin());
  }
  model.vocab = vocab;
  model.dfreq = dfreq;
  const auto wd = graph.word_degrees();
  model.word_degrees.assign(wd.begin(), wd.end());
  model.labels.assign(labels.begin(), labels.end());
  model.config = config;
  model.epochs_run = result.epochs_run;
  model.best_epoch = result.best_epoch;
  if (details != nullptr) {
    *details = std::move(result);
  }
  return model;
}

inline TrainedModel train(const TrainingGraph &graph, const Corpus &corpus, const Vocabulary &vocab,
                          const DocFrequency &dfreq, const TrainConfig &config, FitResult *details = nullptr) {
  return train(graph, corpus.labels, vocab, dfreq, config, details);
}

} // namespace inductgcn
