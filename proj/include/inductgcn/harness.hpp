#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <mutex>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/features.hpp"
#include "inductgcn/graph.hpp"
#include "inductgcn/inference.hpp"
#include "inductgcn/model.hpp"

namespace inductgcn {

inline constexpr int kReportFormatVersion = 1;

enum class ExperimentModel { induct_gcn, induct_sgc, transductive_gcn };

inline std::string to_string(ExperimentModel m) {
  switch (m) {
  case ExperimentModel::induct_gcn:
    return "induct-gcn";
  case ExperimentModel::induct_sgc:
    return "induct-sgc";
  case ExperimentModel::transductive_gcn:
    return "transductive-gcn";
  }
  return "?";
}

inline ExperimentModel parse_experiment_model(const std::string &s) {
  if (s == "induct-gcn") {
    return ExperimentModel::induct_gcn;
  }
  if (s == "induct-sgc") {
    return ExperimentModel::induct_sgc;
  }
  if (s == "transductive-gcn") {
    return ExperimentModel::transductive_gcn;
  }
  throw ConfigError("unknown model '" + s + "' (expected induct-gcn, induct-sgc or transductive-gcn)");
}

// Accepts "a..b" (inclusive), a comma list, or a mix: "0..4,7,9".
inline std::vector<std::uint64_t> parse_seed_list(const std::string &text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  const auto parse_u64 = [&](const std::string &s) {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception &) {
      pos = std::string::npos;
    }
    if (s.empty() || pos != s.size() || s.front() == '-') {
      throw ConfigError("invalid seed '" + s + "' in '" + text + "'");
    }
    return v;
  };
  while (std::getline(ss, part, ',')) {
    part = detail::trim(part);
    if (const auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = parse_u64(part.substr(0, dots));
      const auto hi = parse_u64(part.substr(dots + 2));
      if (hi < lo) {
        throw ConfigError("empty seed range '" + part + "'");
      }
      for (auto s = lo; s <= hi; ++s) {
        seeds.push_back(s);
      }
    } else {
      seeds.push_back(parse_u64(part));
    }
  }
  if (seeds.empty()) {
    throw ConfigError("seed list is empty");
  }
  return seeds;
}

struct ExperimentConfig {
  std::string train_path;
  std::string test_path;
  ExperimentModel model = ExperimentModel::induct_gcn;
  double train_fraction = 1.0;
  double val_ratio = 0.1;
  bool stratified = false;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  PreprocessConfig preprocess;
  std::string stopwords_path;
  TrainConfig train;
  std::size_t batch_size = 64;
  std::size_t test_multiplier = 1;
  std::uint64_t augment_seed = 0;
  BatchNormalization batch_normalization = BatchNormalization::symmetric;
  std::string dump_graph_prefix;
  bool parallel_seeds = false;

  void validate() const {
    if (seeds.empty()) {
      throw ConfigError("at least one seed is required");
    }
    if (batch_size == 0) {
      throw ConfigError("batch size must be positive");
    }
    if (test_multiplier == 0) {
      throw ConfigError("test multiplier must be >= 1");
    }
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
      throw ConfigError("fraction must be in (0, 1]");
    }
    if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
      throw ConfigError("validation ratio must be in [0, 1)");
    }
    train.validate();
  }

  TrainConfig train_config(std::uint64_t seed) const {
    TrainConfig c = train;
    c.kind = model == ExperimentModel::induct_sgc ? ModelKind::sgc : ModelKind::gcn;
    c.seed = seed;
    return c;
  }
};

struct SeedResult {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double graph_seconds = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::size_t parameter_count = 0;
  std::size_t nodes = 0;
  std::size_t doc_nodes = 0;
  std::size_t edges = 0;
  std::size_t vocabulary_size = 0;
  std::size_t train_docs = 0;
  std::size_t val_docs = 0;
  std::size_t test_docs = 0;
  std::vector<std::string> warnings;

  double seconds_per_epoch() const {
    return epochs_run == 0 ? 0.0 : train_seconds / static_cast<double>(epochs_run);
  }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<SeedResult> runs;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double graph_seconds_mean = 0.0;
  double train_seconds_mean = 0.0;
  double eval_seconds_mean = 0.0;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

// Mean and population standard deviation.
inline Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) {
    return s;
  }
  for (double v : values) {
    s.mean += v;
  }
  s.mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) {
    sq += (v - s.mean) * (v - s.mean);
  }
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

inline void finalize_report(ExperimentReport &report) {
  std::vector<double> acc, graph, train, eval;
  for (const auto &r : report.runs) {
    acc.push_back(r.accuracy);
    graph.push_back(r.graph_seconds);
    train.push_back(r.train_seconds);
    eval.push_back(r.eval_seconds);
  }
  const auto a = summarize(acc);
  report.accuracy_mean = a.mean;
  report.accuracy_std = a.stddev;
  report.graph_seconds_mean = summarize(graph).mean;
  report.train_seconds_mean = summarize(train).mean;
  report.eval_seconds_mean = summarize(eval).mean;
}

namespace detail {

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

inline SplitResult split_for_seed(const Corpus &raw, const ExperimentConfig &config, std::uint64_t seed,
                                  SeedResult &result) {
  auto split = subsample_and_split(raw, config.train_fraction, config.val_ratio, seed, config.stratified);
  for (const auto &c : split.empty_classes) {
    result.warnings.push_back("class '" + c + "' has no training documents in this subsample");
  }
  return split;
}

inline void record_counts(const Corpus &corpus, SeedResult &r) {
  r.train_docs = corpus.count(Split::train);
  r.val_docs = corpus.count(Split::val);
  r.test_docs = corpus.count(Split::test);
}

} // namespace detail

struct InductiveRun {
  SeedResult result;
  TrainedModel model;
  TrainingGraph graph;
};

// subsample/split -> vocabulary + statistics + graph -> train -> evaluate.
// Graph time covers vocabulary filtering, TF-IDF and PMI statistics, and
// adjacency/feature assembly.
inline InductiveRun run_inductive_seed(const Corpus &raw, const ExperimentConfig &config, std::uint64_t seed) {
  InductiveRun run;
  auto &r = run.result;
  r.seed = seed;
  const auto split = detail::split_for_seed(raw, config, seed, r);

  detail::Stopwatch graph_clock;
  const auto pre = preprocess(split.corpus, config.preprocess, VocabularyScope::training);
  const auto train_docs = pre.corpus.training_documents();
  const auto dfreq = compute_doc_frequency(train_docs, pre.vocab);
  const auto cooc = compute_cooccurrence(train_docs, pre.vocab, config.train.pmi_window);
  run.graph = build_graph(train_docs, pre.corpus.labels, pre.vocab, dfreq, cooc, config.train.pmi_threshold,
                          NodeFeatures::tfidf_documents);
  r.graph_seconds = graph_clock.seconds();
  if (pre.dropped_training_documents > 0) {
    r.warnings.push_back(std::to_string(pre.dropped_training_documents) +
                         " training documents were empty after filtering and were dropped");
  }
  if (!config.dump_graph_prefix.empty()) {
    dump_graph(run.graph, pre.vocab, config.dump_graph_prefix + ".seed" + std::to_string(seed));
  }

  detail::Stopwatch train_clock;
  FitResult fit_details;
  run.model = train(run.graph, pre.corpus.labels, pre.vocab, dfreq, config.train_config(seed), &fit_details);
  r.train_seconds = train_clock.seconds();
  run.model.batch_normalization = config.batch_normalization;
  run.model.lowercase = config.preprocess.lowercase;
  run.model.min_train_frequency = config.preprocess.min_train_frequency;
  if (!fit_details.early_stopping && config.train.patience > 0) {
    r.warnings.push_back("validation split is empty; early stopping disabled");
  }
  if (fit_details.clamped > 0) {
    r.warnings.push_back(std::to_string(fit_details.clamped) + " probabilities clamped in the loss");
  }

  detail::record_counts(pre.corpus, r);
  detail::Stopwatch eval_clock;
  r.accuracy = evaluate(run.model, pre.corpus, config.batch_size).accuracy;
  r.eval_seconds = eval_clock.seconds();

  r.epochs_run = run.model.epochs_run;
  r.best_epoch = run.model.best_epoch;
  r.parameter_count = run.model.parameter_count();
  r.nodes = run.graph.index.total();
  r.doc_nodes = run.graph.index.n_docs;
  r.edges = run.graph.edge_count();
  r.vocabulary_size = pre.vocab.size();
  return run;
}

// Transductive baseline: a single graph over training and test documents and
// the whole-corpus vocabulary, one-hot node inputs, loss on training nodes,
// accuracy read off the test-node rows.
inline SeedResult run_transductive_seed(const Corpus &raw, const ExperimentConfig &config, std::uint64_t seed,
                                        TrainingGraph *graph_out = nullptr) {
  SeedResult r;
  r.seed = seed;
  const auto split = detail::split_for_seed(raw, config, seed, r);

  detail::Stopwatch graph_clock;
  const auto pre = preprocess(split.corpus, config.preprocess, VocabularyScope::all_documents);
  auto docs = pre.corpus.training_documents();
  const auto test_docs = pre.corpus.test_documents();
  docs.insert(docs.end(), test_docs.begin(), test_docs.end());
  const auto dfreq = compute_doc_frequency(docs, pre.vocab);
  const auto cooc = compute_cooccurrence(docs, pre.vocab, config.train.pmi_window);
  auto graph = build_graph(docs, pre.corpus.labels, pre.vocab, dfreq, cooc, config.train.pmi_threshold,
                           NodeFeatures::one_hot_nodes);
  r.graph_seconds = graph_clock.seconds();
  if (pre.dropped_training_documents > 0) {
    r.warnings.push_back(std::to_string(pre.dropped_training_documents) +
                         " training documents were empty after filtering and were dropped");
  }
  if (!config.dump_graph_prefix.empty()) {
    dump_graph(graph, pre.vocab, config.dump_graph_prefix + ".transductive.seed" + std::to_string(seed));
  }

  detail::Stopwatch train_clock;
  TrainConfig tc = config.train_config(seed);
  tc.kind = ModelKind::gcn;
  const auto targets = training_targets(graph);
  const auto fitted = fit(graph.adjacency_norm, graph.features, targets.labels, targets.train_nodes,
                          targets.val_nodes, pre.corpus.labels.size(), tc);
  r.train_seconds = train_clock.seconds();
  if (!fitted.early_stopping && config.train.patience > 0) {
    r.warnings.push_back("validation split is empty; early stopping disabled");
  }

  detail::record_counts(pre.corpus, r);
  detail::Stopwatch eval_clock;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t d = 0; d < graph.index.n_docs; ++d) {
    if (graph.doc_splits[d] != Split::test) {
      continue;
    }
    ++total;
    correct += static_cast<int>(detail::argmax(fitted.final_pass.probs.row(d))) == graph.doc_labels[d] ? 1 : 0;
  }
  if (total == 0) {
    throw Error("transductive evaluation: test set is empty");
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  r.eval_seconds = eval_clock.seconds();

  r.epochs_run = fitted.epochs_run;
  r.best_epoch = fitted.best_epoch;
  r.parameter_count = fitted.params.parameter_count();
  r.nodes = graph.index.total();
  r.doc_nodes = graph.index.n_docs;
  r.edges = graph.edge_count();
  r.vocabulary_size = pre.vocab.size();
  if (graph_out != nullptr) {
    *graph_out = std::move(graph);
  }
  return r;
}

inline SeedResult run_seed(const Corpus &raw, const ExperimentConfig &config, std::uint64_t seed) {
  if (config.model == ExperimentModel::transductive_gcn) {
    return run_transductive_seed(raw, config, seed);
  }
  return run_inductive_seed(raw, config, seed).result;
}

// Receives each trained inductive model; calls are serialized.
using ModelSink = std::function<void(std::uint64_t seed, const TrainedModel &model)>;

// Runs every seed on the (optionally augmented) corpus. A failure in any seed
// aborts the experiment with the seed named in the message.
inline ExperimentReport run_experiment(const ExperimentConfig &config, const Corpus &raw,
                                       const ModelSink &sink = {}) {
  config.validate();
  const Corpus corpus = augment_test(raw, config.test_multiplier, config.augment_seed);
  ExperimentReport report;
  report.config = config;
  std::mutex sink_mutex;
  const auto guarded = [&](std::uint64_t seed) {
    try {
      if (config.model == ExperimentModel::transductive_gcn || !sink) {
        return run_seed(corpus, config, seed);
      }
      auto run = run_inductive_seed(corpus, config, seed);
      const std::lock_guard lock(sink_mutex);
      sink(seed, run.model);
      return run.result;
    } catch (const std::exception &e) {
      throw Error("seed " + std::to_string(seed) + ": " + e.what());
    }
  };
  if (config.parallel_seeds && config.seeds.size() > 1) {
    std::vector<std::future<SeedResult>> pending;
    for (auto seed : config.seeds) {
      pending.push_back(std::async(std::launch::async, guarded, seed));
    }
    for (auto &f : pending) {
      report.runs.push_back(f.get());
    }
  } else {
    for (auto seed : config.seeds) {
      report.runs.push_back(guarded(seed));
    }
  }
  finalize_report(report);
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig &config) {
  return run_experiment(config, load_corpus(config.train_path, config.test_path, config.preprocess.lowercase));
}

inline ExperimentReport run_transductive(ExperimentConfig config, const Corpus &raw) {
  config.model = ExperimentModel::transductive_gcn;
  return run_experiment(config, raw);
}

struct ScalingRow {
  std::size_t multiplier = 1;
  std::size_t test_docs = 0;
  SeedResult inductive;
  SeedResult transductive;
};

// Test-size scaling sweep: for each multiplier, augment the test split and
// run both the inductive and transductive pipelines on the same seed.
inline std::vector<ScalingRow> run_scaling(const ExperimentConfig &config, const Corpus &raw,
                                           std::span<const std::size_t> multipliers) {
  config.validate();
  std::vector<ScalingRow> rows;
  const auto seed = config.seeds.front();
  ExperimentConfig inductive = config;
  if (inductive.model == ExperimentModel::transductive_gcn) {
    inductive.model = ExperimentModel::induct_gcn;
  }
  for (auto k : multipliers) {
    const auto corpus = augment_test(raw, k, config.augment_seed);
    ScalingRow row;
    row.multiplier = k;
    row.test_docs = corpus.count(Split::test);
    row.inductive = run_inductive_seed(corpus, inductive, seed).result;
    row.transductive = run_transductive_seed(corpus, config, seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report output

inline nlohmann::json to_json(const ExperimentConfig &c) {
  nlohmann::json j;
  j["train_path"] = c.train_path;
  j["test_path"] = c.test_path;
  j["model"] = to_string(c.model);
  j["fraction"] = c.train_fraction;
  j["val_ratio"] = c.val_ratio;
  j["stratified"] = c.stratified;
  j["seeds"] = c.seeds;
  j["min_frequency"] = c.preprocess.min_train_frequency;
  j["stopwords"] = c.stopwords_path;
  j["stopword_count"] = c.preprocess.stopwords.size();
  j["lowercase"] = c.preprocess.lowercase;
  j["hidden"] = c.train.hidden;
  j["lr"] = c.train.learning_rate;
  j["epochs"] = c.train.max_epochs;
  j["patience"] = c.train.patience;
  j["dropout"] = c.train.dropout;
  j["weight_decay"] = c.train.weight_decay;
  j["pmi_window"] = c.train.pmi_window;
  j["pmi_threshold"] = c.train.pmi_threshold;
  j["batch_size"] = c.batch_size;
  j["test_multiplier"] = c.test_multiplier;
  j["augment_seed"] = c.augment_seed;
  j["test_normalization"] = c.batch_normalization == BatchNormalization::symmetric ? "symmetric" : "none";
  return j;
}

inline nlohmann::json to_json(const SeedResult &r) {
  return {{"seed", r.seed},
          {"accuracy", r.accuracy},
          {"graph_seconds", r.graph_seconds},
          {"train_seconds", r.train_seconds},
          {"eval_seconds", r.eval_seconds},
          {"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"parameter_count", r.parameter_count},
          {"nodes", r.nodes},
          {"doc_nodes", r.doc_nodes},
          {"edges", r.edges},
          {"vocabulary_size", r.vocabulary_size},
          {"train_docs", r.train_docs},
          {"val_docs", r.val_docs},
          {"test_docs", r.test_docs},
          {"warnings", r.warnings}};
}

inline nlohmann::json to_json(const ExperimentReport &report) {
  nlohmann::json j;
  j["format_version"] = kReportFormatVersion;
  j["kind"] = "experiment";
  j["config"] = to_json(report.config);
  j["runs"] = nlohmann::json::array();
  for (const auto &r : report.runs) {
    j["runs"].push_back(to_json(r));
  }
  j["accuracy_mean"] = report.accuracy_mean;
  j["accuracy_std"] = report.accuracy_std;
  j["graph_seconds_mean"] = report.graph_seconds_mean;
  j["train_seconds_mean"] = report.train_seconds_mean;
  j["eval_seconds_mean"] = report.eval_seconds_mean;
  return j;
}

inline nlohmann::json to_json(std::span<const ScalingRow> rows, const ExperimentConfig &config) {
  nlohmann::json j;
  j["format_version"] = kReportFormatVersion;
  j["kind"] = "scaling";
  j["config"] = to_json(config);
  j["rows"] = nlohmann::json::array();
  for (const auto &row : rows) {
    j["rows"].push_back({{"multiplier", row.multiplier},
                         {"test_docs", row.test_docs},
                         {"inductive", to_json(row.inductive)},
                         {"transductive", to_json(row.transductive)}});
  }
  return j;
}

inline void write_json(const nlohmann::json &j, const std::string &path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write report " + path);
  }
  out << j.dump(2) << '\n';
}

inline std::string format_mean_std(double mean, double stddev) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << mean << " ± " << stddev;
  return s.str();
}

inline void print_report(const ExperimentReport &report, std::ostream &out) {
  out << "model: " << to_string(report.config.model) << "  fraction: " << report.config.train_fraction
      << "  seeds: " << report.runs.size() << '\n';
  out << std::left << std::setw(6) << "seed" << std::setw(10) << "accuracy" << std::setw(10) << "graph(s)"
      << std::setw(10) << "train(s)" << std::setw(10) << "eval(s)" << std::setw(8) << "epochs" << std::setw(8)
      << "nodes" << std::setw(10) << "edges" << "params\n";
  for (const auto &r : report.runs) {
    out << std::left << std::setw(6) << r.seed << std::fixed << std::setprecision(4) << std::setw(10) << r.accuracy
        << std::setprecision(3) << std::setw(10) << r.graph_seconds << std::setw(10) << r.train_seconds
        << std::setw(10) << r.eval_seconds << std::setw(8) << r.epochs_run << std::setw(8) << r.nodes
        << std::setw(10) << r.edges << r.parameter_count << '\n';
  }
  out << "accuracy: " << format_mean_std(report.accuracy_mean, report.accuracy_std) << '\n';
  out << std::fixed << std::setprecision(3) << "mean graph " << report.graph_seconds_mean << " s, train "
      << report.train_seconds_mean << " s, eval " << report.eval_seconds_mean << " s\n";
  out.unsetf(std::ios::floatfield);
}

inline void print_scaling(std::span<const ScalingRow> rows, std::ostream &out) {
  out << std::left << std::setw(6) << "size" << std::setw(8) << "#test" << "| " << std::setw(10) << "TG graph"
      << std::setw(10) << "TG train" << std::setw(10) << "TG nodes" << std::setw(8) << "TG acc" << "| "
      << std::setw(10) << "IG graph" << std::setw(10) << "IG train" << std::setw(10) << "IG nodes" << "IG acc\n";
  for (const auto &row : rows) {
    out << std::left << std::setw(6) << ("x" + std::to_string(row.multiplier)) << std::setw(8) << row.test_docs
        << "| " << std::fixed << std::setprecision(3) << std::setw(10) << row.transductive.graph_seconds
        << std::setw(10) << row.transductive.train_seconds << std::setw(10) << row.transductive.nodes
        << std::setprecision(4) << std::setw(8) << row.transductive.accuracy << "| " << std::setprecision(3)
        << std::setw(10) << row.inductive.graph_seconds << std::setw(10) << row.inductive.train_seconds
        << std::setw(10) << row.inductive.nodes << std::setprecision(4) << row.inductive.accuracy << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

} // namespace inductgcn
