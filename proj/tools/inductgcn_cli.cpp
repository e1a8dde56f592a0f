// inductgcn command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "inductgcn/inductgcn.hpp"

namespace {

using namespace inductgcn;

// Raw option values shared by the experiment subcommands.
struct ExperimentOptions {
  ExperimentConfig config;
  std::string model = "induct-gcn";
  std::string seeds = "0..9";
  std::string stopwords = INDUCTGCN_DEFAULT_STOPWORDS;
  bool no_stopwords = false;
  bool keep_case = false;
  bool raw_test_adjacency = false;
  std::string report;
};

void add_experiment_options(CLI::App &cmd, ExperimentOptions &o, bool with_multiplier = true) {
  auto &c = o.config;
  cmd.add_option("--train", c.train_path, "training TSV (label<TAB>text per line)")->required();
  cmd.add_option("--test", c.test_path, "test TSV (label<TAB>text per line)")->required();
  cmd.add_option("--model", o.model, "induct-gcn | induct-sgc | transductive-gcn")->capture_default_str();
  cmd.add_option("--seeds", o.seeds, "seed list, e.g. 0..9 or 0,3,5..7")->capture_default_str();
  cmd.add_option("--fraction", c.train_fraction, "fraction of the training file to keep")->capture_default_str();
  cmd.add_option("--val-ratio", c.val_ratio, "share of kept training documents used for validation")
      ->capture_default_str();
  cmd.add_flag("--stratified", c.stratified, "subsample per class instead of uniformly");
  cmd.add_option("--hidden", c.train.hidden, "hidden width")->capture_default_str();
  cmd.add_option("--lr", c.train.learning_rate, "Adam learning rate")->capture_default_str();
  cmd.add_option("--epochs", c.train.max_epochs, "maximum training epochs")->capture_default_str();
  cmd.add_option("--patience", c.train.patience, "early-stopping patience on validation loss (0 = off)")
      ->capture_default_str();
  cmd.add_option("--dropout", c.train.dropout, "dropout rate on inputs and hidden layer")->capture_default_str();
  cmd.add_option("--weight-decay", c.train.weight_decay, "L2 penalty on the first layer")->capture_default_str();
  cmd.add_option("--pmi-window", c.train.pmi_window, "sliding window size for co-occurrence")
      ->capture_default_str();
  cmd.add_option("--pmi-threshold", c.train.pmi_threshold, "keep word-word edges with PMI above this")
      ->capture_default_str();
  cmd.add_option("--min-freq", c.preprocess.min_train_frequency, "minimum training frequency of a word")
      ->capture_default_str();
  cmd.add_option("--stopwords", o.stopwords, "stopword file, one word per line")->capture_default_str();
  cmd.add_flag("--no-stopwords", o.no_stopwords, "keep stopwords");
  cmd.add_flag("--keep-case", o.keep_case, "do not lowercase text");
  cmd.add_option("--batch-size", c.batch_size, "documents per inference batch")->capture_default_str();
  if (with_multiplier) {
    cmd.add_option("--test-multiplier", c.test_multiplier, "grow the test set by perturbed copies")
        ->capture_default_str();
  }
  cmd.add_option("--augment-seed", c.augment_seed, "seed for test-set perturbations")->capture_default_str();
  cmd.add_flag("--raw-test-adjacency", o.raw_test_adjacency, "skip normalization of test-batch adjacency rows");
  cmd.add_option("--dump-graph", c.dump_graph_prefix, "write <prefix>.seedN.edges.tsv and .nodes.tsv");
  cmd.add_flag("--parallel-seeds", c.parallel_seeds, "run seeds concurrently");
  cmd.add_option("--report", o.report, "write a JSON report to this file");
}

ExperimentConfig resolve(ExperimentOptions &o) {
  auto c = o.config;
  c.model = parse_experiment_model(o.model);
  c.seeds = parse_seed_list(o.seeds);
  c.preprocess.lowercase = !o.keep_case;
  if (!o.no_stopwords) {
    c.stopwords_path = o.stopwords;
    c.preprocess.stopwords = load_stopwords(o.stopwords);
  }
  c.batch_normalization = o.raw_test_adjacency ? BatchNormalization::none : BatchNormalization::symmetric;
  c.validate();
  return c;
}

std::vector<std::size_t> parse_multipliers(const std::string &text) {
  std::vector<std::size_t> out;
  for (auto v : parse_seed_list(text)) {
    if (v == 0) {
      throw ConfigError("multipliers must be >= 1");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<Document> read_labeled_documents(const std::string &path, bool lowercase) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path);
  }
  std::vector<Document> docs;
  for (auto &[label, text] : parse_labeled_lines(in, path)) {
    docs.push_back({docs.size(), tokenize(text, lowercase), label, Split::test});
  }
  return docs;
}

int cmd_train(ExperimentOptions &o, const std::string &save_path) {
  const auto config = resolve(o);
  const auto raw = load_corpus(config.train_path, config.test_path, config.preprocess.lowercase);
  ModelSink sink;
  if (!save_path.empty()) {
    if (config.model == ExperimentModel::transductive_gcn) {
      throw ConfigError("--save needs an inductive model");
    }
    const auto first = config.seeds.front();
    sink = [&](std::uint64_t seed, const TrainedModel &model) {
      if (seed == first) {
        save_checkpoint(model, save_path);
      }
    };
  }
  const auto report = run_experiment(config, raw, sink);
  print_report(report, std::cout);
  for (const auto &r : report.runs) {
    for (const auto &w : r.warnings) {
      std::cerr << "warning: seed " << r.seed << ": " << w << '\n';
    }
  }
  if (!save_path.empty()) {
    std::cout << "saved seed " << config.seeds.front() << " model to " << save_path << '\n';
  }
  if (!o.report.empty()) {
    write_json(to_json(report), o.report);
  }
  return 0;
}

int cmd_compare(ExperimentOptions &o) {
  auto config = resolve(o);
  const auto raw = load_corpus(config.train_path, config.test_path, config.preprocess.lowercase);
  if (config.model == ExperimentModel::transductive_gcn) {
    config.model = ExperimentModel::induct_gcn;
  }
  const auto inductive = run_experiment(config, raw);
  const auto transductive = run_transductive(config, raw);
  print_report(inductive, std::cout);
  std::cout << '\n';
  print_report(transductive, std::cout);
  if (!o.report.empty()) {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["kind"] = "compare";
    j["inductive"] = to_json(inductive);
    j["transductive"] = to_json(transductive);
    write_json(j, o.report);
  }
  return 0;
}

int cmd_bench(ExperimentOptions &o, const std::string &multipliers) {
  const auto config = resolve(o);
  const auto raw = load_corpus(config.train_path, config.test_path, config.preprocess.lowercase);
  const auto mult = parse_multipliers(multipliers);
  const auto rows = run_scaling(config, raw, mult);
  print_scaling(rows, std::cout);
  if (!o.report.empty()) {
    write_json(to_json(std::span<const ScalingRow>(rows), config), o.report);
  }
  return 0;
}

int cmd_eval(const std::string &checkpoint, const std::string &test_path, std::size_t batch_size) {
  const auto model = load_checkpoint(checkpoint);
  const auto docs = read_labeled_documents(test_path, model.lowercase);
  const auto e = evaluate(model, docs, batch_size);
  std::cout << "accuracy " << std::fixed << std::setprecision(4) << e.accuracy << " (" << e.correct << "/"
            << e.total << ")\n";
  return 0;
}

int cmd_predict(const std::string &checkpoint, const std::string &input, const std::string &output,
                std::size_t batch_size) {
  const auto model = load_checkpoint(checkpoint);
  std::ifstream in(input);
  if (!in) {
    throw Error("cannot open " + input);
  }
  const auto docs = load_unlabeled(in, model.lowercase);
  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) {
      throw Error("cannot write " + output);
    }
  }
  std::ostream &out = output.empty() ? std::cout : file;
  out.precision(6);
  for (const auto &p : predict_documents(model, docs, batch_size)) {
    out << p.doc_id << '\t' << p.label_name << '\t';
    for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
      out << (c == 0 ? "" : ",") << p.probabilities[c];
    }
    out << '\n';
  }
  return 0;
}

int cmd_synth(const SyntheticSpec &spec, const std::string &dir) {
  std::filesystem::create_directories(dir);
  const auto train = (std::filesystem::path(dir) / "synthetic.train").string();
  const auto test = (std::filesystem::path(dir) / "synthetic.test").string();
  write_corpus_tsv(make_keyword_corpus(spec), train, test);
  std::cout << "wrote " << train << " and " << test << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Inductive text classification with graph convolutional networks"};
  app.require_subcommand(1);

  ExperimentOptions train_opts;
  std::string save_path;
  auto *train = app.add_subcommand("train", "run the multi-seed training and evaluation protocol");
  add_experiment_options(*train, train_opts);
  train->add_option("--save", save_path, "write the first seed's model checkpoint here");

  ExperimentOptions compare_opts;
  auto *compare = app.add_subcommand("compare", "inductive vs transductive on the same subsamples");
  add_experiment_options(*compare, compare_opts);

  ExperimentOptions bench_opts;
  std::string multipliers = "1..5";
  auto *bench = app.add_subcommand("bench", "test-set scaling sweep, inductive vs transductive");
  add_experiment_options(*bench, bench_opts, false);
  bench->add_option("--multipliers", multipliers, "test-set size multipliers, e.g. 1,2,3,4,5")
      ->capture_default_str();

  std::string checkpoint, test_path, input, output;
  std::size_t batch_size = 64;
  auto *eval = app.add_subcommand("eval", "accuracy of a saved model on a labeled TSV file");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--test", test_path, "test TSV (label<TAB>text per line)")->required();
  eval->add_option("--batch-size", batch_size, "documents per inference batch")->capture_default_str();

  auto *predict = app.add_subcommand("predict", "label unlabeled documents (one per line) with a saved model");
  predict->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  predict->add_option("--input", input, "text file, one document per line")->required();
  predict->add_option("--output", output, "TSV output (default stdout)");
  predict->add_option("--batch-size", batch_size, "documents per inference batch")->capture_default_str();

  SyntheticSpec spec;
  std::string synth_dir = ".";
  auto *synth = app.add_subcommand("synth", "write a keyword-separable synthetic corpus");
  synth->add_option("--out-dir", synth_dir, "output directory")->capture_default_str();
  synth->add_option("--classes", spec.classes, "number of classes")->capture_default_str();
  synth->add_option("--train-docs", spec.train_docs, "training documents")->capture_default_str();
  synth->add_option("--test-docs", spec.test_docs, "test documents")->capture_default_str();
  synth->add_option("--doc-length", spec.doc_length, "tokens per document")->capture_default_str();
  synth->add_option("--noise", spec.noise_fraction, "share of noise tokens per document")->capture_default_str();
  synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train) return cmd_train(train_opts, save_path);
    if (*compare) return cmd_compare(compare_opts);
    if (*bench) return cmd_bench(bench_opts, multipliers);
    if (*eval) return cmd_eval(checkpoint, test_path, batch_size);
    if (*predict) return cmd_predict(checkpoint, input, output, batch_size);
    if (*synth) return cmd_synth(spec, synth_dir);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
