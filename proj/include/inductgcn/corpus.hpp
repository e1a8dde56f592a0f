#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "inductgcn/error.hpp"
#include "inductgcn/rng.hpp"
#include "inductgcn/vocabulary.hpp"

namespace inductgcn {

enum class Split { train, val, test };

inline std::string_view to_string(Split s) {
  switch (s) {
  case Split::train:
    return "train";
  case Split::val:
    return "val";
  case Split::test:
    return "test";
  }
  return "?";
}

struct Document {
  std::size_t id = 0;
  std::vector<std::string> tokens;
  std::optional<std::string> label;
  Split split = Split::train;

  // Training data in the graph sense: val documents are withheld from the
  // loss only.
  bool in_training_graph() const { return split != Split::test; }
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> labels;

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(documents.begin(), documents.end(), [s](const Document &d) { return d.split == s; }));
  }

  std::optional<std::size_t> label_index(const std::string &name) const {
    const auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - labels.begin());
  }

  // Copies of the documents with the given split(s), in corpus order.
  std::vector<Document> select(std::initializer_list<Split> splits) const {
    std::vector<Document> out;
    for (const auto &d : documents) {
      if (std::find(splits.begin(), splits.end(), d.split) != splits.end()) {
        out.push_back(d);
      }
    }
    return out;
  }

  std::vector<Document> training_documents() const { return select({Split::train, Split::val}); }
  std::vector<Document> test_documents() const { return select({Split::test}); }
};

struct PreprocessConfig {
  std::size_t min_train_frequency = 2;
  std::unordered_set<std::string> stopwords;
  bool lowercase = true;
};

// Which documents define the vocabulary. The inductive model only ever looks
// at training documents; the transductive baseline uses the whole corpus.
enum class VocabularyScope { training, all_documents };

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

inline bool is_split_punct(unsigned char c) {
  return c == ',' || c == '.' || c == '!' || c == '?' || c == '(' || c == ')';
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

} // namespace detail

// Splits raw text into tokens. The punctuation characters , . ! ? ( ) become
// standalone tokens, apostrophes survive only between two word characters,
// and every other non-alphanumeric ASCII byte acts as a separator. Bytes
// >= 0x80 are treated as word characters so UTF-8 words stay intact.
inline std::vector<std::string> tokenize(std::string_view text, bool lowercase = true) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_word_byte(c)) {
      if (lowercase && c < 0x80) {
        c = static_cast<unsigned char>(std::tolower(c));
      }
      current.push_back(static_cast<char>(c));
    } else if (c == '\'' && !current.empty() && i + 1 < text.size() &&
               detail::is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      current.push_back('\'');
    } else if (detail::is_split_punct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// Reads `label<TAB>text` lines. Blank lines are skipped.
inline std::vector<std::pair<std::string, std::string>> parse_labeled_lines(std::istream &in,
                                                                            const std::string &source) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'label<TAB>text'");
    }
    auto label = detail::trim(std::string_view(line).substr(0, tab));
    if (label.empty()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": empty label");
    }
    rows.emplace_back(std::move(label), line.substr(tab + 1));
  }
  return rows;
}

inline Corpus load_corpus(std::istream &train, std::istream &test, bool lowercase = true,
                          const std::string &train_name = "train", const std::string &test_name = "test") {
  const auto train_rows = parse_labeled_lines(train, train_name);
  if (train_rows.empty()) {
    throw ParseError(train_name + ": no training documents");
  }
  const auto test_rows = parse_labeled_lines(test, test_name);

  Corpus corpus;
  std::unordered_set<std::string> known;
  std::size_t next_id = 0;
  for (const auto &[label, text] : train_rows) {
    if (known.insert(label).second) {
      corpus.labels.push_back(label);
    }
    corpus.documents.push_back({next_id++, tokenize(text, lowercase), label, Split::train});
  }
  std::vector<std::string> unknown;
  for (const auto &[label, text] : test_rows) {
    if (!known.contains(label) && std::find(unknown.begin(), unknown.end(), label) == unknown.end()) {
      unknown.push_back(label);
    }
    corpus.documents.push_back({next_id++, tokenize(text, lowercase), label, Split::test});
  }
  if (!unknown.empty()) {
    std::string msg = test_name + ": labels not present in training data:";
    for (const auto &u : unknown) {
      msg += " " + u;
    }
    throw ParseError(msg);
  }
  return corpus;
}

inline Corpus load_corpus(const std::string &train_path, const std::string &test_path, bool lowercase = true) {
  std::ifstream train(train_path);
  if (!train) {
    throw Error("cannot open " + train_path);
  }
  std::ifstream test(test_path);
  if (!test) {
    throw Error("cannot open " + test_path);
  }
  return load_corpus(train, test, lowercase, train_path, test_path);
}

// One unlabeled document per line; line k (0-based) becomes document id k.
inline std::vector<Document> load_unlabeled(std::istream &in, bool lowercase = true) {
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    docs.push_back({docs.size(), tokenize(line, lowercase), std::nullopt, Split::test});
  }
  return docs;
}

inline std::unordered_set<std::string> parse_stopwords(std::istream &in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = detail::trim(line);
    if (w.empty() || w.front() == '#') {
      continue;
    }
    words.insert(std::move(w));
  }
  return words;
}

inline std::unordered_set<std::string> load_stopwords(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open stopword file " + path);
  }
  return parse_stopwords(in);
}

struct PreprocessResult {
  Corpus corpus;
  Vocabulary vocab;
  std::size_t dropped_training_documents = 0;
};

// Builds the vocabulary from word frequencies and filters every document
// against it. Training documents left empty are dropped; test documents are
// kept even when empty so the test split keeps its size.
inline PreprocessResult preprocess(const Corpus &corpus, const PreprocessConfig &config,
                                   VocabularyScope scope = VocabularyScope::training) {
  if (config.min_train_frequency < 1) {
    throw ConfigError("min_train_frequency must be >= 1");
  }
  const auto counts_toward_vocab = [scope](const Document &d) {
    return scope == VocabularyScope::all_documents || d.in_training_graph();
  };

  std::unordered_map<std::string, std::size_t> freq;
  std::vector<std::string> first_seen;
  for (const auto &d : corpus.documents) {
    if (!counts_toward_vocab(d)) {
      continue;
    }
    for (const auto &t : d.tokens) {
      if (freq[t]++ == 0) {
        first_seen.push_back(t);
      }
    }
  }

  PreprocessResult result;
  for (const auto &w : first_seen) {
    if (freq[w] >= config.min_train_frequency && !config.stopwords.contains(w)) {
      result.vocab.add(w);
    }
  }
  if (result.vocab.empty()) {
    throw Error("vocabulary is empty after filtering; all training documents are empty");
  }

  result.corpus.labels = corpus.labels;
  for (const auto &d : corpus.documents) {
    Document filtered{d.id, {}, d.label, d.split};
    for (const auto &t : d.tokens) {
      if (result.vocab.contains(t)) {
        filtered.tokens.push_back(t);
      }
    }
    if (filtered.tokens.empty() && d.in_training_graph()) {
      ++result.dropped_training_documents;
      continue;
    }
    result.corpus.documents.push_back(std::move(filtered));
  }
  return result;
}

struct SplitResult {
  Corpus corpus;
  // Classes left without any training (or validation) document.
  std::vector<std::string> empty_classes;
};

namespace detail {

// floor/ceil of a product that should be integral, robust to representation
// error such as 0.07 * 100 = 7.000000000000001.
inline std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

inline std::size_t ceil_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

} // namespace detail

// Keeps ceil(train_fraction * N) of the N training documents, then marks
// floor(val_ratio * kept) of the kept documents as validation. Test documents
// pass through untouched.
inline SplitResult subsample_and_split(const Corpus &corpus, double train_fraction, double val_ratio,
                                       std::uint64_t seed, bool stratified = false) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train fraction must be in (0, 1]");
  }
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw ConfigError("validation ratio must be in [0, 1)");
  }
  Rng rng(seed);

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    if (corpus.documents[i].in_training_graph()) {
      pool.push_back(i);
    }
  }

  std::vector<std::size_t> kept;
  if (stratified) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (auto i : pool) {
      by_label[corpus.documents[i].label.value_or("")].push_back(i);
    }
    for (const auto &name : corpus.labels) {
      auto it = by_label.find(name);
      if (it == by_label.end()) {
        continue;
      }
      auto &members = it->second;
      rng.shuffle(std::span(members));
      const auto take = detail::ceil_count(train_fraction, members.size());
      kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    }
  } else {
    rng.shuffle(std::span(pool));
    const auto take = detail::ceil_count(train_fraction, pool.size());
    kept.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  if (kept.empty()) {
    throw Error("subsample contains no training documents");
  }

  std::vector<std::size_t> order = kept;
  rng.shuffle(std::span(order));
  const auto n_val = detail::floor_count(val_ratio, kept.size());
  std::unordered_set<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::unordered_set<std::size_t> keep(kept.begin(), kept.end());

  SplitResult result;
  result.corpus.labels = corpus.labels;
  std::unordered_set<std::string> seen_labels;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto &d = corpus.documents[i];
    if (d.split == Split::test) {
      result.corpus.documents.push_back(d);
      continue;
    }
    if (!keep.contains(i)) {
      continue;
    }
    Document copy = d;
    copy.split = val.contains(i) ? Split::val : Split::train;
    if (copy.label) {
      seen_labels.insert(*copy.label);
    }
    result.corpus.documents.push_back(std::move(copy));
  }
  for (const auto &name : corpus.labels) {
    if (!seen_labels.contains(name)) {
      result.empty_classes.push_back(name);
    }
  }
  return result;
}

inline void delete_token(std::vector<std::string> &tokens, std::size_t pos) {
  tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

inline void swap_tokens(std::vector<std::string> &tokens, std::size_t i, std::size_t j) {
  std::swap(tokens[i], tokens[j]);
}

// Grows the test split to multiplier x its size. Every extra copy carries one
// perturbation: deleting a random token or swapping two random positions,
// with equal probability. Perturbations that cannot apply (delete on an empty
// document, swap on fewer than two tokens) leave the copy unchanged.
inline Corpus augment_test(const Corpus &corpus, std::size_t multiplier, std::uint64_t seed) {
  if (multiplier < 1) {
    throw ConfigError("test multiplier must be >= 1");
  }
  Corpus out = corpus;
  if (multiplier == 1) {
    return out;
  }
  Rng rng(seed);
  std::size_t next_id = 0;
  for (const auto &d : corpus.documents) {
    next_id = std::max(next_id, d.id + 1);
  }
  const auto originals = corpus.test_documents();
  for (std::size_t copy = 1; copy < multiplier; ++copy) {
    for (const auto &d : originals) {
      Document extra = d;
      extra.id = next_id++;
      auto &tokens = extra.tokens;
      if (rng.coin()) {
        if (!tokens.empty()) {
          delete_token(tokens, rng.uniform_index(tokens.size()));
        }
      } else if (tokens.size() >= 2) {
        const auto i = rng.uniform_index(tokens.size());
        auto j = rng.uniform_index(tokens.size() - 1);
        if (j >= i) {
          ++j;
        }
        swap_tokens(tokens, i, j);
      }
      out.documents.push_back(std::move(extra));
    }
  }
  return out;
}

} // namespace inductgcn
