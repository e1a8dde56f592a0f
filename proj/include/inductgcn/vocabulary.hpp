#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "inductgcn/error.hpp"

namespace inductgcn {

// Bijection between word strings and contiguous indices [0, size()).
class Vocabulary {
public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words) {
    for (auto &w : words) {
      add(std::move(w));
    }
  }

  // Returns the index of word, inserting it at the end when new.
  std::size_t add(std::string word) {
    const auto [it, inserted] = word_to_index_.try_emplace(word, index_to_word_.size());
    if (inserted) {
      index_to_word_.push_back(std::move(word));
    }
    return it->second;
  }

  std::optional<std::size_t> find(const std::string &word) const {
    const auto it = word_to_index_.find(word);
    if (it == word_to_index_.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  bool contains(const std::string &word) const { return word_to_index_.contains(word); }

  std::size_t index(const std::string &word) const {
    const auto it = word_to_index_.find(word);
    if (it == word_to_index_.end()) {
      throw Error("word '" + word + "' not in vocabulary");
    }
    return it->second;
  }

  const std::string &word(std::size_t i) const { return index_to_word_.at(i); }
  std::size_t size() const { return index_to_word_.size(); }
  bool empty() const { return index_to_word_.empty(); }
  std::span<const std::string> words() const { return index_to_word_; }

  // Maps tokens to indices, silently dropping out-of-vocabulary tokens.
  std::vector<std::size_t> encode(std::span<const std::string> tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto &t : tokens) {
      if (auto id = find(t)) {
        ids.push_back(*id);
      }
    }
    return ids;
  }

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.index_to_word_ == b.index_to_word_;
  }

private:
  std::unordered_map<std::string, std::size_t> word_to_index_;
  std::vector<std::string> index_to_word_;
};

} // namespace inductgcn
