#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tda/corpus.hpp"

namespace tda {

inline constexpr const char* kBpeJoiner = "@@";
inline constexpr const char* kBpeEndOfWord = "</w>";

// Ordered byte-pair merge list learned from word frequencies.
struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  std::size_t size() const { return merges.size(); }

  // One merge per line `left right` after a version header line.
  void save(const std::string& path) const;
  static MergeTable load(const std::string& path);
};

// Greedy most-frequent-pair merging over word-internal symbol sequences;
// each word ends in a separate end-of-word symbol. Ties pick the
// lexicographically smallest pair; learning stops early once no pair
// occurs at least twice.
MergeTable learn_bpe(const std::vector<Sentence>& sentences, std::size_t merges);

// Splits each word into code point symbols plus the end-of-word symbol,
// then applies merges in table order. Continuation subwords carry the
// "@@" joiner suffix.
Sentence apply_bpe(const Sentence& sentence, const MergeTable& table);

// Joins subwords at joiner markers. Throws on a dangling joiner at the
// end of the sentence.
Sentence undo_bpe(const Sentence& sentence);

}  // namespace tda
