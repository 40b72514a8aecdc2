#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tda/corpus.hpp"

namespace tda {

inline constexpr const char* kUnkToken = "<unk>";

// Ranked word-frequency table. The unk token is reserved at id 0; real words
// get dense ids 1..size()-1 ordered by descending count, ties broken
// lexicographically. At most `cap` real words are kept.
class Vocabulary {
 public:
  Vocabulary();

  // Builds from token sequences. Throws if the corpus has no tokens or cap < 1.
  static Vocabulary build(const std::vector<Sentence>& sentences, std::size_t cap);

  // Id of a word; 0 (unk) for out-of-vocabulary words.
  int id(const std::string& word) const;
  bool contains(const std::string& word) const;
  uint64_t count(const std::string& word) const;  // 0 if absent
  const std::string& word(int id) const { return words_.at(id); }

  // Number of entries including unk.
  std::size_t size() const { return words_.size(); }

  // Maps a token to itself if in vocabulary, else to unk.
  const std::string& normalize(const std::string& word) const;

  // TSV `word<TAB>count`, real words only, descending count order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> words_;   // index = id, words_[0] = unk
  std::vector<uint64_t> counts_;     // counts_[0] = 0
  std::unordered_map<std::string, int> index_;

  void add_entry(const std::string& word, uint64_t count);
};

struct RareWordSet {
  std::unordered_set<std::string> words;
  uint64_t threshold = 0;

  bool contains(const std::string& word) const { return words.count(word) > 0; }
  std::size_t size() const { return words.size(); }
};

// In-vocabulary words with count < threshold; unk is never included.
RareWordSet rare_words(const Vocabulary& vocab, uint64_t threshold);

}  // namespace tda
