#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tda {

using Sentence = std::vector<std::string>;

struct SentencePair {
  Sentence source;
  Sentence target;
  std::size_t id = 0;
};

class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  explicit ParallelCorpus(std::vector<SentencePair> pairs) : pairs_(std::move(pairs)) {}

  const std::vector<SentencePair>& pairs() const { return pairs_; }
  const SentencePair& pair(std::size_t id) const { return pairs_.at(id); }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  // Appends a pair, assigning the next consecutive id.
  void append(Sentence source, Sentence target);

  std::vector<Sentence> source_sentences() const;
  std::vector<Sentence> target_sentences() const;

 private:
  std::vector<SentencePair> pairs_;
};

// Loads line-aligned tokenized files. Throws on line-count mismatch, empty
// lines, or tokens containing whitespace; messages carry 1-based line numbers.
ParallelCorpus load_parallel(const std::string& source_path,
                             const std::string& target_path,
                             bool lowercase = false);

// Loads one tokenized sentence per line (monolingual side).
std::vector<Sentence> load_sentences(const std::string& path, bool lowercase = false);

void write_parallel(const ParallelCorpus& corpus, const std::string& source_path,
                    const std::string& target_path);
void write_sentences(const std::vector<Sentence>& sentences, const std::string& path);

}  // namespace tda
