#include "tda/vocab.hpp"

#include <algorithm>
#include <stdexcept>

#include "tda/io.hpp"

namespace tda {

Vocabulary::Vocabulary() {
  add_entry(kUnkToken, 0);
}

void Vocabulary::add_entry(const std::string& word, uint64_t count) {
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& sentences, std::size_t cap) {
  if (cap < 1) throw std::runtime_error("vocabulary cap must be >= 1");
  std::unordered_map<std::string, uint64_t> freq;
  uint64_t total = 0;
  for (const Sentence& sentence : sentences) {
    for (const std::string& token : sentence) {
      ++freq[token];
      ++total;
    }
  }
  if (total == 0) throw std::runtime_error("cannot build vocabulary from empty corpus");

  std::vector<std::pair<std::string, uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > cap) ranked.resize(cap);

  Vocabulary vocab;
  for (const auto& [word, count] : ranked) vocab.add_entry(word, count);
  return vocab;
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? 0 : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return index_.count(word) > 0;
}

uint64_t Vocabulary::count(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? 0 : counts_[it->second];
}

const std::string& Vocabulary::normalize(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? words_[0] : words_[it->second];
}

void Vocabulary::save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.reserve(words_.size());
  for (std::size_t i = 1; i < words_.size(); ++i) {
    lines.push_back(words_[i] + "\t" + std::to_string(counts_[i]));
  }
  write_lines(path, lines);
}

Vocabulary Vocabulary::load(const std::string& path) {
  Vocabulary vocab;
  std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t tab = lines[i].find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error("bad vocabulary line " + std::to_string(i + 1) +
                               " in " + path);
    }
    std::string word = lines[i].substr(0, tab);
    uint64_t count = 0;
    try {
      count = std::stoull(lines[i].substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("bad count on vocabulary line " +
                               std::to_string(i + 1) + " in " + path);
    }
    if (count == 0 || vocab.contains(word)) {
      throw std::runtime_error("bad vocabulary entry on line " +
                               std::to_string(i + 1) + " in " + path);
    }
    vocab.add_entry(word, count);
  }
  return vocab;
}

RareWordSet rare_words(const Vocabulary& vocab, uint64_t threshold) {
  if (threshold < 1) throw std::runtime_error("rare word threshold must be >= 1");
  RareWordSet rare;
  rare.threshold = threshold;
  for (std::size_t id = 1; id < vocab.size(); ++id) {
    const std::string& word = vocab.word(static_cast<int>(id));
    if (vocab.count(word) < threshold) rare.words.insert(word);
  }
  return rare;
}

}  // namespace tda
