#include "tda/bpe.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tda/io.hpp"
#include "tda/text.hpp"

namespace tda {

namespace {

constexpr const char* kVersionHeader = "#version: 0.2";

std::vector<std::string> word_symbols(const std::string& word) {
  std::vector<std::string> symbols = utf8_chars(word);
  symbols.push_back(kBpeEndOfWord);
  return symbols;
}

void merge_in_place(std::vector<std::string>* symbols, const std::string& left,
                    const std::string& right) {
  std::vector<std::string>& s = *symbols;
  std::size_t out = 0;
  for (std::size_t i = 0; i < s.size();) {
    if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
      s[out] = left + right;
      ++out;
      i += 2;
    } else {
      if (out != i) s[out] = std::move(s[i]);
      ++out;
      i += 1;
    }
  }
  s.resize(out);
}

}  // namespace

void MergeTable::save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.reserve(merges.size() + 1);
  lines.push_back(kVersionHeader);
  for (const auto& [left, right] : merges) lines.push_back(left + " " + right);
  write_lines(path, lines);
}

MergeTable MergeTable::load(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0].rfind("#version:", 0) != 0) {
    throw std::runtime_error("missing BPE version header in " + path);
  }
  MergeTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::size_t space = lines[i].find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == lines[i].size() ||
        lines[i].find(' ', space + 1) != std::string::npos) {
      throw std::runtime_error("bad merge on line " + std::to_string(i + 1) + " in " + path);
    }
    table.merges.push_back({lines[i].substr(0, space), lines[i].substr(space + 1)});
  }
  return table;
}

namespace {

using SymbolPair = std::pair<std::string, std::string>;

struct SymbolPairHash {
  std::size_t operator()(const SymbolPair& p) const {
    std::size_t h1 = std::hash<std::string>{}(p.first);
    std::size_t h2 = std::hash<std::string>{}(p.second);
    return h1 * 0x9e3779b97f4a7c15ULL + h2;
  }
};

}  // namespace

MergeTable learn_bpe(const std::vector<Sentence>& sentences, std::size_t merges) {
  std::unordered_map<std::string, uint64_t> word_counts;
  for (const Sentence& sentence : sentences) {
    for (const std::string& token : sentence) ++word_counts[token];
  }
  if (word_counts.empty()) throw std::runtime_error("cannot learn BPE from empty corpus");

  // Word types in deterministic order.
  std::vector<std::pair<std::string, uint64_t>> words(word_counts.begin(), word_counts.end());
  std::sort(words.begin(), words.end());
  std::vector<std::vector<std::string>> symbol_seqs;
  symbol_seqs.reserve(words.size());
  for (const auto& [word, count] : words) symbol_seqs.push_back(word_symbols(word));

  std::unordered_map<SymbolPair, uint64_t, SymbolPairHash> counts;
  std::unordered_map<SymbolPair, std::unordered_set<std::size_t>, SymbolPairHash> where;
  auto add_word = [&](std::size_t w, int sign) {
    const std::vector<std::string>& s = symbol_seqs[w];
    uint64_t freq = words[w].second;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      SymbolPair pair{s[i], s[i + 1]};
      if (sign > 0) {
        counts[pair] += freq;
        where[pair].insert(w);
      } else {
        counts[pair] -= freq;
        where[pair].erase(w);
      }
    }
  };
  for (std::size_t w = 0; w < symbol_seqs.size(); ++w) add_word(w, +1);

  // Max-heap with lazy invalidation: entries are stale once the live
  // count differs. Ties pick the lexicographically smallest pair.
  struct HeapItem {
    uint64_t count;
    SymbolPair pair;
    bool operator<(const HeapItem& other) const {
      if (count != other.count) return count < other.count;
      return pair > other.pair;
    }
  };
  std::priority_queue<HeapItem> heap;
  for (const auto& [pair, count] : counts) heap.push({count, pair});

  MergeTable table;
  while (table.merges.size() < merges && !heap.empty()) {
    HeapItem top = heap.top();
    heap.pop();
    auto it = counts.find(top.pair);
    if (it == counts.end() || it->second != top.count) continue;  // stale
    if (top.count < 2) break;
    table.merges.push_back(top.pair);

    std::vector<std::size_t> affected(where[top.pair].begin(), where[top.pair].end());
    std::vector<SymbolPair> touched;
    for (std::size_t w : affected) {
      const std::vector<std::string>& s = symbol_seqs[w];
      for (std::size_t i = 0; i + 1 < s.size(); ++i) touched.push_back({s[i], s[i + 1]});
      add_word(w, -1);
      merge_in_place(&symbol_seqs[w], top.pair.first, top.pair.second);
      const std::vector<std::string>& m = symbol_seqs[w];
      for (std::size_t i = 0; i + 1 < m.size(); ++i) touched.push_back({m[i], m[i + 1]});
      add_word(w, +1);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (const SymbolPair& pair : touched) {
      auto live = counts.find(pair);
      if (live != counts.end() && live->second > 0) heap.push({live->second, pair});
    }
  }
  return table;
}

Sentence apply_bpe(const Sentence& sentence, const MergeTable& table) {
  Sentence out;
  for (const std::string& word : sentence) {
    std::vector<std::string> symbols = word_symbols(word);
    for (const auto& [left, right] : table.merges) {
      if (symbols.size() < 2) break;
      merge_in_place(&symbols, left, right);
    }
    // Render: strip the end-of-word symbol and add the joiner to every
    // word-internal piece.
    std::vector<std::string> pieces;
    for (std::string& symbol : symbols) {
      if (symbol == kBpeEndOfWord) continue;
      std::size_t eow = symbol.size() >= 4 ? symbol.rfind(kBpeEndOfWord) : std::string::npos;
      if (eow != std::string::npos && eow == symbol.size() - 4) {
        pieces.push_back(symbol.substr(0, eow));
      } else {
        pieces.push_back(std::move(symbol));
      }
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i + 1 < pieces.size()) {
        out.push_back(pieces[i] + kBpeJoiner);
      } else {
        out.push_back(std::move(pieces[i]));
      }
    }
  }
  return out;
}

Sentence undo_bpe(const Sentence& sentence) {
  Sentence out;
  std::string current;
  bool joining = false;
  for (const std::string& token : sentence) {
    bool continues = token.size() >= 2 && token.compare(token.size() - 2, 2, kBpeJoiner) == 0;
    current += continues ? token.substr(0, token.size() - 2) : token;
    if (continues) {
      joining = true;
    } else {
      out.push_back(std::move(current));
      current.clear();
      joining = false;
    }
  }
  if (joining) throw std::runtime_error("dangling BPE joiner at end of sentence");
  return out;
}

}  // namespace tda
