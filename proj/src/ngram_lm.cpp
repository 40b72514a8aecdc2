#include "tda/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tda/io.hpp"

namespace tda {

namespace {

constexpr const char* kBosToken = "<s>";
constexpr std::size_t kNpos = static_cast<std::size_t>(-1);
constexpr int kMaxOrder = 5;

struct NgramKey {
  std::array<int32_t, kMaxOrder> ids;

  bool operator==(const NgramKey& other) const { return ids == other.ids; }
};

struct NgramKeyHash {
  std::size_t operator()(const NgramKey& key) const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int32_t id : key.ids) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(id));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

int compare_tuple(const int32_t* a, const int32_t* b, int width) {
  for (int i = 0; i < width; ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

}  // namespace

const char* direction_name(Direction direction) {
  return direction == Direction::kForward ? "forward" : "backward";
}

Direction parse_direction(const std::string& name) {
  if (name == "forward") return Direction::kForward;
  if (name == "backward") return Direction::kBackward;
  throw std::runtime_error("unknown LM direction: " + name);
}

std::size_t NGramLM::Table::find(std::span<const int32_t> key) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (compare_tuple(entry(mid), key.data(), width) < 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && compare_tuple(entry(lo), key.data(), width) == 0) return lo;
  return kNpos;
}

std::pair<std::size_t, std::size_t> NGramLM::Table::prefix_range(
    std::span<const int32_t> key) const {
  int plen = static_cast<int>(key.size());
  if (plen == 0) return {0, size()};
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (compare_tuple(entry(mid), key.data(), plen) < 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  std::size_t begin = lo;
  hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (compare_tuple(entry(mid), key.data(), plen) <= 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return {begin, lo};
}

NGramLM NGramLM::train(const std::vector<Sentence>& sentences, int order,
                       Direction direction, const Vocabulary& vocab) {
  if (order < 1 || order > kMaxOrder) {
    throw std::runtime_error("LM order must be in [1,5], got " + std::to_string(order));
  }
  std::size_t total_tokens = 0;
  for (const Sentence& sentence : sentences) total_tokens += sentence.size();
  if (total_tokens == 0) throw std::runtime_error("cannot train LM on empty corpus");

  NGramLM lm;
  lm.order_ = order;
  lm.direction_ = direction;
  lm.vocab_size_ = static_cast<int>(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    lm.symbols_.push_back(vocab.word(static_cast<int>(id)));
    lm.symbol_index_.emplace(lm.symbols_.back(), static_cast<int>(id));
  }
  lm.unk_id_ = 0;
  lm.bos_id_ = static_cast<int>(lm.symbols_.size());
  lm.symbols_.push_back(kBosToken);
  lm.symbol_index_.emplace(kBosToken, lm.bos_id_);

  // Count n-gram events. Unused key slots stay at -1 so equal-length
  // n-grams never collide across orders.
  std::vector<std::unordered_map<NgramKey, uint64_t, NgramKeyHash>> counts(order);
  std::vector<int32_t> stream;
  for (const Sentence& sentence : sentences) {
    if (sentence.empty()) continue;
    stream.assign(order - 1, lm.bos_id_);
    if (direction == Direction::kBackward) {
      for (auto it = sentence.rbegin(); it != sentence.rend(); ++it) {
        int id = vocab.id(*it);
        stream.push_back(id);
      }
    } else {
      for (const std::string& token : sentence) stream.push_back(vocab.id(token));
    }
    for (std::size_t pos = static_cast<std::size_t>(order - 1); pos < stream.size(); ++pos) {
      for (int k = 1; k <= order; ++k) {
        NgramKey key;
        key.ids.fill(-1);
        for (int i = 0; i < k; ++i) key.ids[i] = stream[pos - k + 1 + i];
        ++counts[k - 1][key];
      }
    }
  }

  uint64_t event_total = 0;
  for (const auto& [key, count] : counts[0]) event_total += count;

  lm.tables_.resize(order);

  // Unigrams: add-one over the full vocabulary; <s> kept as a context-only
  // entry so higher orders can hang interpolation weights off it.
  {
    Table& table = lm.tables_[0];
    table.width = 1;
    double denom = static_cast<double>(event_total) + static_cast<double>(lm.vocab_size_);
    for (int id = 0; id < lm.vocab_size_; ++id) {
      NgramKey key;
      key.ids.fill(-1);
      key.ids[0] = id;
      auto it = counts[0].find(key);
      uint64_t c = it == counts[0].end() ? 0 : it->second;
      table.ids.push_back(id);
      table.probs.push_back((static_cast<double>(c) + 1.0) / denom);
      table.backoffs.push_back(1.0);
    }
    if (order > 1) {
      table.ids.push_back(lm.bos_id_);
      table.probs.push_back(0.0);
      table.backoffs.push_back(1.0);
    }
  }

  for (int k = 2; k <= order; ++k) {
    // Continuation totals and distinct-continuation counts per history.
    std::unordered_map<NgramKey, std::pair<uint64_t, uint32_t>, NgramKeyHash> contexts;
    for (const auto& [key, count] : counts[k - 1]) {
      NgramKey hist = key;
      hist.ids[k - 1] = -1;
      auto& slot = contexts[hist];
      slot.first += count;
      slot.second += 1;
    }
    // Interpolation weights attach to (k-1)-gram entries; histories that
    // only ever occur as context (e.g. all-marker prefixes) get added here.
    Table& lower = lm.tables_[k - 2];
    std::vector<std::pair<NgramKey, std::pair<uint64_t, uint32_t>>> extra;
    for (const auto& [hist, totals] : contexts) {
      std::size_t at = lower.find(std::span<const int32_t>(hist.ids.data(), k - 1));
      if (at == kNpos) extra.push_back({hist, totals});
    }
    if (!extra.empty()) {
      // Rebuild the lower table with the extra context entries merged in.
      Table merged;
      merged.width = lower.width;
      std::vector<std::pair<NgramKey, std::pair<double, double>>> all;
      all.reserve(lower.size() + extra.size());
      for (std::size_t i = 0; i < lower.size(); ++i) {
        NgramKey key;
        key.ids.fill(-1);
        for (int j = 0; j < lower.width; ++j) key.ids[j] = lower.entry(i)[j];
        all.push_back({key, {lower.probs[i], lower.backoffs[i]}});
      }
      for (const auto& [hist, totals] : extra) {
        all.push_back({hist, {0.0, 1.0}});
      }
      std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
        return compare_tuple(a.first.ids.data(), b.first.ids.data(), merged.width) < 0;
      });
      for (const auto& [key, pb] : all) {
        for (int j = 0; j < merged.width; ++j) merged.ids.push_back(key.ids[j]);
        merged.probs.push_back(pb.first);
        merged.backoffs.push_back(pb.second);
      }
      lm.tables_[k - 2] = std::move(merged);
    }
    Table& context_table = lm.tables_[k - 2];
    for (const auto& [hist, totals] : contexts) {
      std::size_t at = context_table.find(std::span<const int32_t>(hist.ids.data(), k - 1));
      double gamma = kDiscount * static_cast<double>(totals.second) /
                     static_cast<double>(totals.first);
      context_table.backoffs[at] = gamma;
    }

    // Event probabilities for this order.
    Table& table = lm.tables_[k - 1];
    table.width = k;
    std::vector<NgramKey> keys;
    keys.reserve(counts[k - 1].size());
    for (const auto& [key, count] : counts[k - 1]) keys.push_back(key);
    std::sort(keys.begin(), keys.end(), [&](const NgramKey& a, const NgramKey& b) {
      return compare_tuple(a.ids.data(), b.ids.data(), k) < 0;
    });
    for (const NgramKey& key : keys) {
      NgramKey hist = key;
      hist.ids[k - 1] = -1;
      const auto& totals = contexts.at(hist);
      uint64_t c = counts[k - 1].at(key);
      double gamma = kDiscount * static_cast<double>(totals.second) /
                     static_cast<double>(totals.first);
      double lower_prob = lm.prob_walk(
          key.ids[k - 1], std::span<const int32_t>(key.ids.data() + 1, k - 2));
      double prob = (static_cast<double>(c) - kDiscount) /
                        static_cast<double>(totals.first) +
                    gamma * lower_prob;
      for (int j = 0; j < k; ++j) table.ids.push_back(key.ids[j]);
      table.probs.push_back(prob);
      table.backoffs.push_back(1.0);
    }
  }

  lm.build_unigram_ranking();
  return lm;
}

void NGramLM::build_unigram_ranking() {
  const Table& unigrams = tables_[0];
  unigram_ranking_.clear();
  std::vector<std::pair<double, int>> scored;
  for (std::size_t i = 0; i < unigrams.size(); ++i) {
    int id = unigrams.entry(i)[0];
    if (id >= vocab_size_ || unigrams.probs[i] <= 0.0) continue;
    scored.push_back({unigrams.probs[i], id});
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [prob, id] : scored) unigram_ranking_.push_back(id);
}

int NGramLM::word_id(const std::string& word) const {
  auto it = symbol_index_.find(word);
  if (it == symbol_index_.end()) return unk_id_;
  return it->second < vocab_size_ ? it->second : unk_id_;
}

std::vector<int32_t> NGramLM::canonical_context(std::span<const int> history) const {
  std::size_t want = static_cast<std::size_t>(order_ - 1);
  std::vector<int32_t> context(want, bos_id_);
  if (want == 0) return context;
  if (direction_ == Direction::kForward) {
    // Keep the nearest (last) tokens; pad sentence starts on the left.
    std::size_t take = std::min(history.size(), want);
    for (std::size_t i = 0; i < take; ++i) {
      context[want - take + i] = history[history.size() - take + i];
    }
  } else {
    // History arrives nearest-first; internal order is reversed text.
    std::size_t take = std::min(history.size(), want);
    for (std::size_t i = 0; i < take; ++i) {
      context[want - 1 - i] = history[i];
    }
  }
  return context;
}

double NGramLM::prob_walk(int word_id, std::span<const int32_t> context) const {
  int klen = static_cast<int>(context.size());
  std::array<int32_t, kMaxOrder> key;
  for (int i = 0; i < klen; ++i) key[i] = context[i];
  key[klen] = word_id;
  const Table& table = tables_[klen];
  std::size_t at = table.find(std::span<const int32_t>(key.data(), klen + 1));
  if (at != kNpos && table.probs[at] > 0.0) return table.probs[at];
  // Unigram table covers the whole vocabulary, so the walk terminates.
  double gamma = 1.0;
  if (klen > 0) {
    const Table& context_table = tables_[klen - 1];
    std::size_t ctx_at = context_table.find(context);
    if (ctx_at != kNpos) gamma = context_table.backoffs[ctx_at];
    return gamma * prob_walk(word_id, context.subspan(1));
  }
  throw std::runtime_error("word id outside vocabulary: " + std::to_string(word_id));
}

double NGramLM::prob_id(int word_id, std::span<const int> history) const {
  if (word_id < 0 || word_id >= vocab_size_) word_id = unk_id_;
  std::vector<int32_t> context = canonical_context(history);
  return prob_walk(word_id, context);
}

double NGramLM::prob(const std::string& word, const std::vector<std::string>& history) const {
  // Literal marker strings in text count as OOV; markers are internal.
  std::vector<int> ids;
  ids.reserve(history.size());
  for (const std::string& token : history) ids.push_back(word_id(token));
  return prob_id(word_id(word), ids);
}

void NGramLM::topk_context(std::span<const int32_t> context, std::size_t k,
                           std::vector<std::pair<int, double>>* out) const {
  out->clear();
  if (k == 0) return;
  if (context.empty()) {
    // Unigram entries are id-sorted over the full vocabulary, so probs
    // index directly by id.
    std::size_t take = std::min(k, unigram_ranking_.size());
    for (std::size_t i = 0; i < take; ++i) {
      int id = unigram_ranking_[i];
      out->push_back({id, tables_[0].probs[static_cast<std::size_t>(id)]});
    }
    return;
  }

  const Table& table = tables_[context.size()];
  auto [begin, end] = table.prefix_range(context);
  std::vector<std::pair<int, double>> explicit_entries;
  std::vector<int> explicit_ids;  // ascending by table order
  for (std::size_t i = begin; i < end; ++i) {
    int id = table.entry(i)[table.width - 1];
    if (id >= vocab_size_ || table.probs[i] <= 0.0) continue;
    explicit_entries.push_back({id, table.probs[i]});
    explicit_ids.push_back(id);
  }

  double gamma = 1.0;
  const Table& context_table = tables_[context.size() - 1];
  std::size_t ctx_at = context_table.find(context);
  if (ctx_at != kNpos) gamma = context_table.backoffs[ctx_at];

  std::vector<std::pair<int, double>> lower;
  topk_context(context.subspan(1), k + explicit_entries.size(), &lower);

  std::vector<std::pair<int, double>>& merged = *out;
  merged = std::move(explicit_entries);
  for (const auto& [id, prob] : lower) {
    if (std::binary_search(explicit_ids.begin(), explicit_ids.end(), id)) continue;
    merged.push_back({id, gamma * prob});
  }
  auto better = [](const std::pair<int, double>& a, const std::pair<int, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  if (merged.size() > k) {
    std::nth_element(merged.begin(), merged.begin() + k, merged.end(), better);
    merged.resize(k);
  }
  std::sort(merged.begin(), merged.end(), better);
}

void NGramLM::topk_ids(std::span<const int> history, std::size_t k,
                       std::vector<std::pair<int, double>>* out) const {
  std::vector<int32_t> context = canonical_context(history);
  topk_context(context, k, out);
}

std::vector<std::pair<std::string, double>> NGramLM::topk_scored(
    const std::vector<std::string>& history, std::size_t k) const {
  std::vector<int> ids;
  ids.reserve(history.size());
  for (const std::string& token : history) ids.push_back(word_id(token));
  std::vector<std::pair<int, double>> ranked;
  topk_ids(ids, k, &ranked);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(ranked.size());
  for (const auto& [id, prob] : ranked) out.push_back({symbols_[id], prob});
  return out;
}

std::vector<std::string> NGramLM::topk(const std::vector<std::string>& history,
                                       std::size_t k,
                                       const std::unordered_set<std::string>* restrict) const {
  std::vector<std::pair<std::string, double>> ranked = topk_scored(history, k);
  std::vector<std::string> out;
  for (auto& [word, prob] : ranked) {
    if (restrict != nullptr && restrict->count(word) == 0) continue;
    out.push_back(std::move(word));
  }
  return out;
}

void NGramLM::save_arpa(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k) {
    out << "ngram " << k << "=" << tables_[k - 1].size() << "\n";
  }
  char buf[32];
  for (int k = 1; k <= order_; ++k) {
    const Table& table = tables_[k - 1];
    out << "\n\\" << k << "-grams:\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.probs[i] > 0.0) {
        std::snprintf(buf, sizeof(buf), "%.7f", std::log10(table.probs[i]));
        out << buf;
      } else {
        out << "-99";
      }
      out << '\t';
      for (int j = 0; j < k; ++j) {
        if (j > 0) out << ' ';
        out << symbols_[table.entry(i)[j]];
      }
      if (k < order_ && table.backoffs[i] != 1.0) {
        std::snprintf(buf, sizeof(buf), "%.7f", std::log10(table.backoffs[i]));
        out << '\t' << buf;
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

NGramLM NGramLM::load_arpa(const std::string& path, Direction direction) {
  std::vector<std::string> lines = read_lines(path);
  std::size_t at = 0;
  auto next_line = [&]() -> const std::string* {
    return at < lines.size() ? &lines[at++] : nullptr;
  };

  const std::string* line;
  while ((line = next_line()) != nullptr && *line != "\\data\\") {
  }
  if (line == nullptr) throw std::runtime_error("not an ARPA file: " + path);

  std::vector<std::size_t> section_sizes;
  while ((line = next_line()) != nullptr && !line->empty()) {
    if (line->rfind("ngram ", 0) != 0) break;
    std::size_t eq = line->find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad ARPA header: " + *line);
    section_sizes.push_back(std::stoull(line->substr(eq + 1)));
  }
  if (section_sizes.empty() || section_sizes.size() > kMaxOrder) {
    throw std::runtime_error("unsupported ARPA order in " + path);
  }

  NGramLM lm;
  lm.order_ = static_cast<int>(section_sizes.size());
  lm.direction_ = direction;
  lm.tables_.resize(lm.order_);

  struct RawEntry {
    NgramKey key;
    double prob;
    double backoff;
  };

  for (int k = 1; k <= lm.order_; ++k) {
    std::string header = "\\" + std::to_string(k) + "-grams:";
    while (line != nullptr && *line != header) line = next_line();
    if (line == nullptr) throw std::runtime_error("missing ARPA section " + header);
    std::vector<RawEntry> entries;
    entries.reserve(section_sizes[k - 1]);
    while ((line = next_line()) != nullptr && !line->empty() && (*line)[0] != '\\') {
      std::size_t tab1 = line->find('\t');
      if (tab1 == std::string::npos) throw std::runtime_error("bad ARPA line: " + *line);
      std::size_t tab2 = line->find('\t', tab1 + 1);
      double logp = std::stod(line->substr(0, tab1));
      std::string gram = line->substr(
          tab1 + 1, tab2 == std::string::npos ? std::string::npos : tab2 - tab1 - 1);
      double backoff = 1.0;
      if (tab2 != std::string::npos) {
        backoff = std::pow(10.0, std::stod(line->substr(tab2 + 1)));
      }
      RawEntry entry;
      entry.key.ids.fill(-1);
      std::size_t start = 0, idx = 0;
      while (true) {
        std::size_t space = gram.find(' ', start);
        std::string word =
            space == std::string::npos ? gram.substr(start) : gram.substr(start, space - start);
        if (word.empty() || idx >= static_cast<std::size_t>(k)) {
          throw std::runtime_error("bad ARPA n-gram: " + gram);
        }
        int id;
        if (k == 1) {
          auto it = lm.symbol_index_.find(word);
          if (it != lm.symbol_index_.end()) throw std::runtime_error("duplicate ARPA unigram: " + word);
          id = static_cast<int>(lm.symbols_.size());
          lm.symbols_.push_back(word);
          lm.symbol_index_.emplace(word, id);
        } else {
          auto it = lm.symbol_index_.find(word);
          if (it == lm.symbol_index_.end()) {
            throw std::runtime_error("ARPA n-gram uses unlisted word: " + word);
          }
          id = it->second;
        }
        entry.key.ids[idx++] = id;
        if (space == std::string::npos) break;
        start = space + 1;
      }
      if (idx != static_cast<std::size_t>(k)) {
        throw std::runtime_error("ARPA n-gram of wrong order: " + gram);
      }
      entry.prob = logp <= -98.0 ? 0.0 : std::pow(10.0, logp);
      entry.backoff = backoff;
      entries.push_back(entry);
    }
    if (entries.size() != section_sizes[k - 1]) {
      throw std::runtime_error("ARPA section size mismatch in " + path);
    }
    std::sort(entries.begin(), entries.end(), [&](const RawEntry& a, const RawEntry& b) {
      return compare_tuple(a.key.ids.data(), b.key.ids.data(), k) < 0;
    });
    Table& table = lm.tables_[k - 1];
    table.width = k;
    for (const RawEntry& entry : entries) {
      for (int j = 0; j < k; ++j) table.ids.push_back(entry.key.ids[j]);
      table.probs.push_back(entry.prob);
      table.backoffs.push_back(entry.backoff);
    }
  }

  // Markers sit at the end of the unigram list by construction; anything
  // after the first marker is treated as context-only.
  auto bos_it = lm.symbol_index_.find(kBosToken);
  if (bos_it != lm.symbol_index_.end()) {
    lm.vocab_size_ = bos_it->second;
    lm.bos_id_ = bos_it->second;
  } else {
    lm.vocab_size_ = static_cast<int>(lm.symbols_.size());
    lm.bos_id_ = static_cast<int>(lm.symbols_.size());
    lm.symbols_.push_back(kBosToken);
    lm.symbol_index_.emplace(kBosToken, lm.bos_id_);
  }
  auto unk_it = lm.symbol_index_.find(kUnkToken);
  if (unk_it == lm.symbol_index_.end() || unk_it->second >= lm.vocab_size_) {
    throw std::runtime_error("ARPA model lacks an unk unigram: " + path);
  }
  lm.unk_id_ = unk_it->second;

  lm.build_unigram_ranking();
  return lm;
}

NGramLM train_ngram_lm(const std::vector<Sentence>& sentences, int order,
                       Direction direction, const Vocabulary& vocab) {
  return NGramLM::train(sentences, order, direction, vocab);
}

}  // namespace tda
