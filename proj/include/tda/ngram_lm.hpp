#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tda/corpus.hpp"
#include "tda/vocab.hpp"

namespace tda {

enum class Direction { kForward, kBackward };

const char* direction_name(Direction direction);
Direction parse_direction(const std::string& name);

// Smoothed n-gram language model over a fixed word vocabulary.
//
// Estimator: interpolated absolute discounting with discount 0.75 at orders
// >= 2 and add-one smoothing at the unigram level. The predicted event space
// is exactly the vocabulary (unk included); sentence-begin markers appear
// only inside histories. Backward models are forward models over reversed
// sentences and take histories as the tokens to the right of the position,
// nearest first.
//
// Histories shorter than order-1 are interpreted as sentence-adjacent and
// padded with begin markers; longer histories are truncated to the nearest
// order-1 tokens.
class NGramLM {
 public:
  static constexpr double kDiscount = 0.75;

  // An empty model; usable only as an assignment target.
  NGramLM() = default;

  // Trains on token sequences; out-of-vocabulary tokens count as unk.
  // Throws if order is outside [1,5] or the corpus has no tokens.
  static NGramLM train(const std::vector<Sentence>& sentences, int order,
                       Direction direction, const Vocabulary& vocab);

  int order() const { return order_; }
  Direction direction() const { return direction_; }

  // Number of predictable words (vocabulary incl. unk).
  std::size_t vocab_size() const { return vocab_size_; }
  const std::string& word(int id) const { return symbols_.at(id); }

  // Word id for prediction; unk id for OOV tokens and markers.
  int word_id(const std::string& word) const;

  double prob(const std::string& word, const std::vector<std::string>& history) const;

  // The k most probable words given the history, ties broken by word id.
  // `restrict` filters the ranking after it is computed over the full
  // vocabulary, so a restricted word absent from the unrestricted top k is
  // not returned.
  std::vector<std::string> topk(const std::vector<std::string>& history, std::size_t k,
                                const std::unordered_set<std::string>* restrict = nullptr) const;
  std::vector<std::pair<std::string, double>> topk_scored(
      const std::vector<std::string>& history, std::size_t k) const;

  // Id-level queries for hot paths. Histories are given in query order
  // (forward: reading order; backward: nearest right token first).
  double prob_id(int word_id, std::span<const int> history) const;
  void topk_ids(std::span<const int> history, std::size_t k,
                std::vector<std::pair<int, double>>* out) const;

  // ARPA text format (log10 probabilities and backoff weights).
  void save_arpa(const std::string& path) const;
  static NGramLM load_arpa(const std::string& path, Direction direction);

 private:
  struct Table {
    int width = 0;
    std::vector<int32_t> ids;      // width ids per entry, sorted
    std::vector<double> probs;     // 0.0 marks a context-only entry
    std::vector<double> backoffs;  // interpolation weights, default 1.0

    std::size_t size() const { return probs.size(); }
    const int32_t* entry(std::size_t i) const { return ids.data() + i * width; }
    std::size_t find(std::span<const int32_t> key) const;
    std::pair<std::size_t, std::size_t> prefix_range(std::span<const int32_t> key) const;
  };

  std::vector<int32_t> canonical_context(std::span<const int> history) const;
  double prob_walk(int word_id, std::span<const int32_t> context) const;
  void topk_context(std::span<const int32_t> context, std::size_t k,
                    std::vector<std::pair<int, double>>* out) const;
  void build_unigram_ranking();

  int order_ = 1;
  Direction direction_ = Direction::kForward;
  int vocab_size_ = 0;  // event ids are [0, vocab_size_)
  int unk_id_ = 0;
  int bos_id_ = 0;
  std::vector<std::string> symbols_;  // events first, then markers
  std::unordered_map<std::string, int> symbol_index_;
  std::vector<Table> tables_;            // tables_[k-1] holds k-grams
  std::vector<int> unigram_ranking_;     // event ids by descending unigram prob
};

// Spec-facing alias for NGramLM::train.
NGramLM train_ngram_lm(const std::vector<Sentence>& sentences, int order,
                       Direction direction, const Vocabulary& vocab);

}  // namespace tda
