#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tda/align.hpp"
#include "tda/corpus.hpp"
#include "tda/ngram_lm.hpp"
#include "tda/rng.hpp"
#include "tda/vocab.hpp"

namespace tda {

enum class AugmentMode { kR1, kRGe1 };

const char* augment_mode_name(AugmentMode mode);
AugmentMode parse_augment_mode(const std::string& name);

struct AugmentConfig {
  uint64_t rare_threshold = 100;  // R: occurrences below this make a word rare
  std::size_t top_k = 1000;       // K: agreement window of both LMs
  uint64_t max_per_word = 500;    // N: accepted substitutions per rare word
  double lm_floor = 1e-4;         // minimum target-LM factor of the winner
  AugmentMode mode = AugmentMode::kR1;
  int min_distance = 5;           // minimum gap between positions in r_ge1
  int max_passes = 20;
  uint64_t seed = 1;
  int threads = 0;                // 0 = hardware concurrency

  void validate() const;  // throws on invariant violations
};

// One accepted substitution: source word replaced by a rare word, aligned
// target word rewritten. pair_id references the original pair.
struct AugmentationRecord {
  std::size_t pair_id = 0;
  int source_position = 0;
  std::string source_original;
  std::string substitute;
  int target_position = 0;
  std::string target_original;
  std::string replacement;
  int forward_rank = 0;   // 1-based rank in the forward top-K list
  int backward_rank = 0;  // 1-based rank in the backward top-K list
  double translation_score = 0.0;
  int pass_number = 0;
};

// Immutable model bundle; forward/backward LMs and the vocabulary belong
// to the substitution side, target_lm/lexicon/links to the other side.
struct TdaModels {
  const NGramLM* forward = nullptr;
  const NGramLM* backward = nullptr;
  const NGramLM* target_lm = nullptr;
  const AlignmentLinks* links = nullptr;
  const TranslationLexicon* lexicon = nullptr;
  const RareWordSet* rare = nullptr;
  const Vocabulary* vocab = nullptr;
};

struct SubstituteCandidate {
  std::string word;
  int forward_rank = 0;
  int backward_rank = 0;
  double combined_logp = 0.0;
};

// Rare words ranked in both top-K lists at position i, minus the original
// word, ordered by combined log probability (ties by vocabulary id).
std::vector<SubstituteCandidate> ranked_substitutions(const SentencePair& pair, int i,
                                                      const TdaModels& models,
                                                      std::size_t top_k);

// The agreement set itself, unordered.
std::unordered_set<std::string> candidate_substitutions(const SentencePair& pair, int i,
                                                        const TdaModels& models,
                                                        std::size_t top_k);

enum class DiscardReason {
  kNoCandidates,
  kBudgetExhausted,
  kUnaligned,
  kNoTranslation,
  kBelowLmFloor,
  kZeroScore,
  kReplacementEqualsOriginal,
  kTargetCollision,
  kDuplicatePair,
};

const char* discard_reason_name(DiscardReason reason);

struct TranslationChoice {
  bool accepted = false;
  int target_position = -1;
  std::string replacement;
  double score = 0.0;
  double lm_factor = 0.0;
  DiscardReason reason = DiscardReason::kUnaligned;
};

// Picks the aligned target position of s_i and the best replacement for
// `substitute` by direct * inverse * target-LM probability. Discards when
// s_i is unaligned, the lexicon has no candidates, the winner's LM factor
// is below the floor, or every candidate scores zero.
TranslationChoice select_translation(const SentencePair& pair, int i,
                                     const std::string& substitute,
                                     const AlignmentLinks& links,
                                     const TranslationLexicon& lexicon,
                                     const NGramLM& target_lm, double lm_floor);

// Tracks accepted substitutions per rare word against the N cap.
class RareBudget {
 public:
  explicit RareBudget(uint64_t cap) : cap_(cap) {}
  uint64_t used(const std::string& word) const {
    auto it = used_.find(word);
    return it == used_.end() ? 0 : it->second;
  }
  bool available(const std::string& word, uint64_t tentative = 0) const {
    return used(word) + tentative < cap_;
  }
  void charge(const std::string& word, uint64_t times = 1) { used_[word] += times; }
  uint64_t cap() const { return cap_; }

 private:
  uint64_t cap_;
  std::unordered_map<std::string, uint64_t> used_;
};

// Source positions whose token is a common in-vocabulary word (not unk,
// not rare): the places where a rare word may be substituted in.
std::vector<int> eligible_positions(const Sentence& source, const Vocabulary& vocab,
                                    const RareWordSet& rare);

// Draws substitution positions for one sentence: a single uniform draw in
// r1 mode; repeated draws at pairwise distance >= min_distance in r_ge1.
std::vector<int> sample_positions(const std::vector<int>& eligible, AugmentMode mode,
                                  int min_distance, Rng* rng);

// Applies the augmentation rules to one pair at the given positions.
// All accepted substitutions go into a single new pair. Budget state is
// consulted (candidates whose word is exhausted are skipped) but only
// tentatively; the caller charges it once the pair is actually kept.
// Returns at most one (pair, records) entry.
std::vector<std::pair<SentencePair, std::vector<AugmentationRecord>>> augment_pair(
    const SentencePair& pair, const std::vector<int>& positions, const TdaModels& models,
    const AugmentConfig& config, const RareBudget* budget = nullptr, int pass_number = 1,
    std::map<std::string, uint64_t>* discard_counts = nullptr);

struct AugmentResult {
  ParallelCorpus corpus;  // originals followed by accepted pairs
  std::vector<AugmentationRecord> records;
  std::map<std::string, uint64_t> discard_counts;
  int passes_run = 0;
  // position_trace[pass][pair id] = sampled positions (when collected)
  std::vector<std::vector<std::vector<int>>> position_trace;
};

// The full sweep loop: samples positions per sentence per pass, applies
// substitutions under the N cap, deduplicates against originals and
// earlier outputs, and stops after a pass that accepts nothing.
AugmentResult run_tda(const ParallelCorpus& corpus, const TdaModels& models,
                      const AugmentConfig& config, bool collect_trace = false);

// Appends one unchanged copy of the referenced original pair per record.
// Deliberately skips deduplication.
ParallelCorpus oversample(const ParallelCorpus& corpus,
                          const std::vector<AugmentationRecord>& records);

// JSON-lines serialization of augmentation records.
void save_records(const std::vector<AugmentationRecord>& records, const std::string& path);
std::vector<AugmentationRecord> load_records(const std::string& path);

}  // namespace tda
