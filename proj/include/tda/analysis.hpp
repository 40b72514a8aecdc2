#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tda/augment.hpp"
#include "tda/corpus.hpp"
#include "tda/vocab.hpp"

namespace tda {

// Rare-word generation accounting over a system output / reference pair.
struct CoverageReport {
  uint64_t rare_in_ref = 0;    // |V_R ∩ V_ref|
  uint64_t generated = 0;      // of those, types present in the system output
  uint64_t not_generated = 0;  // complement
  uint64_t affected_by_augmentation = 0;  // post-augmentation count >= R
  std::vector<std::string> generated_words;
  std::vector<std::string> affected_words;
};

CoverageReport rare_word_coverage(const std::vector<Sentence>& system_output,
                                  const std::vector<Sentence>& references,
                                  const RareWordSet& rare,
                                  const std::map<std::string, uint64_t>& augmented_counts,
                                  uint64_t rare_threshold, bool case_fold = false);

// Total output tokens divided by total reference tokens.
double length_ratio(const std::vector<Sentence>& system_output,
                    const std::vector<Sentence>& references);

struct BleuScore {
  double score = 0.0;  // in [0,1]
  std::array<double, 4> precisions{};
  double brevity_penalty = 1.0;
  uint64_t hypothesis_length = 0;
  uint64_t reference_length = 0;
};

// Corpus-level case-insensitive 4-gram BLEU with multiplicative brevity
// penalty and no smoothing (multi-bleu semantics, single reference).
BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses,
                      const std::vector<Sentence>& references);

struct AugmentationStats {
  uint64_t total = 0;
  std::map<std::string, uint64_t> per_substitute;  // rare word -> acceptances
  std::map<int, uint64_t> per_pass;
};

AugmentationStats augmentation_stats(const std::vector<AugmentationRecord>& records);

}  // namespace tda
