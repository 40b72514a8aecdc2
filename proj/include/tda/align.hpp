#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tda/corpus.hpp"

namespace tda {

// Word alignment links per sentence pair, 0-based (source index, target index).
struct AlignmentLinks {
  std::vector<std::vector<std::pair<int, int>>> links;  // indexed by pair id

  std::size_t size() const { return links.size(); }
};

struct TransCandidate {
  std::string target;
  double p_target_given_source = 0.0;  // direct
  double p_source_given_target = 0.0;  // inverse
};

// Dual lexical translation tables: direct p(t|s) and inverse p(s|t).
class TranslationLexicon {
 public:
  void set_direct(const std::string& source, const std::string& target, double p);
  void set_inverse(const std::string& source, const std::string& target, double p);

  double direct(const std::string& source, const std::string& target) const;
  double inverse(const std::string& source, const std::string& target) const;

  // Probability of a target word aligning to nothing, p(t|null). Kept
  // in memory for Viterbi link extraction; not serialized and never a
  // trans() candidate source.
  void set_null_direct(const std::string& target, double p);
  double null_direct(const std::string& target) const;

  // All targets with direct probability > 0, descending by direct
  // probability, ties broken lexicographically. Missing inverse entries
  // report 0.
  std::vector<TransCandidate> trans(const std::string& source) const;

  bool has_source(const std::string& source) const;
  std::size_t direct_size() const;

  // TSV `source<TAB>target<TAB>p_t_given_s<TAB>p_s_given_t`, 6 decimals.
  void save(const std::string& path) const;
  static TranslationLexicon load(const std::string& path);

  // Drops entries below the floor from both tables.
  void prune(double floor);

 private:
  using Row = std::unordered_map<std::string, double>;
  std::unordered_map<std::string, Row> direct_;   // source -> target -> p
  std::unordered_map<std::string, Row> inverse_;  // target -> source -> p
  Row null_direct_;                               // target -> p(t|null)
};

// IBM Model 1 EM in both directions; uniform initialization over
// co-occurring pairs, one virtual null token on each conditioning side.
// Final tables are pruned at 1e-6. If `log_likelihoods` is given it
// receives one corpus log-likelihood per iteration per direction
// (direct then inverse, concatenated).
TranslationLexicon train_ibm1(const ParallelCorpus& corpus, int iterations,
                              std::vector<double>* direct_log_likelihood = nullptr,
                              std::vector<double>* inverse_log_likelihood = nullptr);

// Pharaoh format, one line per pair, `i-j` entries separated by spaces.
AlignmentLinks load_alignments(const std::string& path, const ParallelCorpus& corpus);
void save_alignments(const AlignmentLinks& links, const std::string& path);

// Model 1 Viterbi links under the lexicon's direct table: each target
// position links to its most probable source position. Ties pick the
// lowest source index; the null choice unaligns a word only when strictly
// more probable than every source token.
AlignmentLinks viterbi_alignments(const ParallelCorpus& corpus,
                                  const TranslationLexicon& lexicon);

// Relative-frequency tables from explicit links:
// p(t|s) = links(s,t) / links(s,*), p(s|t) = links(s,t) / links(*,t).
TranslationLexicon lexical_tables_from_alignments(const ParallelCorpus& corpus,
                                                  const AlignmentLinks& links);

}  // namespace tda
