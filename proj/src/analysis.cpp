#include "tda/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tda/text.hpp"

namespace tda {

namespace {

std::unordered_set<std::string> word_types(const std::vector<Sentence>& sentences,
                                           bool case_fold) {
  std::unordered_set<std::string> types;
  for (const Sentence& sentence : sentences) {
    for (const std::string& token : sentence) {
      types.insert(case_fold ? lowercase(token) : token);
    }
  }
  return types;
}

}  // namespace

CoverageReport rare_word_coverage(const std::vector<Sentence>& system_output,
                                  const std::vector<Sentence>& references,
                                  const RareWordSet& rare,
                                  const std::map<std::string, uint64_t>& augmented_counts,
                                  uint64_t rare_threshold, bool case_fold) {
  if (system_output.size() != references.size()) {
    throw std::runtime_error("coverage inputs differ in line count: " +
                             std::to_string(system_output.size()) + " vs " +
                             std::to_string(references.size()));
  }
  std::unordered_set<std::string> ref_types = word_types(references, case_fold);
  std::unordered_set<std::string> out_types = word_types(system_output, case_fold);

  CoverageReport report;
  for (const std::string& raw : rare.words) {
    std::string word = case_fold ? lowercase(raw) : raw;
    if (ref_types.count(word) == 0) continue;
    ++report.rare_in_ref;
    if (out_types.count(word) > 0) {
      ++report.generated;
      report.generated_words.push_back(word);
    } else {
      ++report.not_generated;
    }
    auto it = augmented_counts.find(raw);
    if (it != augmented_counts.end() && it->second >= rare_threshold) {
      ++report.affected_by_augmentation;
      report.affected_words.push_back(word);
    }
  }
  std::sort(report.generated_words.begin(), report.generated_words.end());
  std::sort(report.affected_words.begin(), report.affected_words.end());
  return report;
}

double length_ratio(const std::vector<Sentence>& system_output,
                    const std::vector<Sentence>& references) {
  if (system_output.size() != references.size()) {
    throw std::runtime_error("length ratio inputs differ in line count: " +
                             std::to_string(system_output.size()) + " vs " +
                             std::to_string(references.size()));
  }
  uint64_t output_tokens = 0, reference_tokens = 0;
  for (const Sentence& sentence : system_output) output_tokens += sentence.size();
  for (const Sentence& sentence : references) reference_tokens += sentence.size();
  if (reference_tokens == 0) throw std::runtime_error("empty reference corpus");
  return static_cast<double>(output_tokens) / static_cast<double>(reference_tokens);
}

BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses,
                      const std::vector<Sentence>& references) {
  if (hypotheses.empty()) throw std::runtime_error("empty hypothesis set");
  if (hypotheses.size() != references.size()) {
    throw std::runtime_error("BLEU inputs differ in line count: " +
                             std::to_string(hypotheses.size()) + " vs " +
                             std::to_string(references.size()));
  }

  constexpr int kMaxN = 4;
  std::array<uint64_t, kMaxN> matched{};
  std::array<uint64_t, kMaxN> total{};
  uint64_t hyp_len = 0, ref_len = 0;

  using NgramCounts = std::unordered_map<std::string, uint64_t>;
  auto collect = [](const Sentence& tokens, int n, NgramCounts* counts) {
    counts->clear();
    if (static_cast<int>(tokens.size()) < n) return;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int j = 1; j < n; ++j) {
        key.push_back(' ');
        key += tokens[i + j];
      }
      ++(*counts)[key];
    }
  };

  NgramCounts hyp_counts, ref_counts;
  for (std::size_t line = 0; line < hypotheses.size(); ++line) {
    Sentence hyp, ref;
    hyp.reserve(hypotheses[line].size());
    ref.reserve(references[line].size());
    for (const std::string& token : hypotheses[line]) hyp.push_back(lowercase(token));
    for (const std::string& token : references[line]) ref.push_back(lowercase(token));
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (int n = 1; n <= kMaxN; ++n) {
      collect(hyp, n, &hyp_counts);
      collect(ref, n, &ref_counts);
      for (const auto& [gram, count] : hyp_counts) {
        total[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  BleuScore bleu;
  bleu.hypothesis_length = hyp_len;
  bleu.reference_length = ref_len;
  bleu.brevity_penalty =
      (hyp_len < ref_len && hyp_len > 0)
          ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
          : 1.0;

  double log_precision_sum = 0.0;
  bool any_zero = false;
  for (int n = 0; n < kMaxN; ++n) {
    bleu.precisions[n] =
        total[n] == 0 ? 0.0
                      : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    if (bleu.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_precision_sum += std::log(bleu.precisions[n]);
    }
  }
  bleu.score = any_zero ? 0.0 : bleu.brevity_penalty * std::exp(log_precision_sum / kMaxN);
  return bleu;
}

AugmentationStats augmentation_stats(const std::vector<AugmentationRecord>& records) {
  AugmentationStats stats;
  stats.total = records.size();
  for (const AugmentationRecord& record : records) {
    ++stats.per_substitute[record.substitute];
    ++stats.per_pass[record.pass_number];
  }
  return stats;
}

}  // namespace tda
