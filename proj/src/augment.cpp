#include "tda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tda/io.hpp"
#include "tda/text.hpp"

namespace tda {

const char* augment_mode_name(AugmentMode mode) {
  return mode == AugmentMode::kR1 ? "r1" : "r_ge1";
}

AugmentMode parse_augment_mode(const std::string& name) {
  if (name == "r1") return AugmentMode::kR1;
  if (name == "r_ge1") return AugmentMode::kRGe1;
  throw std::runtime_error("unknown augmentation mode: " + name);
}

const char* discard_reason_name(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::kNoCandidates: return "no_candidates";
    case DiscardReason::kBudgetExhausted: return "budget_exhausted";
    case DiscardReason::kUnaligned: return "unaligned";
    case DiscardReason::kNoTranslation: return "no_translation";
    case DiscardReason::kBelowLmFloor: return "below_lm_floor";
    case DiscardReason::kZeroScore: return "zero_score";
    case DiscardReason::kReplacementEqualsOriginal: return "replacement_equals_original";
    case DiscardReason::kTargetCollision: return "target_collision";
    case DiscardReason::kDuplicatePair: return "duplicate_pair";
  }
  return "unknown";
}

void AugmentConfig::validate() const {
  if (rare_threshold < 1) throw std::runtime_error("rare_threshold must be >= 1");
  if (top_k < 1) throw std::runtime_error("top_k must be >= 1");
  if (max_per_word < 1) throw std::runtime_error("max_per_word must be >= 1");
  if (!(lm_floor > 0.0 && lm_floor < 1.0)) {
    throw std::runtime_error("lm_floor must be in (0,1)");
  }
  if (min_distance < 1) throw std::runtime_error("min_distance must be >= 1");
  if (max_passes < 1) throw std::runtime_error("max_passes must be >= 1");
  if (threads < 0) throw std::runtime_error("threads must be >= 0");
}

namespace {

// Per-worker state: id translation tables between the two substitution-side
// models plus reusable scratch, so hot loops stay allocation-free.
struct CandidateFinder {
  const TdaModels& models;
  int fwd_order;
  int bwd_order;
  std::vector<int> fwd_to_bwd;
  std::vector<int> fwd_to_vocab;
  std::vector<char> fwd_rare;
  // backward top-K membership, stamped to avoid clearing
  std::vector<int> bwd_stamp;
  std::vector<int> bwd_rank;
  std::vector<double> bwd_prob;
  int stamp = 0;
  std::vector<std::pair<int, double>> fwd_top, bwd_top;

  explicit CandidateFinder(const TdaModels& m)
      : models(m),
        fwd_order(m.forward->order()),
        bwd_order(m.backward->order()) {
    std::size_t fv = m.forward->vocab_size();
    fwd_to_bwd.resize(fv);
    fwd_to_vocab.resize(fv);
    fwd_rare.resize(fv, 0);
    for (std::size_t id = 0; id < fv; ++id) {
      const std::string& word = m.forward->word(static_cast<int>(id));
      fwd_to_bwd[id] = m.backward->word_id(word);
      fwd_to_vocab[id] = m.vocab->id(word);
      fwd_rare[id] = m.rare->contains(word) ? 1 : 0;
    }
    // A vocabulary mismatch between the models would fold distinct words
    // onto unk; rare words folded that way can never agree.
    bwd_stamp.assign(m.backward->vocab_size(), -1);
    bwd_rank.resize(m.backward->vocab_size());
    bwd_prob.resize(m.backward->vocab_size());
  }

  // Token ids for a sentence under each model.
  void map_ids(const Sentence& tokens, std::vector<int>* fwd_ids,
               std::vector<int>* bwd_ids) const {
    fwd_ids->clear();
    bwd_ids->clear();
    fwd_ids->reserve(tokens.size());
    bwd_ids->reserve(tokens.size());
    for (const std::string& token : tokens) {
      fwd_ids->push_back(models.forward->word_id(token));
      bwd_ids->push_back(models.backward->word_id(token));
    }
  }

  std::vector<SubstituteCandidate> ranked(const Sentence& source,
                                          const std::vector<int>& fwd_ids,
                                          const std::vector<int>& bwd_ids, int i,
                                          std::size_t top_k) {
    int n = static_cast<int>(source.size());
    int fwd_ctx = fwd_order - 1;
    int bwd_ctx = bwd_order - 1;
    int fwd_begin = std::max(0, i - fwd_ctx);
    std::span<const int> fwd_hist(fwd_ids.data() + fwd_begin,
                                  static_cast<std::size_t>(i - fwd_begin));
    int bwd_end = std::min(n, i + 1 + bwd_ctx);
    std::span<const int> bwd_hist(bwd_ids.data() + i + 1,
                                  static_cast<std::size_t>(std::max(0, bwd_end - i - 1)));

    models.forward->topk_ids(fwd_hist, top_k, &fwd_top);
    models.backward->topk_ids(bwd_hist, top_k, &bwd_top);

    ++stamp;
    for (std::size_t r = 0; r < bwd_top.size(); ++r) {
      int id = bwd_top[r].first;
      bwd_stamp[id] = stamp;
      bwd_rank[id] = static_cast<int>(r) + 1;
      bwd_prob[id] = bwd_top[r].second;
    }

    std::vector<SubstituteCandidate> out;
    for (std::size_t r = 0; r < fwd_top.size(); ++r) {
      int f = fwd_top[r].first;
      if (!fwd_rare[f]) continue;
      int b = fwd_to_bwd[f];
      if (b == 0 && models.forward->word(f) != models.backward->word(0)) continue;
      if (bwd_stamp[b] != stamp) continue;
      const std::string& word = models.forward->word(f);
      if (word == source[static_cast<std::size_t>(i)]) continue;
      SubstituteCandidate cand;
      cand.word = word;
      cand.forward_rank = static_cast<int>(r) + 1;
      cand.backward_rank = bwd_rank[b];
      cand.combined_logp = std::log(fwd_top[r].second) + std::log(bwd_prob[b]);
      out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end(),
              [&](const SubstituteCandidate& a, const SubstituteCandidate& b) {
                if (a.combined_logp != b.combined_logp) {
                  return a.combined_logp > b.combined_logp;
                }
                return models.vocab->id(a.word) < models.vocab->id(b.word);
              });
    return out;
  }
};

void check_models(const TdaModels& models) {
  if (models.forward == nullptr || models.backward == nullptr ||
      models.target_lm == nullptr || models.links == nullptr ||
      models.lexicon == nullptr || models.rare == nullptr || models.vocab == nullptr) {
    throw std::runtime_error("incomplete model bundle for augmentation");
  }
}

// Tokens never contain whitespace, so this key is collision-free.
std::string dedup_key(const Sentence& source, const Sentence& target) {
  std::string key = join_tokens(source);
  key.push_back('\n');
  key += join_tokens(target);
  return key;
}

}  // namespace

std::vector<SubstituteCandidate> ranked_substitutions(const SentencePair& pair, int i,
                                                      const TdaModels& models,
                                                      std::size_t top_k) {
  check_models(models);
  if (i < 0 || i >= static_cast<int>(pair.source.size())) {
    throw std::runtime_error("substitution position out of range");
  }
  CandidateFinder finder(models);
  std::vector<int> fwd_ids, bwd_ids;
  finder.map_ids(pair.source, &fwd_ids, &bwd_ids);
  return finder.ranked(pair.source, fwd_ids, bwd_ids, i, top_k);
}

std::unordered_set<std::string> candidate_substitutions(const SentencePair& pair, int i,
                                                        const TdaModels& models,
                                                        std::size_t top_k) {
  std::unordered_set<std::string> out;
  for (SubstituteCandidate& cand : ranked_substitutions(pair, i, models, top_k)) {
    out.insert(std::move(cand.word));
  }
  return out;
}

TranslationChoice select_translation(const SentencePair& pair, int i,
                                     const std::string& substitute,
                                     const AlignmentLinks& links,
                                     const TranslationLexicon& lexicon,
                                     const NGramLM& target_lm, double lm_floor) {
  TranslationChoice choice;
  if (pair.id >= links.size()) {
    choice.reason = DiscardReason::kUnaligned;
    return choice;
  }

  // Aligned target position of s_i; fan-out resolved by the direct table,
  // ties toward the lowest index.
  int best_j = -1;
  double best_j_score = -1.0;
  for (const auto& [li, lj] : links.links[pair.id]) {
    if (li != i) continue;
    double p = lexicon.direct(pair.source[static_cast<std::size_t>(i)],
                              pair.target[static_cast<std::size_t>(lj)]);
    if (p > best_j_score) {
      best_j_score = p;
      best_j = lj;
    }
  }
  if (best_j < 0) {
    choice.reason = DiscardReason::kUnaligned;
    return choice;
  }
  choice.target_position = best_j;

  std::vector<TransCandidate> candidates = lexicon.trans(substitute);
  if (candidates.empty()) {
    choice.reason = DiscardReason::kNoTranslation;
    return choice;
  }

  int ctx = target_lm.order() - 1;
  int begin = std::max(0, best_j - ctx);
  std::vector<int> history;
  history.reserve(static_cast<std::size_t>(best_j - begin));
  for (int j = begin; j < best_j; ++j) {
    history.push_back(target_lm.word_id(pair.target[static_cast<std::size_t>(j)]));
  }

  bool have_winner = false;
  double best_score = 0.0;
  for (const TransCandidate& cand : candidates) {
    double lmp = target_lm.prob_id(target_lm.word_id(cand.target), history);
    double score = (cand.p_source_given_target * cand.p_target_given_source) * lmp;
    if (!have_winner || score > best_score) {
      have_winner = true;
      best_score = score;
      choice.replacement = cand.target;
      choice.lm_factor = lmp;
    }
  }
  choice.score = best_score;
  if (choice.lm_factor < lm_floor) {
    choice.reason = DiscardReason::kBelowLmFloor;
    return choice;
  }
  if (choice.score <= 0.0) {
    choice.reason = DiscardReason::kZeroScore;
    return choice;
  }
  choice.accepted = true;
  return choice;
}

std::vector<int> eligible_positions(const Sentence& source, const Vocabulary& vocab,
                                    const RareWordSet& rare) {
  std::vector<int> out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (vocab.id(source[i]) == 0) continue;  // OOV or the unk token itself
    if (rare.contains(source[i])) continue;
    out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> sample_positions(const std::vector<int>& eligible, AugmentMode mode,
                                  int min_distance, Rng* rng) {
  std::vector<int> chosen;
  if (eligible.empty()) return chosen;
  if (mode == AugmentMode::kR1) {
    chosen.push_back(eligible[rng->below(eligible.size())]);
    return chosen;
  }
  std::vector<int> remaining = eligible;
  while (!remaining.empty()) {
    int pos = remaining[rng->below(remaining.size())];
    chosen.push_back(pos);
    std::vector<int> next;
    next.reserve(remaining.size());
    for (int p : remaining) {
      if (std::abs(p - pos) >= min_distance) next.push_back(p);
    }
    remaining = std::move(next);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {

struct PositionProposal {
  int position = 0;
  std::vector<SubstituteCandidate> candidates;
};

// Shared acceptance walk used by both augment_pair and run_tda. Returns
// the new pair with its records, or nothing if no position was accepted.
std::optional<std::pair<SentencePair, std::vector<AugmentationRecord>>> apply_proposals(
    const SentencePair& pair, const std::vector<PositionProposal>& proposals,
    const TdaModels& models, const AugmentConfig& config, const RareBudget* budget,
    int pass_number, std::map<std::string, uint64_t>* discard_counts) {
  auto discard = [&](DiscardReason reason) {
    if (discard_counts != nullptr) ++(*discard_counts)[discard_reason_name(reason)];
  };

  SentencePair out = pair;
  std::vector<AugmentationRecord> records;
  std::unordered_map<std::string, uint64_t> tentative;
  std::unordered_set<int> used_targets;

  for (const PositionProposal& proposal : proposals) {
    if (proposal.candidates.empty()) {
      discard(DiscardReason::kNoCandidates);
      continue;
    }
    const SubstituteCandidate* chosen = nullptr;
    for (const SubstituteCandidate& cand : proposal.candidates) {
      uint64_t extra = 0;
      if (auto it = tentative.find(cand.word); it != tentative.end()) extra = it->second;
      if (budget != nullptr && !budget->available(cand.word, extra)) continue;
      if (budget == nullptr && extra >= config.max_per_word) continue;
      chosen = &cand;
      break;
    }
    if (chosen == nullptr) {
      discard(DiscardReason::kBudgetExhausted);
      continue;
    }
    TranslationChoice choice =
        select_translation(pair, proposal.position, chosen->word, *models.links,
                           *models.lexicon, *models.target_lm, config.lm_floor);
    if (!choice.accepted) {
      discard(choice.reason);
      continue;
    }
    const std::string& original_target =
        pair.target[static_cast<std::size_t>(choice.target_position)];
    if (choice.replacement == original_target) {
      discard(DiscardReason::kReplacementEqualsOriginal);
      continue;
    }
    if (used_targets.count(choice.target_position) > 0) {
      discard(DiscardReason::kTargetCollision);
      continue;
    }

    AugmentationRecord record;
    record.pair_id = pair.id;
    record.source_position = proposal.position;
    record.source_original = pair.source[static_cast<std::size_t>(proposal.position)];
    record.substitute = chosen->word;
    record.target_position = choice.target_position;
    record.target_original = original_target;
    record.replacement = choice.replacement;
    record.forward_rank = chosen->forward_rank;
    record.backward_rank = chosen->backward_rank;
    record.translation_score = choice.score;
    record.pass_number = pass_number;
    records.push_back(std::move(record));

    out.source[static_cast<std::size_t>(proposal.position)] = chosen->word;
    out.target[static_cast<std::size_t>(choice.target_position)] = choice.replacement;
    ++tentative[chosen->word];
    used_targets.insert(choice.target_position);
  }

  if (records.empty()) return std::nullopt;
  return std::make_pair(std::move(out), std::move(records));
}

void validate_positions(const std::vector<int>& positions, const SentencePair& pair,
                        const AugmentConfig& config) {
  for (int pos : positions) {
    if (pos < 0 || pos >= static_cast<int>(pair.source.size())) {
      throw std::runtime_error("substitution position out of range");
    }
  }
  if (config.mode == AugmentMode::kR1) {
    if (positions.size() > 1) {
      throw std::runtime_error("r1 mode takes a single substitution position");
    }
  } else {
    for (std::size_t a = 0; a < positions.size(); ++a) {
      for (std::size_t b = a + 1; b < positions.size(); ++b) {
        if (std::abs(positions[a] - positions[b]) < config.min_distance) {
          throw std::runtime_error("substitution positions closer than min_distance");
        }
      }
    }
  }
}

}  // namespace

std::vector<std::pair<SentencePair, std::vector<AugmentationRecord>>> augment_pair(
    const SentencePair& pair, const std::vector<int>& positions, const TdaModels& models,
    const AugmentConfig& config, const RareBudget* budget, int pass_number,
    std::map<std::string, uint64_t>* discard_counts) {
  check_models(models);
  config.validate();
  validate_positions(positions, pair, config);

  CandidateFinder finder(models);
  std::vector<int> fwd_ids, bwd_ids;
  finder.map_ids(pair.source, &fwd_ids, &bwd_ids);

  std::vector<int> ordered = positions;
  std::sort(ordered.begin(), ordered.end());
  std::vector<PositionProposal> proposals;
  proposals.reserve(ordered.size());
  for (int pos : ordered) {
    PositionProposal proposal;
    proposal.position = pos;
    proposal.candidates = finder.ranked(pair.source, fwd_ids, bwd_ids, pos, config.top_k);
    proposals.push_back(std::move(proposal));
  }

  std::vector<std::pair<SentencePair, std::vector<AugmentationRecord>>> out;
  auto result = apply_proposals(pair, proposals, models, config, budget, pass_number,
                                discard_counts);
  if (result.has_value()) out.push_back(std::move(*result));
  return out;
}

AugmentResult run_tda(const ParallelCorpus& corpus, const TdaModels& models,
                      const AugmentConfig& config, bool collect_trace) {
  check_models(models);
  config.validate();

  AugmentResult result;
  result.corpus = corpus;

  std::unordered_set<std::string> seen;
  seen.reserve(corpus.size() * 2);
  for (const SentencePair& pair : corpus.pairs()) {
    seen.insert(dedup_key(pair.source, pair.target));
  }

  RareBudget budget(config.max_per_word);

  unsigned hardware = std::thread::hardware_concurrency();
  std::size_t worker_count = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                                : std::max(1u, hardware);
  worker_count = std::min(worker_count, corpus.size() > 0 ? corpus.size() : std::size_t{1});

  struct PairProposals {
    std::vector<int> positions;
    std::vector<PositionProposal> proposals;
  };

  for (int pass = 1; pass <= config.max_passes; ++pass) {
    std::vector<PairProposals> all(corpus.size());

    auto worker = [&](std::size_t begin, std::size_t end) {
      CandidateFinder finder(models);
      std::vector<int> fwd_ids, bwd_ids;
      for (std::size_t p = begin; p < end; ++p) {
        const SentencePair& pair = corpus.pair(p);
        Rng rng(derive_seed(config.seed, static_cast<uint64_t>(pass), p));
        std::vector<int> eligible = eligible_positions(pair.source, *models.vocab, *models.rare);
        std::vector<int> positions =
            sample_positions(eligible, config.mode, config.min_distance, &rng);
        PairProposals& slot = all[p];
        slot.positions = positions;
        if (positions.empty()) continue;
        finder.map_ids(pair.source, &fwd_ids, &bwd_ids);
        slot.proposals.reserve(positions.size());
        for (int pos : positions) {
          PositionProposal proposal;
          proposal.position = pos;
          proposal.candidates =
              finder.ranked(pair.source, fwd_ids, bwd_ids, pos, config.top_k);
          slot.proposals.push_back(std::move(proposal));
        }
      }
    };

    if (worker_count <= 1 || corpus.size() < 2) {
      worker(0, corpus.size());
    } else {
      std::vector<std::thread> threads;
      std::size_t chunk = (corpus.size() + worker_count - 1) / worker_count;
      for (std::size_t t = 0; t < worker_count; ++t) {
        std::size_t begin = t * chunk;
        std::size_t end = std::min(corpus.size(), begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(worker, begin, end);
      }
      for (std::thread& thread : threads) thread.join();
    }

    if (collect_trace) {
      std::vector<std::vector<int>> pass_trace;
      pass_trace.reserve(corpus.size());
      for (const PairProposals& slot : all) pass_trace.push_back(slot.positions);
      result.position_trace.push_back(std::move(pass_trace));
    }

    // Acceptance is sequential in pair-id order so budgets, dedup, and
    // output ids never depend on worker scheduling.
    std::size_t added = 0;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
      if (all[p].proposals.empty()) continue;
      auto outcome = apply_proposals(corpus.pair(p), all[p].proposals, models, config,
                                     &budget, pass, &result.discard_counts);
      if (!outcome.has_value()) continue;
      auto& [new_pair, records] = *outcome;
      std::string key = dedup_key(new_pair.source, new_pair.target);
      if (seen.count(key) > 0) {
        ++result.discard_counts[discard_reason_name(DiscardReason::kDuplicatePair)];
        continue;
      }
      seen.insert(std::move(key));
      for (const AugmentationRecord& record : records) budget.charge(record.substitute);
      result.corpus.append(new_pair.source, new_pair.target);
      result.records.insert(result.records.end(),
                            std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
      ++added;
    }

    result.passes_run = pass;
    if (added == 0) break;
  }

  return result;
}

ParallelCorpus oversample(const ParallelCorpus& corpus,
                          const std::vector<AugmentationRecord>& records) {
  ParallelCorpus out = corpus;
  for (const AugmentationRecord& record : records) {
    if (record.pair_id >= corpus.size()) {
      throw std::runtime_error("oversample record references missing pair " +
                               std::to_string(record.pair_id));
    }
    const SentencePair& pair = corpus.pair(record.pair_id);
    out.append(pair.source, pair.target);
  }
  return out;
}

void save_records(const std::vector<AugmentationRecord>& records, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const AugmentationRecord& record : records) {
    nlohmann::ordered_json j;
    j["pair_id"] = record.pair_id;
    j["source_position"] = record.source_position;
    j["source_original"] = record.source_original;
    j["substitute"] = record.substitute;
    j["target_position"] = record.target_position;
    j["target_original"] = record.target_original;
    j["replacement"] = record.replacement;
    j["forward_rank"] = record.forward_rank;
    j["backward_rank"] = record.backward_rank;
    j["translation_score"] = record.translation_score;
    j["pass_number"] = record.pass_number;
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::vector<AugmentationRecord> load_records(const std::string& path) {
  std::vector<AugmentationRecord> records;
  std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("bad records line " + std::to_string(i + 1) + " in " +
                               path + ": " + e.what());
    }
    AugmentationRecord record;
    record.pair_id = j.at("pair_id").get<std::size_t>();
    record.source_position = j.at("source_position").get<int>();
    record.source_original = j.at("source_original").get<std::string>();
    record.substitute = j.at("substitute").get<std::string>();
    record.target_position = j.at("target_position").get<int>();
    record.target_original = j.at("target_original").get<std::string>();
    record.replacement = j.at("replacement").get<std::string>();
    record.forward_rank = j.at("forward_rank").get<int>();
    record.backward_rank = j.at("backward_rank").get<int>();
    record.translation_score = j.at("translation_score").get<double>();
    record.pass_number = j.at("pass_number").get<int>();
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace tda
