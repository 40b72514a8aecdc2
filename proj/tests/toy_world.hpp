#pragma once

#include <random>
#include <string>
#include <vector>

#include "tda/align.hpp"
#include "tda/augment.hpp"
#include "tda/corpus.hpp"
#include "tda/ngram_lm.hpp"
#include "tda/vocab.hpp"

namespace tda::test {

// A small self-consistent augmentation setup: bitext with roughly
// diagonal alignments, vocabularies, rare set, order-2 LMs, and a lexicon
// built from the links.
struct ToyWorld {
  ParallelCorpus corpus;
  Vocabulary vocab;         // substitution side
  Vocabulary target_vocab;
  RareWordSet rare;
  NGramLM forward;
  NGramLM backward;
  NGramLM target_lm;
  AlignmentLinks links;
  TranslationLexicon lexicon;
  AugmentConfig config;

  TdaModels models() const {
    TdaModels m;
    m.forward = &forward;
    m.backward = &backward;
    m.target_lm = &target_lm;
    m.links = &links;
    m.lexicon = &lexicon;
    m.rare = &rare;
    m.vocab = &vocab;
    return m;
  }
};

inline ToyWorld make_toy_world(uint64_t seed, std::size_t max_pairs = 50,
                               std::size_t word_types = 20) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(gen() % n); };

  ToyWorld world;

  // Skewed source distribution so some words end up rare. Target token k
  // mirrors source token k to give the aligner something learnable.
  std::size_t pairs = 5 + pick(max_pairs - 4);
  for (std::size_t p = 0; p < pairs; ++p) {
    std::size_t len = 3 + pick(8);
    Sentence src, tgt;
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t zipf = std::min(pick(word_types), pick(word_types));
      src.push_back("s" + std::to_string(zipf));
      // Mostly faithful word-for-word translation with occasional noise.
      if (pick(10) == 0) {
        tgt.push_back("t" + std::to_string(pick(word_types)));
      } else {
        tgt.push_back("t" + std::to_string(zipf));
      }
    }
    // Occasional extra target token changes m relative to n.
    if (pick(4) == 0) tgt.push_back("t" + std::to_string(pick(word_types)));
    world.corpus.append(src, tgt);
  }

  world.vocab = Vocabulary::build(world.corpus.source_sentences(), word_types + 4);
  world.target_vocab = Vocabulary::build(world.corpus.target_sentences(), word_types + 4);

  uint64_t threshold = 2 + pick(4);
  world.rare = rare_words(world.vocab, threshold);

  world.forward =
      NGramLM::train(world.corpus.source_sentences(), 2, Direction::kForward, world.vocab);
  world.backward =
      NGramLM::train(world.corpus.source_sentences(), 2, Direction::kBackward, world.vocab);
  world.target_lm = NGramLM::train(world.corpus.target_sentences(), 2, Direction::kForward,
                                   world.target_vocab);

  // Diagonal links with occasional dropouts.
  world.links.links.resize(world.corpus.size());
  for (const SentencePair& pair : world.corpus.pairs()) {
    std::size_t n = std::min(pair.source.size(), pair.target.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (pick(8) == 0) continue;  // unaligned word
      world.links.links[pair.id].push_back({static_cast<int>(i), static_cast<int>(i)});
    }
  }
  world.lexicon = lexical_tables_from_alignments(world.corpus, world.links);

  world.config.rare_threshold = threshold;
  world.config.top_k = 2 + pick(8);
  world.config.max_per_word = 1 + pick(4);
  world.config.lm_floor = 1e-6;
  world.config.mode = pick(2) == 0 ? AugmentMode::kR1 : AugmentMode::kRGe1;
  world.config.min_distance = 5;
  world.config.max_passes = 1 + static_cast<int>(pick(4));
  world.config.seed = gen();
  world.config.threads = 1 + static_cast<int>(pick(3));
  return world;
}

}  // namespace tda::test
