#include <doctest.h>

#include <algorithm>
#include <random>

#include "tda/analysis.hpp"
#include "test_util.hpp"

using namespace tda;

namespace {

// 20-sentence BLEU fixture; the expected score was computed with an
// independent exact-fraction implementation of multi-bleu semantics
// (case-insensitive fold, corpus-level modified precision, multiplicative
// brevity penalty, no smoothing).
const std::vector<std::string> kHyp = {
    "the tunnel has a cross section of about two meters",
    "my sister drives a motorbike to work every day",
    "registered users will receive the newsletter free of charge",
    "The Commission finds the present situation unacceptable",
    "die situation ist unhaltbar und v\xC3\xB6llig unannehmbar",
    "the average speed of cars is twenty kilometres per hour",
    "all suites are spacious and measure fifty square metres",
    "he bought two shirts and a jacket yesterday",
    "Alice waters the plant every single morning",
    "the speed limit is five kilometers per hour here",
    "grab cranes handle capacities of up to eighteen hundred tonnes",
    "the personal contact is essential to us",
    "mir wurde signalisiert sie w\xC3\xBCrden heute nicht sprechen",
    "the parliament agreed wholeheartedly with the delegation",
    "the baseline translation left rare words untranslated",
    "data augmentation creates novel contexts for rare words",
    "the language model suggests plausible substitutions in context",
    "word alignments link source and target tokens",
    "byte pair encoding splits words into subword units",
    "the brevity penalty punishes short hypotheses",
};

const std::vector<std::string> kRef = {
    "the tunnel has a cross section measuring two metres",
    "my sister drives a car to work every day",
    "registered users will receive the newsletter free of charge",
    "the commission finds the current situation completely unacceptable",
    "die Situation ist unhaltbar und g\xC3\xA4nzlich unannehmbar",
    "the average speed of cars and buses is twenty kilometres per hour",
    "all suites are very spacious and measure seventy square metres",
    "he bought two shirts and a coat yesterday",
    "alice waters the plants every morning",
    "the speed limit is fifty kilometers per hour there",
    "grab cranes in special terminals handle up to eighteen hundred tonnes",
    "personal contact is very important to us",
    "mir wurde signalisiert sie wuerden heute nicht sprechen",
    "parliament agreed wholeheartedly with the ad hoc delegation",
    "the baseline translation left rare words untranslated",
    "data augmentation provides novel contexts for rare words",
    "the language model proposes plausible substitutions in context",
    "word alignments connect source and target tokens",
    "byte pair encoding splits words into subword units",
    "the brevity penalty penalises short hypotheses",
};

constexpr double kExpectedBleu = 0.5853064938;

RareWordSet make_rare(const std::vector<std::string>& words, uint64_t threshold) {
  RareWordSet rare;
  rare.threshold = threshold;
  rare.words.insert(words.begin(), words.end());
  return rare;
}

}  // namespace

TEST_CASE("corpus_bleu matches the independent reference value") {
  BleuScore bleu = corpus_bleu(test::sentences(kHyp), test::sentences(kRef));
  CHECK(bleu.score == doctest::Approx(kExpectedBleu).epsilon(1e-4));
  CHECK(bleu.precisions[0] == doctest::Approx(139.0 / 161.0).epsilon(1e-9));
  CHECK(bleu.precisions[1] == doctest::Approx(98.0 / 141.0).epsilon(1e-9));
  CHECK(bleu.precisions[2] == doctest::Approx(66.0 / 121.0).epsilon(1e-9));
  CHECK(bleu.precisions[3] == doctest::Approx(40.0 / 101.0).epsilon(1e-9));
  CHECK(bleu.brevity_penalty == doctest::Approx(0.9754613694256568).epsilon(1e-9));
}

TEST_CASE("corpus_bleu identity scores one") {
  auto hyp = test::sentences({"a b c d", "e f g h"});
  BleuScore bleu = corpus_bleu(hyp, hyp);
  CHECK(bleu.score == 1.0);
  CHECK(bleu.brevity_penalty == 1.0);
  for (double p : bleu.precisions) CHECK(p == 1.0);
}

TEST_CASE("corpus_bleu zero overlap scores zero") {
  BleuScore bleu = corpus_bleu(test::sentences({"a a a a"}), test::sentences({"b b b b"}));
  CHECK(bleu.score == 0.0);
}

TEST_CASE("corpus_bleu is case-insensitive") {
  auto hyp = test::sentences({"The Quick Brown FOX jumps"});
  auto ref = test::sentences({"the quick brown fox jumps"});
  CHECK(corpus_bleu(hyp, ref).score == 1.0);
}

TEST_CASE("corpus_bleu is invariant under joint permutation") {
  std::mt19937 gen(131);
  std::vector<std::size_t> order(kHyp.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int round = 0; round < 5; ++round) {
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<std::string> hyp, ref;
    for (std::size_t i : order) {
      hyp.push_back(kHyp[i]);
      ref.push_back(kRef[i]);
    }
    BleuScore shuffled = corpus_bleu(test::sentences(hyp), test::sentences(ref));
    CHECK(shuffled.score == doctest::Approx(kExpectedBleu).epsilon(1e-4));
  }
}

TEST_CASE("corpus_bleu validates inputs") {
  CHECK_THROWS_AS(corpus_bleu({}, {}), std::runtime_error);
  CHECK_THROWS_AS(corpus_bleu(test::sentences({"a"}), test::sentences({"a", "b"})),
                  std::runtime_error);
}

TEST_CASE("length_ratio") {
  SUBCASE("identity") {
    auto s = test::sentences({"a b c", "d e"});
    CHECK(length_ratio(s, s) == 1.0);
  }
  SUBCASE("88 over 100") {
    std::vector<Sentence> out(1), ref(1);
    for (int i = 0; i < 88; ++i) out[0].push_back("w");
    for (int i = 0; i < 100; ++i) ref[0].push_back("w");
    CHECK(length_ratio(out, ref) == 0.88);
  }
  SUBCASE("empty references error") {
    CHECK_THROWS_AS(length_ratio({}, {}), std::runtime_error);
    std::vector<Sentence> out(1), ref(1);
    out[0].push_back("w");
    CHECK_THROWS_AS(length_ratio(out, ref), std::runtime_error);
  }
  SUBCASE("line mismatch error") {
    CHECK_THROWS_AS(length_ratio(test::sentences({"a"}), test::sentences({"a", "b"})),
                    std::runtime_error);
  }
}

TEST_CASE("rare_word_coverage counts set membership") {
  auto references = test::sentences({"u w x", "v y"});
  auto output = test::sentences({"u w q", "z z"});
  RareWordSet rare = make_rare({"u", "v", "q2"}, 100);

  SUBCASE("generated and not generated partition rare_in_ref") {
    CoverageReport report = rare_word_coverage(output, references, rare, {}, 100);
    CHECK(report.rare_in_ref == 2);  // u, v appear in references
    CHECK(report.generated == 1);    // u generated
    CHECK(report.not_generated == 1);
    CHECK(report.affected_by_augmentation == 0);
    CHECK(report.generated_words == std::vector<std::string>{"u"});
  }
  SUBCASE("no shared rare words") {
    CoverageReport report =
        rare_word_coverage(test::sentences({"a b", "c d"}), references, rare, {}, 100);
    CHECK(report.generated == 0);
    CHECK(report.not_generated == report.rare_in_ref);
  }
  SUBCASE("augmented counts above the threshold mark words as affected") {
    std::map<std::string, uint64_t> counts{{"u", 150}, {"v", 99}};
    CoverageReport report = rare_word_coverage(output, references, rare, counts, 100);
    CHECK(report.affected_by_augmentation == 1);
    CHECK(report.affected_words == std::vector<std::string>{"u"});
  }
  SUBCASE("line mismatch is rejected") {
    CHECK_THROWS_AS(
        rare_word_coverage(test::sentences({"a"}), references, rare, {}, 100),
        std::runtime_error);
  }
}

TEST_CASE("coverage partition identity holds on random fixtures") {
  std::mt19937 gen(137);
  for (int round = 0; round < 50; ++round) {
    int lines = 1 + static_cast<int>(gen() % 6);
    auto random_lines = [&](int count) {
      std::vector<Sentence> out(count);
      for (Sentence& s : out) {
        int len = 1 + static_cast<int>(gen() % 6);
        for (int i = 0; i < len; ++i) {
          s.push_back(std::string(1, static_cast<char>('a' + gen() % 8)));
        }
      }
      return out;
    };
    auto output = random_lines(lines);
    auto references = random_lines(lines);
    std::vector<std::string> rare_words;
    for (int i = 0; i < 4; ++i) {
      rare_words.push_back(std::string(1, static_cast<char>('a' + gen() % 8)));
    }
    RareWordSet rare = make_rare(rare_words, 10);
    std::map<std::string, uint64_t> counts;
    for (const std::string& w : rare_words) counts[w] = gen() % 20;
    CoverageReport report = rare_word_coverage(output, references, rare, counts, 10);
    CHECK(report.generated + report.not_generated == report.rare_in_ref);
    CHECK(report.affected_by_augmentation <= report.rare_in_ref);
  }
}

TEST_CASE("augmentation_stats aggregates records") {
  SUBCASE("empty records give a zero summary") {
    AugmentationStats stats = augmentation_stats({});
    CHECK(stats.total == 0);
    CHECK(stats.per_substitute.empty());
    CHECK(stats.per_pass.empty());
  }
  SUBCASE("per-word and per-pass counts") {
    std::vector<AugmentationRecord> records(3);
    records[0].substitute = "w";
    records[0].pass_number = 1;
    records[1].substitute = "w";
    records[1].pass_number = 2;
    records[2].substitute = "v";
    records[2].pass_number = 1;
    AugmentationStats stats = augmentation_stats(records);
    CHECK(stats.total == 3);
    CHECK(stats.per_substitute["w"] == 3 - 1);
    CHECK(stats.per_substitute["v"] == 1);
    CHECK(stats.per_pass[1] == 2);
    CHECK(stats.per_pass[2] == 1);
    uint64_t sum = 0;
    for (const auto& [word, count] : stats.per_substitute) sum += count;
    CHECK(sum == stats.total);
  }
}
