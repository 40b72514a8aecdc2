#include <doctest.h>

#include <random>
#include <set>

#include "tda/corpus.hpp"
#include "tda/io.hpp"
#include "tda/text.hpp"
#include "tda/vocab.hpp"
#include "test_util.hpp"

using namespace tda;
using test::TempDir;

TEST_CASE("load_parallel reads aligned pairs") {
  TempDir dir("corpus_load");
  write_file(dir.file("src"), "a b\n");
  write_file(dir.file("tgt"), "x y\n");
  ParallelCorpus corpus = load_parallel(dir.file("src"), dir.file("tgt"));
  REQUIRE(corpus.size() == 1);
  CHECK(corpus.pair(0).source == Sentence{"a", "b"});
  CHECK(corpus.pair(0).target == Sentence{"x", "y"});
  CHECK(corpus.pair(0).id == 0);
}

TEST_CASE("load_parallel rejects line count mismatch") {
  TempDir dir("corpus_mismatch");
  write_file(dir.file("src"), "a\nb\n");
  write_file(dir.file("tgt"), "x\ny\nz\n");
  CHECK_THROWS_WITH_AS(load_parallel(dir.file("src"), dir.file("tgt")),
                       doctest::Contains("alignment error"), std::runtime_error);
}

TEST_CASE("load_parallel reports empty lines with their line number") {
  TempDir dir("corpus_empty_line");
  write_file(dir.file("src"), "a\nb\nc\nd\n\nf\n");
  write_file(dir.file("tgt"), "a\nb\nc\nd\ne\nf\n");
  CHECK_THROWS_WITH_AS(load_parallel(dir.file("src"), dir.file("tgt")),
                       doctest::Contains("line 5"), std::runtime_error);
}

TEST_CASE("load_parallel optionally lowercases") {
  TempDir dir("corpus_lc");
  write_file(dir.file("src"), "Abc DEF\n");
  write_file(dir.file("tgt"), "\xC3\x84hnlich x\n");  // 'Ähnlich'
  ParallelCorpus corpus = load_parallel(dir.file("src"), dir.file("tgt"), true);
  CHECK(corpus.pair(0).source == Sentence{"abc", "def"});
  CHECK(corpus.pair(0).target == Sentence{"\xC3\xA4hnlich", "x"});
}

TEST_CASE("corpus round trip preserves input bytes") {
  TempDir dir("corpus_roundtrip");
  std::string src_text = "a b c\nd e\nf\n";
  std::string tgt_text = "x\ny z\nw v u\n";
  write_file(dir.file("src"), src_text);
  write_file(dir.file("tgt"), tgt_text);
  ParallelCorpus corpus = load_parallel(dir.file("src"), dir.file("tgt"));
  write_parallel(corpus, dir.file("src2"), dir.file("tgt2"));
  CHECK(read_file(dir.file("src2")) == src_text);
  CHECK(read_file(dir.file("tgt2")) == tgt_text);
}

TEST_CASE("build_vocabulary keeps the most frequent words under the cap") {
  auto sents = test::sentences({"a b a", "c a b"});
  Vocabulary vocab = Vocabulary::build(sents, 2);
  CHECK(vocab.size() == 3);  // unk + 2 kept
  CHECK(vocab.count("a") == 3);
  CHECK(vocab.count("b") == 2);
  CHECK(vocab.contains("c") == false);
  CHECK(vocab.id("c") == 0);
  CHECK(vocab.normalize("c") == kUnkToken);
  CHECK(vocab.id("a") == 1);
  CHECK(vocab.id("b") == 2);
}

TEST_CASE("build_vocabulary does not pad when cap exceeds vocabulary") {
  Vocabulary vocab = Vocabulary::build(test::sentences({"a"}), 10);
  CHECK(vocab.size() == 2);
  CHECK(vocab.count("a") == 1);
}

TEST_CASE("build_vocabulary rejects an empty corpus") {
  CHECK_THROWS_AS(Vocabulary::build({}, 5), std::runtime_error);
  CHECK_THROWS_AS(Vocabulary::build({{}}, 5), std::runtime_error);
}

TEST_CASE("build_vocabulary breaks count ties lexicographically") {
  Vocabulary vocab = Vocabulary::build(test::sentences({"b a c"}), 2);
  CHECK(vocab.contains("a"));
  CHECK(vocab.contains("b"));
  CHECK(!vocab.contains("c"));
}

TEST_CASE("vocabulary invariants hold on random corpora") {
  std::mt19937 gen(7);
  for (int round = 0; round < 50; ++round) {
    std::vector<Sentence> sents(1 + gen() % 6);
    std::size_t total = 0;
    std::set<std::string> distinct;
    for (Sentence& s : sents) {
      std::size_t len = 1 + gen() % 8;
      for (std::size_t i = 0; i < len; ++i) {
        s.push_back(std::string(1, static_cast<char>('a' + gen() % 6)));
        distinct.insert(s.back());
        ++total;
      }
    }
    std::size_t cap = 1 + gen() % 8;
    Vocabulary vocab = Vocabulary::build(sents, cap);
    uint64_t kept = 0;
    for (std::size_t id = 1; id < vocab.size(); ++id) kept += vocab.count(vocab.word(id));
    CHECK(kept <= total);
    CHECK(vocab.size() - 1 == std::min(cap, distinct.size()));
  }
}

TEST_CASE("vocabulary file round trip") {
  TempDir dir("vocab_io");
  Vocabulary vocab = Vocabulary::build(test::sentences({"a b a c b a"}), 10);
  vocab.save(dir.file("vocab.tsv"));
  Vocabulary loaded = Vocabulary::load(dir.file("vocab.tsv"));
  CHECK(loaded.size() == vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    CHECK(loaded.word(id) == vocab.word(id));
    CHECK(loaded.count(loaded.word(id)) == vocab.count(vocab.word(id)));
  }
}

TEST_CASE("rare_words selects in-vocabulary words below the threshold") {
  Vocabulary vocab = Vocabulary::build(test::sentences({"a a a b b"}), 10);
  SUBCASE("threshold 3") {
    RareWordSet rare = rare_words(vocab, 3);
    CHECK(rare.size() == 1);
    CHECK(rare.contains("b"));
    CHECK(!rare.contains("a"));
  }
  SUBCASE("threshold 1 yields nothing") {
    RareWordSet rare = rare_words(vocab, 1);
    CHECK(rare.size() == 0);
  }
  SUBCASE("unk never included") {
    RareWordSet rare = rare_words(vocab, 1000);
    CHECK(!rare.contains(kUnkToken));
    CHECK(rare.size() == 2);
  }
}

TEST_CASE("rare word set membership matches threshold check for kept words") {
  std::mt19937 gen(11);
  for (int round = 0; round < 30; ++round) {
    std::vector<Sentence> sents(1 + gen() % 5);
    for (Sentence& s : sents) {
      std::size_t len = 1 + gen() % 10;
      for (std::size_t i = 0; i < len; ++i) {
        s.push_back(std::string(1, static_cast<char>('a' + gen() % 5)));
      }
    }
    Vocabulary vocab = Vocabulary::build(sents, 4);
    uint64_t threshold = 1 + gen() % 4;
    RareWordSet rare = rare_words(vocab, threshold);
    for (std::size_t id = 1; id < vocab.size(); ++id) {
      const std::string& word = vocab.word(id);
      CHECK(rare.contains(word) == (vocab.count(word) < threshold));
    }
  }
}

TEST_CASE("split_tokens flags double spaces via empty fields") {
  auto parts = split_tokens("a  b");
  REQUIRE(parts.size() == 3);
  CHECK(parts[1].empty());
}

TEST_CASE("lowercase folds ASCII and Latin-1") {
  CHECK(lowercase("AbC") == "abc");
  CHECK(lowercase("\xC3\x9C") == "\xC3\xBC");      // Ü -> ü
  CHECK(lowercase("\xC5\xB8") == "\xC3\xBF");      // Ÿ -> ÿ
  CHECK(lowercase("x\xC3\x97y") == "x\xC3\x97y");  // multiplication sign unchanged
}
