#include <doctest.h>

#include <random>
#include <set>

#include "tda/bpe.hpp"
#include "tda/io.hpp"
#include "test_util.hpp"

using namespace tda;
using test::TempDir;

namespace {

std::vector<Sentence> random_sentences(std::mt19937* gen, int count, int alphabet = 6,
                                       int max_len = 8, int max_word = 6) {
  std::vector<Sentence> out(count);
  for (Sentence& s : out) {
    int len = 1 + static_cast<int>((*gen)() % max_len);
    for (int i = 0; i < len; ++i) {
      int wlen = 1 + static_cast<int>((*gen)() % max_word);
      std::string word;
      for (int c = 0; c < wlen; ++c) {
        word.push_back(static_cast<char>('a' + (*gen)() % alphabet));
      }
      s.push_back(std::move(word));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("learn_bpe merges the most frequent pair first") {
  // Word counts {"ab": 2, "abc": 1}: pair (a,b) occurs 3 times, every
  // other pair at most twice.
  auto corpus = test::sentences({"ab ab abc"});
  MergeTable table = learn_bpe(corpus, 1);
  REQUIRE(table.size() == 1);
  CHECK(table.merges[0] == std::pair<std::string, std::string>{"a", "b"});
}

TEST_CASE("learn_bpe with zero merges yields an empty table") {
  auto corpus = test::sentences({"ab ab"});
  MergeTable table = learn_bpe(corpus, 0);
  CHECK(table.size() == 0);
  Sentence segmented = apply_bpe(test::tokens("ab"), table);
  CHECK(segmented == Sentence{"a@@", "b"});
}

TEST_CASE("learn_bpe on single-character words finds no pairs") {
  auto corpus = test::sentences({"a b a", "c a"});
  // Each word is one symbol plus the end marker, and no (symbol, eow)
  // pair reaches... (a,</w>) occurs 3 times, so merging does happen; use
  // distinct singletons instead.
  MergeTable table = learn_bpe(test::sentences({"a b", "c d"}), 10);
  CHECK(table.size() == 0);
}

TEST_CASE("learn_bpe stops early when no pair occurs twice") {
  auto corpus = test::sentences({"xy"});
  MergeTable table = learn_bpe(corpus, 100);
  CHECK(table.size() == 0);
}

TEST_CASE("learn_bpe rejects an empty corpus") {
  CHECK_THROWS_AS(learn_bpe({}, 5), std::runtime_error);
  CHECK_THROWS_AS(learn_bpe({{}}, 5), std::runtime_error);
}

TEST_CASE("apply_bpe follows merge order") {
  MergeTable table;
  table.merges = {{"a", "b"}};
  CHECK(apply_bpe(test::tokens("ab"), table) == Sentence{"ab"});
  CHECK(apply_bpe(test::tokens("abc"), table) == Sentence{"ab@@", "c"});
  CHECK(apply_bpe(test::tokens("xy ab"), table) == Sentence{"x@@", "y", "ab"});
}

TEST_CASE("apply_bpe handles merges that absorb the end marker") {
  MergeTable table;
  table.merges = {{"b", kBpeEndOfWord}, {"a", "b</w>"}};
  CHECK(apply_bpe(test::tokens("ab"), table) == Sentence{"ab"});
  CHECK(apply_bpe(test::tokens("cab"), table) == Sentence{"c@@", "ab"});
}

TEST_CASE("undo_bpe joins continuation tokens") {
  CHECK(undo_bpe(Sentence{"a@@", "b"}) == Sentence{"ab"});
  CHECK(undo_bpe(Sentence{"x"}) == Sentence{"x"});
  CHECK(undo_bpe(Sentence{"a@@", "b@@", "c", "d"}) == Sentence{"abc", "d"});
  CHECK_THROWS_AS(undo_bpe(Sentence{"a@@"}), std::runtime_error);
  CHECK_THROWS_AS(undo_bpe(Sentence{"a", "b@@"}), std::runtime_error);
}

TEST_CASE("undo_bpe inverts apply_bpe on random corpora") {
  std::mt19937 gen(101);
  auto corpus = random_sentences(&gen, 300);
  MergeTable table = learn_bpe(corpus, 40);
  CHECK(table.size() <= 40);
  for (const Sentence& sentence : corpus) {
    Sentence segmented = apply_bpe(sentence, table);
    for (const std::string& token : segmented) {
      CHECK(token.find(' ') == std::string::npos);
      CHECK(!token.empty());
    }
    CHECK(undo_bpe(segmented) == sentence);
  }
}

TEST_CASE("apply_bpe segments unseen words with learned merges") {
  auto corpus = test::sentences({"lower lower lowest lowest newer newer"});
  MergeTable table = learn_bpe(corpus, 10);
  Sentence segmented = apply_bpe(test::tokens("low"), table);
  CHECK(undo_bpe(segmented) == test::tokens("low"));
}

TEST_CASE("merge table file round trip") {
  auto corpus = test::sentences({"abab abab cdcd"});
  MergeTable table = learn_bpe(corpus, 5);
  REQUIRE(table.size() >= 1);
  TempDir dir("bpe_io");
  table.save(dir.file("codes"));
  MergeTable loaded = MergeTable::load(dir.file("codes"));
  CHECK(loaded.merges == table.merges);

  std::string text = read_file(dir.file("codes"));
  CHECK(text.rfind("#version:", 0) == 0);
}

TEST_CASE("merge table load validates the header") {
  TempDir dir("bpe_bad");
  write_file(dir.file("codes"), "a b\n");
  CHECK_THROWS_AS(MergeTable::load(dir.file("codes")), std::runtime_error);
  write_file(dir.file("codes2"), "#version: 0.2\na b c\n");
  CHECK_THROWS_AS(MergeTable::load(dir.file("codes2")), std::runtime_error);
}

TEST_CASE("UTF-8 words split on code points") {
  // "über" has a two-byte first symbol.
  MergeTable empty;
  Sentence segmented = apply_bpe({"\xC3\xBC" "ber"}, empty);
  REQUIRE(segmented.size() == 4);
  CHECK(segmented[0] == "\xC3\xBC@@");
  CHECK(undo_bpe(segmented) == Sentence{"\xC3\xBC" "ber"});
}

TEST_CASE("learned merge count is bounded by the request") {
  std::mt19937 gen(113);
  for (int round = 0; round < 10; ++round) {
    auto corpus = random_sentences(&gen, 30);
    std::size_t budget = gen() % 12;
    MergeTable table = learn_bpe(corpus, budget);
    CHECK(table.size() <= budget);
    // Merges are unique.
    std::set<std::pair<std::string, std::string>> seen(table.merges.begin(),
                                                       table.merges.end());
    CHECK(seen.size() == table.merges.size());
  }
}
