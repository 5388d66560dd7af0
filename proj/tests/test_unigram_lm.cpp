#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "visrank/unigram_lm.hpp"

using namespace visrank;

namespace {

UnigramModel from_text(const std::string& corpus, const LmOptions& options = {}) {
  std::istringstream in(corpus);
  return UnigramModel::build(in, options);
}

}  // namespace

TEST_CASE("hand-counted toy corpus") {
  auto model = from_text("a b b a a");
  CHECK(model.count("a") == 3);
  CHECK(model.count("b") == 2);
  CHECK(model.total() == 5);
  CHECK(model.vocab_size() == 2);
  CHECK(model.prob("a") == 0.6);
  CHECK(model.prob("b") == 0.4);
}

TEST_CASE("two corpora merge additively") {
  UnigramCounts counts;
  std::istringstream first("a");
  std::istringstream second("a b");
  counts.add_corpus(first);
  counts.add_corpus(second);
  auto model = UnigramModel::build(std::move(counts));
  CHECK(model.count("a") == 2);
  CHECK(model.count("b") == 1);
  CHECK(model.total() == 3);
}

TEST_CASE("empty corpus gives empty vocabulary and a fixed floor") {
  auto model = from_text("");
  CHECK(model.vocab_size() == 0);
  CHECK(model.total() == 0);
  CHECK(model.prob("anything") == UnigramModel::kEmptyModelFloor);
}

TEST_CASE("out-of-vocabulary tokens get the floor, below any seen probability") {
  auto model = from_text("a b b a a");
  CHECK(model.prob("zzz") == model.oov_floor());
  CHECK(model.oov_floor() == 1.0 / 50.0);  // 1/(10*total)
  CHECK(model.oov_floor() < model.min_vocab_prob());
}

TEST_CASE("tokens are normalized while counting") {
  auto model = from_text("A a B\tb\nA");
  CHECK(model.count("a") == 3);
  CHECK(model.count("b") == 2);
  CHECK(model.vocab_size() == 2);
}

TEST_CASE("vocabulary probabilities sum to one") {
  std::mt19937_64 rng(11);
  std::string corpus;
  for (int i = 0; i < 5000; ++i) {
    corpus += "tok" + std::to_string(rng() % 700);
    corpus += ' ';
  }
  auto model = from_text(corpus);
  UnigramCounts probe;
  std::istringstream in(corpus);
  probe.add_corpus(in);
  double sum = 0.0;
  for (const auto& [token, n] : probe.counts()) sum += model.prob(token);
  CHECK(std::fabs(sum - 1.0) < 1e-9);
}

TEST_CASE("merge is order-independent") {
  UnigramCounts ab;
  UnigramCounts ba;
  UnigramCounts a;
  UnigramCounts b;
  std::istringstream ina("x y x z"), inb("y q x");
  a.add_corpus(ina);
  b.add_corpus(inb);
  ab.merge(a);
  ab.merge(b);
  ba.merge(b);
  ba.merge(a);
  CHECK(ab.total() == ba.total());
  REQUIRE(ab.counts().size() == ba.counts().size());
  for (const auto& [token, n] : ab.counts()) {
    auto it = ba.counts().find(token);
    REQUIRE(it != ba.counts().end());
    CHECK(it->second == n);
  }
}

TEST_CASE("adding occurrences never decreases a token's count share") {
  UnigramCounts counts;
  counts.add_count("w", 2);
  counts.add_count("other", 10);
  auto before = UnigramModel::build(std::move(counts));
  UnigramCounts more;
  more.add_count("w", 5);
  more.add_count("other", 10);
  auto after = UnigramModel::build(std::move(more));
  CHECK(before.prob("w") * static_cast<double>(before.total()) <
        after.prob("w") * static_cast<double>(after.total()) + 1e-12);
}

TEST_CASE("save then load reproduces the model") {
  auto model = from_text("a b b a a c");
  std::ostringstream out;
  model.save(out);
  std::istringstream in(out.str());
  auto loaded = UnigramModel::load(in);
  CHECK(loaded.total() == model.total());
  CHECK(loaded.vocab_size() == model.vocab_size());
  CHECK(loaded.oov_floor() == model.oov_floor());
  for (const char* token : {"a", "b", "c", "zzz"}) CHECK(loaded.prob(token) == model.prob(token));
}

TEST_CASE("saved form is byte-stable across a round trip") {
  auto model = from_text("delta alpha beta alpha");
  std::ostringstream first;
  model.save(first);
  std::istringstream in(first.str());
  auto loaded = UnigramModel::load(in);
  std::ostringstream second;
  loaded.save(second);
  CHECK(first.str() == second.str());
  // Token lines are sorted by bytes.
  CHECK(first.str().find("alpha") < first.str().find("beta"));
  CHECK(first.str().find("beta") < first.str().find("delta"));
}

TEST_CASE("wrong magic is a format error") {
  std::istringstream in("XLM1 5 2 0.02\na\t3\nb\t2\n");
  CHECK_THROWS_AS(UnigramModel::load(in), FormatError);
}

TEST_CASE("header inconsistencies are format errors") {
  std::istringstream bad_total("ULM1 9 2 0.02\na\t3\nb\t2\n");
  CHECK_THROWS_AS(UnigramModel::load(bad_total), FormatError);
  std::istringstream bad_vocab("ULM1 5 3 0.02\na\t3\nb\t2\n");
  CHECK_THROWS_AS(UnigramModel::load(bad_vocab), FormatError);
  std::istringstream dup("ULM1 6 2 0.02\na\t3\na\t3\n");
  CHECK_THROWS_AS(UnigramModel::load(dup), FormatError);
}

TEST_CASE("explicit floor must sit below the smallest vocabulary probability") {
  LmOptions options;
  options.oov_floor = 0.5;
  CHECK_THROWS_AS(from_text("a b b a a", options), std::invalid_argument);
  options.oov_floor = 1e-6;
  auto model = from_text("a b b a a", options);
  CHECK(model.prob("zzz") == 1e-6);
}

TEST_CASE("short-word discount applies below three characters") {
  LmOptions options;
  options.short_word_discount = 0.5;
  auto model = from_text("a ab abc abcd", options);
  CHECK(model.prob("a") == doctest::Approx(0.25 * 0.25).epsilon(1e-12));
  CHECK(model.prob("ab") == doctest::Approx(0.25 * 0.5).epsilon(1e-12));
  CHECK(model.prob("abc") == 0.25);
  CHECK(model.prob("abcd") == 0.25);
  // Discount survives persistence.
  std::ostringstream out;
  model.save(out);
  std::istringstream in(out.str());
  auto loaded = UnigramModel::load(in);
  CHECK(loaded.short_word_discount() == 0.5);
  CHECK(loaded.prob("a") == model.prob("a"));
}

TEST_CASE("default discount leaves short words untouched") {
  auto model = from_text("a ab abc");
  CHECK(model.prob("a") == model.prob("ab"));
  CHECK(model.prob("ab") == model.prob("abc"));
}
