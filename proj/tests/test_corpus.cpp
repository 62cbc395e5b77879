#include "doctest.h"
#include "test_support.hpp"

#include "civitopic/corpus.hpp"
#include "civitopic/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace civitopic;
using corpus::Split;

namespace {

corpus::Corpus numbered(std::size_t n, std::size_t categories) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    corpus::Document d;
    d.id = "d" + std::to_string(i);
    d.raw_text = "texto numero " + std::to_string(i);
    if (categories > 0) d.declared_category = "cat" + std::to_string(i % categories);
    c.documents.push_back(d);
  }
  return c;
}

std::size_t count(const corpus::Corpus& c, Split s) {
  return static_cast<std::size_t>(
      std::count_if(c.documents.begin(), c.documents.end(), [s](const auto& d) { return d.split == s; }));
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("train count is round(fraction * N)") {
  for (std::size_t n : {1u, 7u, 10u, 101u, 10022u}) {
    for (std::size_t cats : {0u, 3u, 26u}) {
      const auto c = corpus::split(numbered(n, cats), 0.8, 11);
      const auto expected = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
      CHECK(count(c, Split::train) == expected);
      CHECK(count(c, Split::test) == n - expected);
    }
  }
  CHECK(count(corpus::split(numbered(10022, 26), 0.8, 1), Split::train) == 8018);
}

TEST_CASE("stratified split keeps category shares") {
  const auto c = corpus::split(numbered(1000, 4), 0.8, 3);
  std::map<std::string, std::size_t> train;
  for (const auto& d : c.documents) {
    if (d.split == Split::train) ++train[*d.declared_category];
  }
  for (const auto& [cat, k] : train) CHECK(k == 200);
}

TEST_CASE("split is a function of the seed") {
  const auto base = numbered(300, 5);
  const auto a = corpus::split(base, 0.7, 9);
  const auto b = corpus::split(base, 0.7, 9);
  const auto other = corpus::split(base, 0.7, 10);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    same = same && a.documents[i].split == b.documents[i].split;
    differs = differs || a.documents[i].split != other.documents[i].split;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("bad train fraction") {
  CHECK_THROWS_AS(corpus::split(numbered(5, 0), 1.0, 1), Error);
  CHECK_THROWS_AS(corpus::split(numbered(5, 0), 0.0, 1), Error);
}

TEST_CASE("dedupe keeps the first occurrence and drops empties") {
  corpus::Corpus c;
  auto add = [&](std::string id, std::string t) {
    corpus::Document d;
    d.id = std::move(id);
    d.raw_text = std::move(t);
    c.documents.push_back(d);
  };
  add("a", "Mais  ônibus no bairro");
  add("b", "mais ônibus no BAIRRO ");
  add("c", "   ");
  add("d", "outra proposta");
  const auto r = corpus::dedupe_and_filter(c);
  REQUIRE(r.corpus.size() == 2);
  CHECK(r.corpus.documents[0].id == "a");
  CHECK(r.corpus.documents[1].id == "d");
  REQUIRE(r.removed.size() == 2);
  CHECK(r.removed[0].id == "b");
  CHECK(r.removed[0].reason == corpus::RemovalReason::duplicate);
  CHECK(r.removed[1].id == "c");
  CHECK(r.removed[1].reason == corpus::RemovalReason::empty);
}

TEST_CASE("tokenize drops stopwords and applies lemmas") {
  corpus::PreprocessConfig pc;
  pc.stopwords = {"de", "para"};
  pc.lemma_lexicon = {{"escolas", "escola"}};
  const auto tokens = corpus::tokenize("Mais ESCOLAS de tempo integral, para todos!", pc);
  CHECK(tokens == std::vector<std::string>{"mais", "escola", "tempo", "integral", "todos"});
}

TEST_CASE("save and load round trip keeps processed columns") {
  testing::TempDir dir("corpus");
  corpus::PreprocessConfig pc;
  pc.stopwords = {"de"};
  auto c = corpus::preprocess(numbered(20, 2), pc);
  c.documents[0].raw_text = "com, vírgula e \"aspas\"";
  c = corpus::split(c, 0.5, 4);
  corpus::save_corpus(c, dir / "c.csv");
  const auto back = corpus::load_corpus(dir / "c.csv", corpus::Format::csv);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.documents[i].id == c.documents[i].id);
    CHECK(back.documents[i].raw_text == c.documents[i].raw_text);
    CHECK(back.documents[i].tokens == c.documents[i].tokens);
    CHECK(back.documents[i].split == c.documents[i].split);
    CHECK(back.documents[i].declared_category == c.documents[i].declared_category);
  }
}

TEST_CASE("jsonl input") {
  testing::TempDir dir("corpus");
  io::write_file(dir / "c.jsonl", "{\"id\":\"x1\",\"text\":\"primeira\"}\n{\"id\":\"x2\",\"text\":\"segunda\"}\n");
  const auto c = corpus::load_corpus(dir / "c.jsonl", corpus::Format::jsonl);
  REQUIRE(c.size() == 2);
  CHECK(c.documents[1].raw_text == "segunda");
}

TEST_CASE("missing id column is an error") {
  testing::TempDir dir("corpus");
  io::write_file(dir / "c.csv", "text\nabc\n");
  CHECK_THROWS_AS(corpus::load_corpus(dir / "c.csv", corpus::Format::csv), Error);
}

}
