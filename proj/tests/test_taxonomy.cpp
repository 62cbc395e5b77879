#include "doctest.h"

#include "civitopic/error.hpp"
#include "civitopic/taxonomy.hpp"

using namespace civitopic;

TEST_SUITE("taxonomy") {

TEST_CASE("file order is preserved") {
  const auto t = parse_taxonomy(R"({"Saúde":["Hospital","Vacinação","Outros em Saúde"],"Educação":["Escola"]})");
  CHECK(t.n1_options() == std::vector<std::string>{"Saúde", "Educação"});
  CHECK(t.n2_options() == std::vector<std::string>{"Hospital", "Vacinação", "Outros em Saúde", "Escola"});
  CHECK(t.parent_of("Escola") == "Educação");
  CHECK_FALSE(t.parent_of("escola").has_value());
}

TEST_CASE("seed lists skip catch-all entries and cap subterms") {
  const auto t = parse_taxonomy(
      R"({"Saúde":["Outros em Saúde","A","B","C","D","E","F"],"Educação":["Escola","Outros"]})");
  const auto lists = seed_lists(t, 5);
  REQUIRE(lists.size() == 2);
  CHECK(lists[0].label == "Saúde");
  CHECK(lists[0].phrases == std::vector<std::string>{"Saúde", "A", "B", "C", "D", "E"});
  CHECK(lists[1].phrases == std::vector<std::string>{"Educação", "Escola"});
  CHECK(seed_lists(t, 0)[0].phrases == std::vector<std::string>{"Saúde"});
}

TEST_CASE("invalid taxonomies") {
  CHECK_THROWS_AS(parse_taxonomy("{}"), Error);
  CHECK_THROWS_AS(parse_taxonomy("[1,2]"), Error);
  CHECK_THROWS_AS(parse_taxonomy(R"({"A":["x, y"]})"), Error);
  // Duplicate after case/accent folding.
  CHECK_THROWS_AS(parse_taxonomy(R"({"A":["Saúde"],"B":["saude"]})"), Error);
  CHECK_THROWS_AS(parse_taxonomy(R"({"A":["x"],"B":["x"]})"), Error);
  CHECK_THROWS_AS(parse_taxonomy("not json"), Error);
}

}
