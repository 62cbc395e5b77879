#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

#include "civitopic/error.hpp"
#include "civitopic/metrics.hpp"
#include "civitopic/random.hpp"

#include <cmath>

using namespace civitopic;

namespace {

topics::TopicRepresentation topic(int id, std::vector<std::string> words) {
  topics::TopicRepresentation r;
  r.topic_id = id;
  for (auto& w : words) r.top_words.push_back({std::move(w), 1.0});
  return r;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, std::uint64_t k) {
  std::vector<int> out(n);
  for (auto& x : out) x = static_cast<int>(rng.uniform_index(k));
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("npmi limits and a hand value") {
  CHECK(metrics::npmi(3, 4, 0, 10) == -1.0);
  CHECK(metrics::npmi(10, 10, 10, 10) == 1.0);
  // p(a)=p(b)=1/4, p(ab)=1/16: independent.
  CHECK(std::abs(metrics::npmi(4, 4, 1, 16)) < 1e-15);
  const double p_ab = 2.0 / 10, p_a = 4.0 / 10, p_b = 3.0 / 10;
  CHECK(metrics::npmi(4, 3, 2, 10) == doctest::Approx(std::log(p_ab / (p_a * p_b)) / -std::log(p_ab)));
}

TEST_CASE("coherence on a tiny corpus") {
  const std::vector<std::vector<std::string>> docs{{"a", "b"}, {"a", "b"}, {"c"}, {"c", "d"}};
  // a,b always together: npmi = log(0.5/0.25)/-log(0.5) = 1.
  CHECK(metrics::coherence_nc({topic(0, {"a", "b"})}, docs) == doctest::Approx(1.0));
  // a,c never together: -1 -> 0.
  CHECK(metrics::coherence_nc({topic(0, {"a", "c"})}, docs) == doctest::Approx(0.0));
  CHECK(metrics::coherence_nc({topic(0, {"a", "b"}), topic(1, {"a", "c"})}, docs) == doctest::Approx(0.5));
}

TEST_CASE("diversity") {
  const std::vector<std::string> ten{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  CHECK(metrics::diversity_nd({topic(0, ten), topic(1, ten), topic(2, ten)}) == doctest::Approx(1.0 / 3.0));
  CHECK(metrics::diversity_nd({topic(0, {"a", "b"}), topic(1, {"c", "d"})}) == 1.0);
  CHECK(metrics::diversity_nd({topic(0, {"a", "b"}), topic(1, {"b", "c"})}) == doctest::Approx(0.75));
}

TEST_CASE("weighted score") {
  CHECK(metrics::weighted_score(0.11711, 0.86234) == doctest::Approx(0.266156));
  CHECK_THROWS_AS(metrics::weighted_score(1.2, 0.5), Error);
  CHECK_THROWS_AS(metrics::weighted_score(0.5, -0.1), Error);
}

TEST_CASE("ARI equals pair counting on every small partition pair") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto parts = oracle::partitions(n, 3);
    for (const auto& x : parts) {
      for (const auto& y : parts) {
        CHECK_MESSAGE(metrics::adjusted_rand_index(x, y) == doctest::Approx(oracle::ari(x, y)).epsilon(1e-12),
                      "n=", n);
      }
    }
  }
}

TEST_CASE("ARI and NMI are label-permutation invariant") {
  Rng rng(3);
  const auto a = random_labels(rng, 60, 4);
  const auto b = random_labels(rng, 60, 5);
  std::vector<int> renamed(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) renamed[i] = 10 - a[i];
  CHECK(metrics::adjusted_rand_index(renamed, b) == doctest::Approx(metrics::adjusted_rand_index(a, b)));
  CHECK(metrics::normalized_mutual_information(renamed, b) ==
        doctest::Approx(metrics::normalized_mutual_information(a, b)));
  CHECK(metrics::adjusted_rand_index(a, renamed) == 1.0);
}

TEST_CASE("NMI matches the entropy formula") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const auto n = 5 + rng.uniform_index(80);
    const auto a = random_labels(rng, n, 1 + rng.uniform_index(6));
    const auto b = random_labels(rng, n, 1 + rng.uniform_index(6));
    CHECK(std::abs(metrics::normalized_mutual_information(a, b) - oracle::nmi(a, b)) <= 1e-10);
  }
}

TEST_CASE("encode labels by first appearance") {
  const std::vector<std::string> s{"b", "a", "b", "c"};
  CHECK(metrics::encode_labels(s) == std::vector<int>{0, 1, 0, 2});
}

TEST_CASE("contingency tables") {
  const std::vector<int> topics{0, 0, 1, 1, 1};
  const std::vector<std::string> labels{"x", "y", "y", "y", "x"};
  const auto t = metrics::contingency(topics, labels);
  CHECK(t.row_labels == std::vector<int>{0, 1});
  CHECK(t.col_labels == std::vector<std::string>{"x", "y"});
  CHECK(t.at(1, 1) == 2);
  const auto rows = t.row_normalized();
  CHECK(rows[2] == doctest::Approx(1.0 / 3.0));
  const auto cols = t.col_normalized();
  CHECK(cols[1] == doctest::Approx(1.0 / 3.0));

  testing::TempDir dir("metrics");
  metrics::write_contingency_counts(t, (dir / "c.csv").string());
  CHECK(io::read_file(dir / "c.csv") == "topic,x,y\n0,1,1\n1,1,2\n");
}

}
