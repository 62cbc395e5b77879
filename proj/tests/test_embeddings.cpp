#include "doctest.h"
#include "test_support.hpp"

#include "civitopic/embeddings.hpp"
#include "civitopic/error.hpp"

#include <cmath>
#include <limits>

using namespace civitopic;
using embeddings::EmbeddingMatrix;

namespace {

EmbeddingMatrix small() {
  EmbeddingMatrix m;
  m.doc_ids = {"a", "b", "c"};
  m.provider_tag = "unit";
  m.dim = 3;
  m.values = {1.0, 0.0, 0.0, 0.25, -0.5, 0.125, 0.0, 0.0, 2.0};
  return m;
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("text format round trip is exact") {
  testing::TempDir dir("emb");
  auto m = small();
  m.values[4] = 1.0 / 3.0;
  embeddings::save_text(m, dir / "m.txt");
  const auto back = embeddings::load_embeddings(dir / "m.txt");
  CHECK(back.doc_ids == m.doc_ids);
  CHECK(back.provider_tag == "unit");
  CHECK(back.values == m.values);
}

TEST_CASE("binary format stores float32") {
  testing::TempDir dir("emb");
  auto m = small();
  m.values[4] = 1.0 / 3.0;
  embeddings::save_binary(m, dir / "m.bin");
  CHECK(std::filesystem::exists(embeddings::sidecar_path(dir / "m.bin")));
  CHECK(std::filesystem::file_size(dir / "m.bin") == 9 * sizeof(float));
  const auto back = embeddings::load_embeddings(dir / "m.bin");
  CHECK(back.doc_ids == m.doc_ids);
  CHECK(back.values[4] == static_cast<double>(static_cast<float>(1.0 / 3.0)));
  CHECK(back.values[8] == 2.0);
}

TEST_CASE("validation") {
  auto m = small();
  CHECK_NOTHROW(embeddings::validate(m));
  m.values[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(embeddings::validate(m), Error);
  m = small();
  m.values.pop_back();
  CHECK_THROWS_AS(embeddings::validate(m), Error);
}

TEST_CASE("align follows the requested order") {
  const auto m = small();
  const std::vector<std::string> ids{"c", "a"};
  const auto a = embeddings::align(m, ids);
  CHECK(a.doc_ids == ids);
  CHECK(a.values == std::vector<double>{0.0, 0.0, 2.0, 1.0, 0.0, 0.0});
  const std::vector<std::string> missing{"zz"};
  try {
    embeddings::align(m, missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
}

TEST_CASE("seed topic is the normalized mean of its phrase vectors") {
  EmbeddingMatrix phrases;
  phrases.doc_ids = {"x", "y"};
  phrases.provider_tag = "unit";
  phrases.dim = 2;
  phrases.values = {3.0, 0.0, 0.0, 4.0};
  const auto seed = embeddings::make_seed_topic("t", {"x", "y"}, phrases);
  CHECK(seed.seed_embedding[0] == doctest::Approx(0.6));
  CHECK(seed.seed_embedding[1] == doctest::Approx(0.8));
}

TEST_CASE("guidance moves a document halfway toward its closest seed") {
  EmbeddingMatrix docs;
  docs.doc_ids = {"d1", "d2"};
  docs.provider_tag = "unit";
  docs.dim = 2;
  docs.values = {2.0, 0.2, -1.0, -1.0};
  std::vector<embeddings::SeedTopic> seeds{{"A", {"a"}, {1.0, 0.0}, "unit"}, {"B", {"b"}, {0.0, 1.0}, "unit"}};

  const auto g = embeddings::guide_with_seeds(docs, seeds, 0.0);
  CHECK(g.values[0] == doctest::Approx(1.5));
  CHECK(g.values[1] == doctest::Approx(0.1));
  // d2 has negative similarity to both seeds: untouched at threshold 0.
  CHECK(g.values[2] == -1.0);
  CHECK(g.values[3] == -1.0);

  const auto none = embeddings::guide_with_seeds(docs, seeds, 1.5);
  CHECK(none.values == docs.values);

  seeds[0].provider_tag = "other";
  CHECK_THROWS_AS(embeddings::guide_with_seeds(docs, seeds, 0.0), Error);
}

TEST_CASE("cosine similarity") {
  const std::vector<double> a{1.0, 2.0}, b{2.0, 4.0}, c{-2.0, 1.0};
  CHECK(embeddings::cosine_similarity(a, b) == doctest::Approx(1.0));
  CHECK(embeddings::cosine_similarity(a, c) == doctest::Approx(0.0));
}

}
