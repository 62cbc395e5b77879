#include "doctest.h"
#include "test_support.hpp"

#include "civitopic/error.hpp"
#include "civitopic/pipeline.hpp"
#include "civitopic/synthetic.hpp"

#include <set>

using namespace civitopic;

namespace {

struct Setup {
  synthetic::Fixture fixture;
  std::vector<corpus::Document> docs;
  pipeline::Guidance guidance;
};

const Setup& setup() {
  static const Setup s = [] {
    synthetic::FixtureSpec spec;
    spec.documents = 400;
    spec.categories = 4;
    spec.noise = 1.0;
    spec.seed = 21;
    Setup out;
    out.fixture = synthetic::make_fixture(spec);
    out.docs = testing::prepared_corpus(out.fixture).documents;
    out.guidance.taxonomy = out.fixture.taxonomy;
    out.guidance.preprocess.stopwords = out.fixture.stopwords;
    out.guidance.seed_topics =
        embeddings::make_seed_topics(seed_lists(out.fixture.taxonomy, 5), out.fixture.seed_embeddings);
    return out;
  }();
  return s;
}

pipeline::PipelineConfig config(pipeline::Mode mode) {
  pipeline::PipelineConfig c;
  c.mode = mode;
  c.min_topic_size = 15;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("fit finds the planted categories") {
  const auto& s = setup();
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::unsupervised));
  CHECK(r.model.topic_count() >= 2);
  CHECK(r.model.train_labels.size() == s.docs.size());
  CHECK(r.model.representations.size() == r.model.topic_count());
  for (const auto& rep : r.model.representations) CHECK(rep.top_words.size() == 10);
}

TEST_CASE("identical runs write identical bundles") {
  const auto& s = setup();
  testing::TempDir dir("pipeline");
  for (auto mode : {pipeline::Mode::unsupervised, pipeline::Mode::semisupervised}) {
    const auto* g = mode == pipeline::Mode::semisupervised ? &s.guidance : nullptr;
    pipeline::save_bundle(pipeline::fit(s.docs, s.fixture.embeddings, config(mode), g), dir / "a");
    pipeline::save_bundle(pipeline::fit(s.docs, s.fixture.embeddings, config(mode), g), dir / "b");
    const auto a = testing::snapshot(dir / "a");
    CHECK(a.size() >= 8);
    CHECK(a == testing::snapshot(dir / "b"));
    std::filesystem::remove_all(dir / "a");
    std::filesystem::remove_all(dir / "b");
  }
}

TEST_CASE("bundle reload gives the same topics and assignments") {
  const auto& s = setup();
  testing::TempDir dir("pipeline");
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::semisupervised), &s.guidance);
  pipeline::save_bundle(r, dir / "m");
  const auto loaded = pipeline::load_bundle(dir / "m");
  REQUIRE(loaded.topic_count() == r.model.topic_count());
  for (std::size_t t = 0; t < loaded.topic_count(); ++t) {
    CHECK(loaded.representations[t].name == r.model.representations[t].name);
  }
  CHECK(loaded.train_labels == r.model.train_labels);
  const auto a = pipeline::transform(r.model, s.docs, s.fixture.embeddings);
  const auto b = pipeline::transform(loaded, s.docs, s.fixture.embeddings);
  CHECK(a.labels == b.labels);
  CHECK(a.probabilities == b.probabilities);
}

TEST_CASE("a training document transformed again keeps its topic") {
  const auto& s = setup();
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::unsupervised));
  const auto again = pipeline::transform(r.model, s.docs, s.fixture.embeddings);
  CHECK(again.labels == r.model.train_labels);

  // Same vector under a new id.
  auto copy = s.docs[5];
  copy.id = "copy";
  embeddings::EmbeddingMatrix e;
  e.provider_tag = s.fixture.embeddings.provider_tag;
  e.dim = s.fixture.embeddings.dim;
  e.doc_ids = {"copy"};
  const auto row = s.fixture.embeddings.row(5);
  e.values.assign(row.begin(), row.end());
  CHECK(pipeline::transform(r.model, {copy}, e).labels[0] == r.model.train_labels[5]);
}

TEST_CASE("a far away document is an outlier") {
  const auto& s = setup();
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::unsupervised));
  auto far = s.docs[0];
  far.id = "far";
  embeddings::EmbeddingMatrix e;
  e.provider_tag = s.fixture.embeddings.provider_tag;
  e.dim = s.fixture.embeddings.dim;
  e.doc_ids = {"far"};
  for (std::size_t j = 0; j < e.dim; ++j) e.values.push_back(1000.0 * r.model.reducer.component(0)[j]);
  const auto a = pipeline::transform(r.model, {far}, e);
  CHECK(a.labels[0] == -1);
  CHECK(a.probabilities[0] == 0.0);
}

TEST_CASE("empty input and mismatched embeddings") {
  const auto& s = setup();
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::unsupervised));
  CHECK(pipeline::transform(r.model, {}, s.fixture.embeddings).labels.empty());

  embeddings::EmbeddingMatrix narrow;
  narrow.provider_tag = s.fixture.embeddings.provider_tag;
  narrow.dim = 8;
  narrow.doc_ids = {s.docs[0].id};
  narrow.values.assign(8, 0.5);
  try {
    pipeline::transform(r.model, {s.docs[0]}, narrow);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parameter);
  }

  auto other = s.fixture.embeddings;
  other.provider_tag = "other-model";
  try {
    pipeline::transform(r.model, s.docs, other);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
}

TEST_CASE("mode and guidance must agree") {
  const auto& s = setup();
  auto expect_config_error = [](auto&& f) {
    try {
      f();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::configuration);
    }
  };
  expect_config_error([&] { pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::semisupervised)); });
  expect_config_error(
      [&] { pipeline::fit(s.docs, s.fixture.embeddings, config(pipeline::Mode::unsupervised), &s.guidance); });
}

TEST_CASE("fitting needs enough documents") {
  const auto& s = setup();
  const std::vector<corpus::Document> few(s.docs.begin(), s.docs.begin() + 5);
  CHECK_THROWS_AS(pipeline::fit(few, s.fixture.embeddings, config(pipeline::Mode::unsupervised)), Error);
}

TEST_CASE("nr_topics caps the topic count") {
  const auto& s = setup();
  auto c = config(pipeline::Mode::unsupervised);
  c.min_topic_size = 5;
  c.nr_topics = 2;
  const auto r = pipeline::fit(s.docs, s.fixture.embeddings, c);
  CHECK(r.model.topic_count() <= 2);
  std::set<int> seen(r.model.train_labels.begin(), r.model.train_labels.end());
  seen.erase(-1);
  CHECK(seen.size() == r.model.topic_count());
}

TEST_CASE("config json") {
  auto c = config(pipeline::Mode::semisupervised);
  c.n_gram_range = {1, 2};
  c.nr_topics = 30;
  const auto back = pipeline::config_from_json(pipeline::to_json(c));
  CHECK(back.mode == pipeline::Mode::semisupervised);
  CHECK(back.n_gram_range == c.n_gram_range);
  CHECK(back.nr_topics == 30);
  CHECK(back.min_topic_size == 15);
  CHECK(pipeline::to_json(back) == pipeline::to_json(c));

  CHECK_THROWS_AS(pipeline::config_from_json(nlohmann::json{{"min_topic_sise", 3}}), Error);
  CHECK_THROWS_AS(pipeline::config_from_json(nlohmann::json{{"min_topic_size", 1}}), Error);
  CHECK(pipeline::config_from_json(nlohmann::json{{"nr_topics", "auto"}}).nr_topics == std::nullopt);
  CHECK(pipeline::parse_mode("semi") == pipeline::Mode::semisupervised);
  CHECK_THROWS_AS(pipeline::parse_mode("guided"), Error);
}

}
