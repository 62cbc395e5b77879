#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/experiments.hpp"
#include "civitopic/synthetic.hpp"

#include <cmath>

using namespace civitopic;
using nlohmann::json;

namespace {

struct Setup {
  synthetic::Fixture fixture;
  corpus::Corpus corpus;
};

const Setup& setup() {
  static const Setup s = [] {
    synthetic::FixtureSpec spec;
    spec.documents = 250;
    spec.categories = 3;
    spec.noise = 1.0;
    spec.seed = 5;
    Setup out;
    out.fixture = synthetic::make_fixture(spec);
    out.corpus = testing::prepared_corpus(out.fixture);
    return out;
  }();
  return s;
}

experiments::GridSpec small_grid() {
  return experiments::grid_from_json(json{{"n_gram_ranges", {{1, 1}, {1, 2}}},
                                          {"nr_topics_values", {"auto", 2}},
                                          {"min_topic_sizes", {8, 500}},
                                          {"repetitions", 2},
                                          {"base_seed", 3},
                                          {"workers", 4}});
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("cell enumeration order and count") {
  const auto grid = experiments::grid_from_json(
      json{{"n_gram_ranges", {{1, 1}, {1, 2}}},
           {"nr_topics_values", {10, 30, 50, 70, 90, 110, 130, "auto"}},
           {"min_topic_sizes", {3, 5, 10, 15, 20, 25}}});
  const auto cells = experiments::enumerate_cells(grid);
  REQUIRE(cells.size() == 96);
  CHECK(cells[0].n_gram_range == topics::NgramRange{1, 1});
  CHECK(cells[0].nr_topics == 10);
  CHECK(cells[0].min_topic_size == 3);
  CHECK(cells[1].min_topic_size == 5);
  CHECK(cells[6].nr_topics == 30);
  CHECK(cells[47].nr_topics == std::nullopt);
  CHECK(cells[48].n_gram_range == topics::NgramRange{1, 2});
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i].id == i);
}

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(experiments::grid_from_json(json{{"n_gram_ranges", {{1, 1}}}}), Error);
  CHECK_THROWS_AS(experiments::grid_from_json(json{{"n_gram_ranges", json::array()},
                                                   {"nr_topics_values", {"auto"}},
                                                   {"min_topic_sizes", {5}}}),
                  Error);
  CHECK_THROWS_AS(experiments::grid_from_json(
                      json{{"n_gram_ranges", {{1, 1}}}, {"nr_topics_values", {0}}, {"min_topic_sizes", {5}}}),
                  Error);
}

TEST_CASE("sweep records every run, failures included") {
  const auto& s = setup();
  const auto grid = small_grid();
  const experiments::SweepInputs in{s.corpus, s.fixture.embeddings, {}, nullptr};
  const auto r = experiments::run_grid(in, grid);
  CHECK(r.cells.size() == 8);
  CHECK(r.records.size() + r.failures.size() == 16);
  // min_topic_size 500 exceeds the 200 train documents.
  CHECK(r.failures.size() == 8);
  for (const auto& f : r.failures) {
    CHECK(f.min_topic_size == 500);
    CHECK_FALSE(f.error.empty());
  }
  for (const auto& rec : r.records) {
    CHECK(rec.seed == 3 + rec.repetition);
    CHECK(rec.k > 0);
    CHECK(rec.ws == doctest::Approx(0.8 * rec.nc + 0.2 * rec.nd));
  }
  REQUIRE(r.summary.size() == 8);
  for (std::size_t i = 1; i < 4; ++i) CHECK(r.summary[i].ws <= r.summary[i - 1].ws);
  for (std::size_t i = 4; i < 8; ++i) {
    CHECK(r.summary[i].runs == 0);
    CHECK(r.summary[i].partial());
  }

  // Worker count does not change the results.
  auto serial = grid;
  serial.workers = 1;
  const auto r1 = experiments::run_grid(in, serial);
  REQUIRE(r1.records.size() == r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r1.records[i].config_id == r.records[i].config_id);
    CHECK(r1.records[i].ws == r.records[i].ws);
  }
}

TEST_CASE("summary means and ordering") {
  std::vector<experiments::GridCell> cells{{0, {1, 1}, 10, 5}, {1, {1, 1}, 20, 5}, {2, {1, 1}, 30, 5}};
  auto rec = [](std::size_t id, std::size_t rep, double ws) {
    experiments::RunRecord r;
    r.config_id = id;
    r.repetition = rep;
    r.ws = ws;
    r.k = 4 + rep;
    return r;
  };
  experiments::RunRecord failed = rec(0, 2, 0.0);
  failed.failed = true;
  const auto s = experiments::summarize(cells, {rec(0, 0, 0.2), rec(0, 1, 0.4), rec(2, 0, 0.3)}, {failed});
  REQUIRE(s.size() == 3);
  CHECK(s[0].cell.id == 0);
  CHECK(s[0].ws == doctest::Approx(0.3));
  CHECK(s[0].k == doctest::Approx(4.5));
  CHECK(s[0].partial());
  CHECK(s[1].cell.id == 2);
  CHECK(s[2].cell.id == 1);
  CHECK(s[2].runs == 0);
}

TEST_CASE("report files can be regenerated byte for byte") {
  const auto& s = setup();
  testing::TempDir dir("exp");
  const experiments::SweepInputs in{s.corpus, s.fixture.embeddings, {}, nullptr};
  const auto r = experiments::run_grid(in, small_grid());
  experiments::Report report;
  report.records = r.records;
  report.records.insert(report.records.end(), r.failures.begin(), r.failures.end());
  experiments::emit_report(report, dir / "first");

  experiments::Report again;
  again.records = experiments::read_runs(dir / "first");
  CHECK(again.records.size() == 16);
  experiments::emit_report(again, dir / "second");
  for (const char* name : {"runs.csv", "aggregate.csv", "top10.csv", "timings.csv"}) {
    CHECK_MESSAGE(io::read_file(dir / "first" / name) == io::read_file(dir / "second" / name), name);
  }

  const auto top = csv::read_table((dir / "first" / "top10.csv").string());
  const auto ws = top.required_column("ws");
  CHECK(top.size() == 4);
  for (std::size_t i = 1; i < top.size(); ++i) {
    CHECK(std::stod(std::string(top.field(i, ws))) <= std::stod(std::string(top.field(i - 1, ws))));
  }
  CHECK_THROWS_AS(experiments::emit_report(experiments::Report{}, dir / "empty"), Error);
}

TEST_CASE("embedding comparison") {
  const auto& s = setup();
  experiments::CompareSpec spec;
  spec.nr_topics_values = {std::nullopt, 2};
  spec.repetitions = 2;
  const std::vector<experiments::NamedEmbeddings> sets{
      {"a", s.fixture.embeddings},
      {"b", s.fixture.embeddings},
      {"noise", synthetic::noise_embeddings(s.fixture.embeddings, 9, "noise")}};
  pipeline::PipelineConfig base;
  base.min_topic_size = 8;
  const auto curves = experiments::compare_embedding_models(s.corpus, sets, spec, base);
  REQUIRE(curves.size() == 6);
  CHECK(curves[0].model == "a");
  CHECK(curves[0].mean_ws == curves[2].mean_ws);
  CHECK(curves[1].std_ws == curves[3].std_ws);
  for (const auto& c : curves) CHECK(c.runs + c.failures == 2);

  CHECK_THROWS_AS(experiments::compare_embedding_models(s.corpus, {sets[0]}, spec, base), Error);
  auto partial = sets[1];
  partial.matrix.doc_ids.pop_back();
  partial.matrix.values.resize(partial.matrix.values.size() - partial.matrix.dim);
  try {
    experiments::compare_embedding_models(s.corpus, {sets[0], partial}, spec, base);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
}

TEST_CASE("external scores drop outliers and no_match") {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
  const std::vector<int> topics{0, 0, 1, 1, -1, 1};
  const std::vector<llm::LabelResult> labels{{"a", "X", "x1", ""}, {"b", "X", "x2", ""}, {"c", "Y", "y1", ""},
                                             {"d", "Y", "no_match", ""}, {"e", "X", "x1", ""},
                                             {"f", "no_match", "y1", ""}};
  const auto s = experiments::evaluate_external(ids, topics, labels);
  CHECK(s.outliers == 1);
  CHECK(s.n1.evaluated == 4);
  CHECK(s.n1.no_match == 1);
  CHECK(s.n1.ari == doctest::Approx(oracle::ari({0, 0, 1, 1}, {0, 0, 1, 1})));
  CHECK(s.n2.evaluated == 4);
  CHECK(s.n2.ari == doctest::Approx(oracle::ari({0, 0, 1, 1}, {0, 1, 2, 2})));
  CHECK(s.n2.nmi == doctest::Approx(oracle::nmi({0, 0, 1, 1}, {0, 1, 2, 2})).epsilon(1e-12));

  const std::vector<int> all_out{-1, -1, -1, -1, -1, 0};
  try {
    experiments::evaluate_external(ids, all_out, labels);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::evaluation);
  }
}

TEST_CASE("comparison rows and round trip") {
  experiments::ModelScores u{0.1, 0.8, 0.24, 0.2, 0.5, 0.25, 0.6};
  experiments::ModelScores s{0.12, 0.78, 0.252, 0.3, 0.55, 0.2, 0.6};
  const auto rows = experiments::compare_scores(u, s);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0].metric == "NC");
  CHECK(rows[0].diff == doctest::Approx(0.02));
  CHECK(rows[0].delta_pct == doctest::Approx(20.0));
  CHECK(rows[5].metric == "ARI (N2)");
  CHECK(rows[5].delta_pct == doctest::Approx(-20.0));
  CHECK(rows[6].diff == 0.0);

  testing::TempDir dir("exp");
  experiments::write_comparison(rows, dir / "comparison.csv");
  const auto back = experiments::read_comparison(dir / "comparison.csv");
  REQUIRE(back.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(back[i].metric == rows[i].metric);
    CHECK(back[i].unsup == rows[i].unsup);
    CHECK(back[i].delta_pct == rows[i].delta_pct);
  }
}

}
