#pragma once

#include "civitopic/corpus.hpp"
#include "civitopic/embeddings.hpp"
#include "civitopic/llm.hpp"
#include "civitopic/metrics.hpp"
#include "civitopic/pipeline.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace civitopic::experiments {

struct GridSpec {
  std::vector<topics::NgramRange> n_gram_ranges;
  std::vector<std::optional<int>> nr_topics_values;  // nullopt = auto
  std::vector<std::size_t> min_topic_sizes;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  double train_fraction = 0.8;
  std::size_t workers = 0;  // 0 = hardware concurrency
};

void validate(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);
GridSpec load_grid(const std::filesystem::path& path);

struct GridCell {
  std::size_t id = 0;
  topics::NgramRange n_gram_range;
  std::optional<int> nr_topics;
  std::size_t min_topic_size = 0;
};

/// n_gram_range-major, then nr_topics, then min_topic_size.
std::vector<GridCell> enumerate_cells(const GridSpec& grid);

struct RunRecord {
  std::size_t config_id = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  topics::NgramRange n_gram_range;
  std::optional<int> nr_topics;
  std::size_t min_topic_size = 0;
  std::size_t k = 0;
  double nc = 0.0;
  double nd = 0.0;
  double ws = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct CellSummary {
  GridCell cell;
  std::size_t runs = 0;      // successful
  std::size_t failures = 0;
  double k = 0.0;
  double nc = 0.0;
  double nd = 0.0;
  double ws = 0.0;

  bool partial() const { return failures > 0; }
};

struct GridResult {
  std::vector<GridCell> cells;
  std::vector<RunRecord> records;  // successes, ordered by (config id, repetition)
  std::vector<RunRecord> failures;
  std::vector<CellSummary> summary;  // WS descending; cells without a success last
};

/// Shared inputs of a sweep. Each repetition re-samples the train split with
/// seed base_seed + repetition and fits on it; NC is scored on the train
/// documents' tokens.
struct SweepInputs {
  const corpus::Corpus& corpus;
  const embeddings::EmbeddingMatrix& embeddings;
  pipeline::PipelineConfig base;
  const pipeline::Guidance* guidance = nullptr;
};

RunRecord run_single(const SweepInputs& inputs, const GridCell& cell, std::size_t repetition, std::uint64_t seed,
                     double train_fraction);

GridResult run_grid(const SweepInputs& inputs, const GridSpec& grid);

/// Per-cell means over successful runs, sorted WS descending (ties by id).
std::vector<CellSummary> summarize(const std::vector<GridCell>& cells, const std::vector<RunRecord>& records,
                                   const std::vector<RunRecord>& failures);

struct NamedEmbeddings {
  std::string name;
  embeddings::EmbeddingMatrix matrix;
};

struct CompareSpec {
  std::vector<std::optional<int>> nr_topics_values;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  double train_fraction = 0.8;
  std::size_t workers = 0;
};

struct CurvePoint {
  std::string model;
  std::optional<int> nr_topics;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_ws = 0.0;
  double std_ws = 0.0;  // sample standard deviation; 0 for a single run
};

/// WS curve per embedding set over the nr_topics sweep. Every set must cover
/// the same document ids.
std::vector<CurvePoint> compare_embedding_models(const corpus::Corpus& corpus, const std::vector<NamedEmbeddings>& sets,
                                                 const CompareSpec& spec, const pipeline::PipelineConfig& base);

struct LevelScores {
  double ari = 0.0;
  double nmi = 0.0;
  std::size_t evaluated = 0;
  std::size_t no_match = 0;
  metrics::Contingency table;
};

struct ExternalScores {
  LevelScores n1;
  LevelScores n2;
  std::size_t outliers = 0;
  std::size_t unlabeled = 0;  // assigned documents without a label row
};

/// Outliers and no_match labels are dropped (per level) before scoring.
ExternalScores evaluate_external(const std::vector<std::string>& doc_ids, const std::vector<int>& topics,
                                 const std::vector<llm::LabelResult>& labels);

struct ModelScores {
  double nc = 0.0;
  double nd = 0.0;
  double ws = 0.0;
  double ari_n1 = 0.0;
  double nmi_n1 = 0.0;
  double ari_n2 = 0.0;
  double nmi_n2 = 0.0;
};

struct ComparisonRow {
  std::string metric;
  double unsup = 0.0;
  double semisup = 0.0;
  double diff = 0.0;
  double delta_pct = 0.0;  // (semisup - unsup) / unsup * 100
};

std::vector<ComparisonRow> compare_scores(const ModelScores& unsup, const ModelScores& semisup);
void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path);
std::vector<ComparisonRow> read_comparison(const std::filesystem::path& path);

void write_external_report(const ExternalScores& scores, const std::filesystem::path& dir);

struct Report {
  std::vector<RunRecord> records;  // failed runs included
  std::optional<ModelScores> unsup;
  std::optional<ModelScores> semisup;
  std::optional<ExternalScores> external;
  std::vector<CurvePoint> curves;
};

/// runs.csv, top10.csv, timings.csv, plus comparison.csv, scores.json,
/// contingency_{n1,n2}_{counts,rownorm}.csv and curves.csv when the
/// corresponding data is present. Everything except timings.csv depends only
/// on the records and scores.
void emit_report(const Report& report, const std::filesystem::path& dir);

/// Reads runs.csv (and timings.csv when present) back into records.
std::vector<RunRecord> read_runs(const std::filesystem::path& dir);

}  // namespace civitopic::experiments
