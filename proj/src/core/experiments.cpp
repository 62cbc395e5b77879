#include "civitopic/experiments.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace civitopic::experiments {

using nlohmann::json;

void validate(const GridSpec& grid) {
  require(!grid.n_gram_ranges.empty() && !grid.nr_topics_values.empty() && !grid.min_topic_sizes.empty(),
          ErrorCode::parameter, "grid must have at least one value per axis");
  require(grid.repetitions >= 1, ErrorCode::parameter, "repetitions must be >= 1");
  require(grid.train_fraction > 0.0 && grid.train_fraction < 1.0, ErrorCode::parameter,
          "train_fraction must lie in (0,1)");
  for (const auto& r : grid.n_gram_ranges) topics::validate(r);
  for (const auto& nr : grid.nr_topics_values) {
    if (nr) require(*nr >= 2, ErrorCode::parameter, "nr_topics values must be >= 2 or auto");
  }
  for (auto mts : grid.min_topic_sizes) require(mts >= 2, ErrorCode::parameter, "min_topic_size values must be >= 2");
}

namespace {

std::optional<int> parse_nr_topics(const json& v) {
  if (v.is_string()) {
    require(v.get<std::string>() == "auto", ErrorCode::schema, "nr_topics values must be integers or \"auto\"");
    return std::nullopt;
  }
  return v.get<int>();
}

}  // namespace

GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    require(j.is_object(), ErrorCode::schema, "grid spec must be a JSON object");
    for (const auto& r : j.at("n_gram_ranges")) {
      require(r.is_array() && r.size() == 2, ErrorCode::schema, "each n_gram_range must be a pair");
      g.n_gram_ranges.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
    }
    for (const auto& v : j.at("nr_topics_values")) g.nr_topics_values.push_back(parse_nr_topics(v));
    g.min_topic_sizes = j.at("min_topic_sizes").get<std::vector<std::size_t>>();
    if (j.contains("repetitions")) g.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("base_seed")) g.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("train_fraction")) g.train_fraction = j.at("train_fraction").get<double>();
    if (j.contains("workers")) g.workers = j.at("workers").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("grid spec: ") + e.what());
  }
  validate(g);
  return g;
}

GridSpec load_grid(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::format, path.string() + ": " + e.what());
  }
  return grid_from_json(j);
}

std::vector<GridCell> enumerate_cells(const GridSpec& grid) {
  std::vector<GridCell> cells;
  for (const auto& range : grid.n_gram_ranges) {
    for (const auto& nr : grid.nr_topics_values) {
      for (auto mts : grid.min_topic_sizes) cells.push_back({cells.size(), range, nr, mts});
    }
  }
  return cells;
}

RunRecord run_single(const SweepInputs& inputs, const GridCell& cell, std::size_t repetition, std::uint64_t seed,
                     double train_fraction) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord r;
  r.config_id = cell.id;
  r.repetition = repetition;
  r.seed = seed;
  r.n_gram_range = cell.n_gram_range;
  r.nr_topics = cell.nr_topics;
  r.min_topic_size = cell.min_topic_size;
  try {
    const auto sampled = corpus::split(inputs.corpus, train_fraction, seed);
    const auto train = corpus::select(sampled, corpus::Split::train);
    auto config = inputs.base;
    config.n_gram_range = cell.n_gram_range;
    config.nr_topics = cell.nr_topics;
    config.min_topic_size = cell.min_topic_size;
    config.seed = seed;
    const auto* guidance = config.mode == pipeline::Mode::semisupervised ? inputs.guidance : nullptr;
    const auto fitted = pipeline::fit(train, inputs.embeddings, config, guidance);
    r.k = fitted.model.topic_count();
    require(r.k > 0, ErrorCode::evaluation, "no topics found");
    const auto scores = metrics::internal_scores(fitted.model.representations, pipeline::token_lists(train));
    r.nc = scores.nc;
    r.nd = scores.nd;
    r.ws = scores.ws;
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

void parallel_for(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(jobs, 1));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<GridCell>& cells, const std::vector<RunRecord>& records,
                                   const std::vector<RunRecord>& failures) {
  std::map<std::size_t, CellSummary> by_id;
  for (const auto& c : cells) by_id[c.id].cell = c;
  for (const auto& r : records) {
    auto& s = by_id.at(r.config_id);
    ++s.runs;
    s.k += static_cast<double>(r.k);
    s.nc += r.nc;
    s.nd += r.nd;
    s.ws += r.ws;
  }
  for (const auto& f : failures) ++by_id.at(f.config_id).failures;
  std::vector<CellSummary> out;
  for (auto& [id, s] : by_id) {
    if (s.runs > 0) {
      const auto n = static_cast<double>(s.runs);
      s.k /= n;
      s.nc /= n;
      s.nd /= n;
      s.ws /= n;
    }
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const CellSummary& a, const CellSummary& b) {
    if ((a.runs > 0) != (b.runs > 0)) return a.runs > 0;
    if (a.runs > 0 && a.ws != b.ws) return a.ws > b.ws;
    return a.cell.id < b.cell.id;
  });
  return out;
}

GridResult run_grid(const SweepInputs& inputs, const GridSpec& grid) {
  validate(grid);
  GridResult result;
  result.cells = enumerate_cells(grid);
  const std::size_t jobs = result.cells.size() * grid.repetitions;
  std::vector<RunRecord> all(jobs);
  parallel_for(jobs, grid.workers, [&](std::size_t j) {
    const auto& cell = result.cells[j / grid.repetitions];
    const std::size_t rep = j % grid.repetitions;
    all[j] = run_single(inputs, cell, rep, grid.base_seed + rep, grid.train_fraction);
  });
  for (auto& r : all) (r.failed ? result.failures : result.records).push_back(std::move(r));
  result.summary = summarize(result.cells, result.records, result.failures);
  return result;
}

std::vector<CurvePoint> compare_embedding_models(const corpus::Corpus& corpus, const std::vector<NamedEmbeddings>& sets,
                                                 const CompareSpec& spec, const pipeline::PipelineConfig& base) {
  require(sets.size() >= 2, ErrorCode::parameter, "comparison needs at least two embedding sets");
  require(!spec.nr_topics_values.empty(), ErrorCode::parameter, "nr_topics sweep is empty");
  require(spec.repetitions >= 1, ErrorCode::parameter, "repetitions must be >= 1");
  require(base.mode == pipeline::Mode::unsupervised, ErrorCode::configuration,
          "embedding comparison runs in unsupervised mode");
  const std::set<std::string> reference(sets.front().matrix.doc_ids.begin(), sets.front().matrix.doc_ids.end());
  for (const auto& s : sets) {
    const std::set<std::string> ids(s.matrix.doc_ids.begin(), s.matrix.doc_ids.end());
    require(ids == reference, ErrorCode::configuration,
            "embedding set '" + s.name + "' covers different documents than '" + sets.front().name + "'");
  }

  const std::size_t per_set = spec.nr_topics_values.size() * spec.repetitions;
  const std::size_t jobs = sets.size() * per_set;
  std::vector<RunRecord> all(jobs);
  parallel_for(jobs, spec.workers, [&](std::size_t j) {
    const auto& set = sets[j / per_set];
    const std::size_t within = j % per_set;
    const std::size_t nr_index = within / spec.repetitions;
    const std::size_t rep = within % spec.repetitions;
    GridCell cell{nr_index, base.n_gram_range, spec.nr_topics_values[nr_index], base.min_topic_size};
    SweepInputs inputs{corpus, set.matrix, base, nullptr};
    all[j] = run_single(inputs, cell, rep, spec.base_seed + rep, spec.train_fraction);
  });

  std::vector<CurvePoint> out;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t n = 0; n < spec.nr_topics_values.size(); ++n) {
      CurvePoint p;
      p.model = sets[s].name;
      p.nr_topics = spec.nr_topics_values[n];
      std::vector<double> ws;
      for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const auto& r = all[s * per_set + n * spec.repetitions + rep];
        if (r.failed) {
          ++p.failures;
        } else {
          ws.push_back(r.ws);
        }
      }
      p.runs = ws.size();
      p.mean_ws = mean(ws);
      p.std_ws = sample_std(ws);
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

LevelScores score_level(const std::vector<int>& topic_ids, const std::vector<std::string>& labels, std::size_t no_match,
                        const char* level) {
  require(topic_ids.size() >= 2, ErrorCode::evaluation,
          std::string("fewer than 2 documents left for ") + level + " after removing outliers and no_match");
  LevelScores s;
  s.evaluated = topic_ids.size();
  s.no_match = no_match;
  const auto codes = metrics::encode_labels(labels);
  s.ari = metrics::adjusted_rand_index(topic_ids, codes);
  s.nmi = metrics::normalized_mutual_information(topic_ids, codes);
  s.table = metrics::contingency(topic_ids, labels);
  return s;
}

}  // namespace

ExternalScores evaluate_external(const std::vector<std::string>& doc_ids, const std::vector<int>& topic_labels,
                                 const std::vector<llm::LabelResult>& labels) {
  require(doc_ids.size() == topic_labels.size(), ErrorCode::parameter, "doc ids and topics differ in length");
  std::unordered_map<std::string, const llm::LabelResult*> by_id;
  for (const auto& l : labels) {
    require(by_id.emplace(l.doc_id, &l).second, ErrorCode::data, "duplicate label row for document '" + l.doc_id + "'");
  }
  ExternalScores out;
  std::vector<int> t1, t2;
  std::vector<std::string> l1, l2;
  std::size_t nm1 = 0, nm2 = 0;
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (topic_labels[i] < 0) {
      ++out.outliers;
      continue;
    }
    auto it = by_id.find(doc_ids[i]);
    if (it == by_id.end()) {
      ++out.unlabeled;
      continue;
    }
    const auto& l = *it->second;
    if (l.n1 == llm::kNoMatch) {
      ++nm1;
    } else {
      t1.push_back(topic_labels[i]);
      l1.push_back(l.n1);
    }
    if (l.n2 == llm::kNoMatch) {
      ++nm2;
    } else {
      t2.push_back(topic_labels[i]);
      l2.push_back(l.n2);
    }
  }
  out.n1 = score_level(t1, l1, nm1, "N1");
  out.n2 = score_level(t2, l2, nm2, "N2");
  return out;
}

std::vector<ComparisonRow> compare_scores(const ModelScores& u, const ModelScores& s) {
  const std::vector<std::tuple<const char*, double, double>> pairs = {
      {"NC", u.nc, s.nc},         {"ND", u.nd, s.nd},         {"WS", u.ws, s.ws},
      {"ARI (N1)", u.ari_n1, s.ari_n1}, {"NMI (N1)", u.nmi_n1, s.nmi_n1}, {"ARI (N2)", u.ari_n2, s.ari_n2},
      {"NMI (N2)", u.nmi_n2, s.nmi_n2}};
  std::vector<ComparisonRow> rows;
  for (const auto& [name, a, b] : pairs) {
    ComparisonRow r{name, a, b, b - a, std::numeric_limits<double>::quiet_NaN()};
    if (a != 0.0) r.delta_pct = (b - a) / a * 100.0;
    rows.push_back(r);
  }
  return rows;
}

namespace {

std::string fmt(double v) { return text::format_double(v); }

double parse_double(std::string_view field, const std::string& where) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  require(ec == std::errc{} && ptr == field.data() + field.size() && !field.empty(), ErrorCode::format,
          where + ": '" + std::string(field) + "' is not a number");
  return v;
}

std::uint64_t parse_uint(std::string_view field, const std::string& where) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  require(ec == std::errc{} && ptr == field.data() + field.size() && !field.empty(), ErrorCode::format,
          where + ": '" + std::string(field) + "' is not a non-negative integer");
  return v;
}

std::string range_text(topics::NgramRange r) { return std::to_string(r.lo) + "-" + std::to_string(r.hi); }

topics::NgramRange parse_range(std::string_view s, const std::string& where) {
  const auto dash = s.find('-');
  require(dash != std::string_view::npos, ErrorCode::format, where + ": bad n_gram_range '" + std::string(s) + "'");
  return {static_cast<int>(parse_uint(s.substr(0, dash), where)), static_cast<int>(parse_uint(s.substr(dash + 1), where))};
}

std::string nr_text(const std::optional<int>& nr) { return nr ? std::to_string(*nr) : "auto"; }

std::optional<int> parse_nr(std::string_view s, const std::string& where) {
  if (s == "auto") return std::nullopt;
  return static_cast<int>(parse_uint(s, where));
}

void write_csv(const std::filesystem::path& path, const std::vector<csv::Row>& rows) {
  std::ostringstream out;
  csv::Writer writer(out);
  for (const auto& r : rows) writer.write(r);
  io::write_file(path, out.str());
}

json level_json(const LevelScores& s) {
  return {{"ari", s.ari}, {"nmi", s.nmi}, {"evaluated", s.evaluated}, {"no_match", s.no_match}};
}

json scores_json(const ModelScores& s) {
  return {{"nc", s.nc},         {"nd", s.nd},         {"ws", s.ws},        {"ari_n1", s.ari_n1},
          {"nmi_n1", s.nmi_n1}, {"ari_n2", s.ari_n2}, {"nmi_n2", s.nmi_n2}};
}

}  // namespace

void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  std::vector<csv::Row> out{{"metric", "unsup", "semisup", "diff", "delta_pct"}};
  for (const auto& r : rows) out.push_back({r.metric, fmt(r.unsup), fmt(r.semisup), fmt(r.diff), fmt(r.delta_pct)});
  write_csv(path, out);
}

std::vector<ComparisonRow> read_comparison(const std::filesystem::path& path) {
  const auto table = csv::read_table(path.string());
  const auto m = table.required_column("metric");
  const auto u = table.required_column("unsup");
  const auto s = table.required_column("semisup");
  const auto d = table.required_column("diff");
  const auto p = table.required_column("delta_pct");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string where = path.string() + " row " + std::to_string(i + 1);
    rows.push_back({std::string(table.field(i, m)), parse_double(table.field(i, u), where),
                    parse_double(table.field(i, s), where), parse_double(table.field(i, d), where),
                    parse_double(table.field(i, p), where)});
  }
  return rows;
}

void write_external_report(const ExternalScores& scores, const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  const std::pair<const char*, const LevelScores*> levels[] = {{"n1", &scores.n1}, {"n2", &scores.n2}};
  for (const auto& [name, level] : levels) {
    metrics::write_contingency_counts(level->table, (dir / ("contingency_" + std::string(name) + "_counts.csv")).string());
    metrics::write_contingency_normalized(level->table, level->table.row_normalized(),
                                          (dir / ("contingency_" + std::string(name) + "_rownorm.csv")).string());
  }
  json j = {{"n1", level_json(scores.n1)},
            {"n2", level_json(scores.n2)},
            {"outliers", scores.outliers},
            {"unlabeled", scores.unlabeled}};
  io::write_file(dir / "external.json", j.dump(2) + "\n");
}

void emit_report(const Report& report, const std::filesystem::path& dir) {
  require(!report.records.empty(), ErrorCode::parameter, "report needs at least one run record");
  io::ensure_directory(dir);

  auto records = report.records;
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.config_id, a.repetition) < std::tie(b.config_id, b.repetition);
  });

  std::vector<csv::Row> runs{{"config_id", "repetition", "seed", "n_gram_range", "nr_topics", "min_topic_size",
                              "topics", "nc", "nd", "ws", "status", "error"}};
  std::vector<csv::Row> timings{{"config_id", "repetition", "wall_seconds"}};
  std::map<std::size_t, GridCell> cells;
  std::vector<RunRecord> ok, failed;
  for (const auto& r : records) {
    cells[r.config_id] = {r.config_id, r.n_gram_range, r.nr_topics, r.min_topic_size};
    if (r.failed) {
      runs.push_back({std::to_string(r.config_id), std::to_string(r.repetition), std::to_string(r.seed),
                      range_text(r.n_gram_range), nr_text(r.nr_topics), std::to_string(r.min_topic_size), "", "", "",
                      "", "failed", r.error});
      failed.push_back(r);
    } else {
      runs.push_back({std::to_string(r.config_id), std::to_string(r.repetition), std::to_string(r.seed),
                      range_text(r.n_gram_range), nr_text(r.nr_topics), std::to_string(r.min_topic_size),
                      std::to_string(r.k), fmt(r.nc), fmt(r.nd), fmt(r.ws), "ok", ""});
      ok.push_back(r);
    }
    timings.push_back({std::to_string(r.config_id), std::to_string(r.repetition), fmt(r.wall_seconds)});
  }
  write_csv(dir / "runs.csv", runs);
  write_csv(dir / "timings.csv", timings);

  std::vector<GridCell> cell_list;
  for (const auto& [id, c] : cells) cell_list.push_back(c);
  const auto summary = summarize(cell_list, ok, failed);
  const csv::Row summary_header{"rank", "config_id", "n_gram_range", "nr_topics", "min_topic_size", "topics",
                                "nc",   "nd",        "ws",           "runs",      "failures",       "partial"};
  auto summary_row = [](std::size_t rank, const CellSummary& s) -> csv::Row {
    const bool any = s.runs > 0;
    return {std::to_string(rank),
            std::to_string(s.cell.id),
            range_text(s.cell.n_gram_range),
            nr_text(s.cell.nr_topics),
            std::to_string(s.cell.min_topic_size),
            any ? fmt(s.k) : "",
            any ? fmt(s.nc) : "",
            any ? fmt(s.nd) : "",
            any ? fmt(s.ws) : "",
            std::to_string(s.runs),
            std::to_string(s.failures),
            s.partial() ? "true" : "false"};
  };
  std::vector<csv::Row> aggregate{summary_header};
  std::vector<csv::Row> top10{summary_header};
  for (std::size_t i = 0; i < summary.size(); ++i) {
    aggregate.push_back(summary_row(i + 1, summary[i]));
    if (summary[i].runs > 0 && top10.size() <= 10) top10.push_back(summary_row(i + 1, summary[i]));
  }
  write_csv(dir / "aggregate.csv", aggregate);
  write_csv(dir / "top10.csv", top10);

  json scores = json::object();
  if (report.unsup) scores["unsup"] = scores_json(*report.unsup);
  if (report.semisup) scores["semisup"] = scores_json(*report.semisup);
  if (report.unsup && report.semisup) write_comparison(compare_scores(*report.unsup, *report.semisup), dir / "comparison.csv");
  if (report.external) {
    write_external_report(*report.external, dir);
    scores["external"] = {{"n1", level_json(report.external->n1)}, {"n2", level_json(report.external->n2)}};
  }
  if (!scores.empty()) io::write_file(dir / "scores.json", scores.dump(2) + "\n");

  if (!report.curves.empty()) {
    std::vector<csv::Row> curves{{"model", "nr_topics", "mean_ws", "std_ws", "runs", "failures"}};
    for (const auto& p : report.curves) {
      curves.push_back({p.model, nr_text(p.nr_topics), p.runs ? fmt(p.mean_ws) : "", p.runs ? fmt(p.std_ws) : "",
                        std::to_string(p.runs), std::to_string(p.failures)});
    }
    write_csv(dir / "curves.csv", curves);
  }
}

std::vector<RunRecord> read_runs(const std::filesystem::path& dir) {
  const auto path = dir / "runs.csv";
  const auto table = csv::read_table(path.string());
  const auto col = [&](const char* name) { return table.required_column(name); };
  const auto c_id = col("config_id"), c_rep = col("repetition"), c_seed = col("seed"), c_range = col("n_gram_range"),
             c_nr = col("nr_topics"), c_mts = col("min_topic_size"), c_k = col("topics"), c_nc = col("nc"),
             c_nd = col("nd"), c_ws = col("ws"), c_status = col("status"), c_err = col("error");
  std::vector<RunRecord> out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string where = path.string() + " row " + std::to_string(i + 1);
    RunRecord r;
    r.config_id = parse_uint(table.field(i, c_id), where);
    r.repetition = parse_uint(table.field(i, c_rep), where);
    r.seed = parse_uint(table.field(i, c_seed), where);
    r.n_gram_range = parse_range(table.field(i, c_range), where);
    r.nr_topics = parse_nr(table.field(i, c_nr), where);
    r.min_topic_size = parse_uint(table.field(i, c_mts), where);
    r.failed = table.field(i, c_status) == "failed";
    if (r.failed) {
      r.error = std::string(table.field(i, c_err));
    } else {
      r.k = parse_uint(table.field(i, c_k), where);
      r.nc = parse_double(table.field(i, c_nc), where);
      r.nd = parse_double(table.field(i, c_nd), where);
      r.ws = parse_double(table.field(i, c_ws), where);
    }
    index[{r.config_id, r.repetition}] = out.size();
    out.push_back(std::move(r));
  }
  const auto timing_path = dir / "timings.csv";
  if (std::filesystem::exists(timing_path)) {
    const auto t = csv::read_table(timing_path.string());
    const auto t_id = t.required_column("config_id"), t_rep = t.required_column("repetition"),
               t_wall = t.required_column("wall_seconds");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string where = timing_path.string() + " row " + std::to_string(i + 1);
      auto it = index.find({parse_uint(t.field(i, t_id), where), parse_uint(t.field(i, t_rep), where)});
      if (it != index.end()) out[it->second].wall_seconds = parse_double(t.field(i, t_wall), where);
    }
  }
  return out;
}

}  // namespace civitopic::experiments
