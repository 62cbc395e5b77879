#include "civitopic/civitopic.h"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/experiments.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/llm.hpp"
#include "civitopic/metrics.hpp"
#include "civitopic/pipeline.hpp"
#include "civitopic/synthetic.hpp"
#include "civitopic/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct civ_corpus {
  civitopic::corpus::Corpus corpus;
  civitopic::corpus::PreprocessConfig preprocess;
};

struct civ_embeddings {
  civitopic::embeddings::EmbeddingMatrix matrix;
};

struct civ_taxonomy {
  civitopic::Taxonomy taxonomy;
};

struct civ_model {
  civitopic::pipeline::FittedModel model;
};

struct civ_assignment {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> probabilities;
};

namespace {

using namespace civitopic;
using nlohmann::json;

thread_local std::string last_error;

civ_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::parameter: return CIV_ERR_PARAMETER;
    case ErrorCode::schema: return CIV_ERR_SCHEMA;
    case ErrorCode::io: return CIV_ERR_IO;
    case ErrorCode::format: return CIV_ERR_FORMAT;
    case ErrorCode::data: return CIV_ERR_DATA;
    case ErrorCode::configuration: return CIV_ERR_CONFIGURATION;
    case ErrorCode::transport: return CIV_ERR_TRANSPORT;
    case ErrorCode::protocol: return CIV_ERR_PROTOCOL;
    case ErrorCode::evaluation: return CIV_ERR_EVALUATION;
    case ErrorCode::empty_topic: return CIV_ERR_EMPTY_TOPIC;
    case ErrorCode::undefined_similarity: return CIV_ERR_UNDEFINED_SIMILARITY;
    case ErrorCode::internal: return CIV_ERR_INTERNAL;
  }
  return CIV_ERR_INTERNAL;
}

struct NullArgument {
  const char* name;
};

template <typename F>
civ_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return CIV_OK;
  } catch (const NullArgument& e) {
    last_error = std::string("argument '") + e.name + "' must not be NULL";
    return CIV_ERR_NULL_ARGUMENT;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CIV_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CIV_ERR_INTERNAL;
  }
}

template <typename T>
const T& need(const T* p, const char* name) {
  if (!p) throw NullArgument{name};
  return *p;
}

template <typename T>
T& need(T* p, const char* name) {
  if (!p) throw NullArgument{name};
  return *p;
}

const char* need_str(const char* s, const char* name) {
  if (!s) throw NullArgument{name};
  return s;
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json(const char* text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string(what) + ": " + e.what());
  }
}

std::vector<corpus::Document> documents(const civ_corpus& c, const char* split) {
  const std::string name = need_str(split, "split");
  if (name == "all") return c.corpus.documents;
  require(name == "train" || name == "test" || name == "unassigned", ErrorCode::parameter,
          "split must be train, test, unassigned or all, got '" + name + "'");
  return corpus::select(c.corpus, corpus::parse_split(name));
}

pipeline::Guidance make_guidance(const civ_corpus& c, const civ_taxonomy& tax, const civ_embeddings* seeds,
                                 const pipeline::PipelineConfig& config) {
  pipeline::Guidance g;
  g.taxonomy = tax.taxonomy;
  g.preprocess = c.preprocess;
  if (seeds) g.seed_topics = embeddings::make_seed_topics(seed_lists(tax.taxonomy, config.max_seed_subterms), seeds->matrix);
  return g;
}

json topics_json(const pipeline::FittedModel& m) {
  json out = json::array();
  for (const auto& t : m.representations) {
    json words = json::array();
    for (const auto& w : t.top_words) words.push_back({w.term, w.weight});
    out.push_back({{"topic", t.topic_id}, {"size", t.size}, {"name", t.name}, {"words", words}});
  }
  return out;
}

json level_json(const experiments::LevelScores& s) {
  return {{"ari", s.ari}, {"nmi", s.nmi}, {"evaluated", s.evaluated}, {"no_match", s.no_match}};
}

json external_json(const experiments::ExternalScores& s) {
  return {{"n1", level_json(s.n1)}, {"n2", level_json(s.n2)}, {"outliers", s.outliers}, {"unlabeled", s.unlabeled}};
}

experiments::ModelScores model_scores_from_json(const json& j) {
  experiments::ModelScores s;
  try {
    s.nc = j.at("nc").get<double>();
    s.nd = j.at("nd").get<double>();
    s.ws = j.at("ws").get<double>();
    s.ari_n1 = j.at("ari_n1").get<double>();
    s.nmi_n1 = j.at("nmi_n1").get<double>();
    s.ari_n2 = j.at("ari_n2").get<double>();
    s.nmi_n2 = j.at("nmi_n2").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("model scores: ") + e.what());
  }
  return s;
}

civ_assignment* make_assignment(std::vector<std::string> ids, const clustering::ClusterAssignment& a) {
  auto* out = new civ_assignment;
  out->ids = std::move(ids);
  out->labels = a.labels;
  out->probabilities = a.probabilities;
  return out;
}

std::vector<std::string> ids_of(const std::vector<corpus::Document>& docs) {
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

}  // namespace

extern "C" {

const char* civ_version(void) { return "0.1.0"; }

const char* civ_status_string(civ_status status) {
  switch (status) {
    case CIV_OK: return "ok";
    case CIV_ERR_PARAMETER: return "parameter error";
    case CIV_ERR_SCHEMA: return "schema error";
    case CIV_ERR_IO: return "I/O error";
    case CIV_ERR_FORMAT: return "format error";
    case CIV_ERR_DATA: return "data error";
    case CIV_ERR_CONFIGURATION: return "configuration error";
    case CIV_ERR_TRANSPORT: return "transport error";
    case CIV_ERR_PROTOCOL: return "protocol error";
    case CIV_ERR_EVALUATION: return "evaluation error";
    case CIV_ERR_EMPTY_TOPIC: return "empty topic";
    case CIV_ERR_UNDEFINED_SIMILARITY: return "undefined similarity";
    case CIV_ERR_INTERNAL: return "internal error";
    case CIV_ERR_NULL_ARGUMENT: return "null argument";
  }
  return "unknown status";
}

const char* civ_last_error(void) { return last_error.c_str(); }

void civ_string_free(char* s) { std::free(s); }

civ_status civ_corpus_load(const char* path, const char* format, civ_corpus** out) {
  return guard([&] {
    need(out, "out");
    auto c = std::make_unique<civ_corpus>();
    c->corpus = corpus::load_corpus(need_str(path, "path"), corpus::parse_format(format ? format : "csv"));
    *out = c.release();
  });
}

void civ_corpus_free(civ_corpus* corpus) { delete corpus; }

size_t civ_corpus_size(const civ_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }

civ_status civ_corpus_count(const civ_corpus* corpus, const char* split, size_t* out) {
  return guard([&] {
    need(out, "out");
    *out = documents(need(corpus, "corpus"), split).size();
  });
}

civ_status civ_corpus_doc_id(const civ_corpus* corpus, size_t index, const char** out) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    need(out, "out");
    require(index < c.corpus.size(), ErrorCode::parameter, "document index out of range");
    *out = c.corpus.documents[index].id.c_str();
  });
}

civ_status civ_corpus_dedupe(civ_corpus* corpus, const char* report_path, size_t* removed) {
  return guard([&] {
    auto& c = need(corpus, "corpus");
    auto result = corpus::dedupe_and_filter(c.corpus);
    if (report_path) corpus::write_removal_report(result.removed, report_path);
    if (removed) *removed = result.removed.size();
    c.corpus = std::move(result.corpus);
  });
}

civ_status civ_corpus_preprocess(civ_corpus* corpus, const char* stopwords_path, const char* lemma_path,
                                 size_t min_chars) {
  return guard([&] {
    auto& c = need(corpus, "corpus");
    corpus::PreprocessConfig config;
    if (stopwords_path) config.stopwords = corpus::load_stopwords(stopwords_path);
    if (lemma_path) config.lemma_lexicon = corpus::load_lemma_lexicon(lemma_path);
    config.min_chars_after_clean = min_chars;
    c.corpus = corpus::preprocess(c.corpus, config);
    c.preprocess = std::move(config);
  });
}

civ_status civ_corpus_split(civ_corpus* corpus, double train_fraction, uint64_t seed) {
  return guard([&] {
    auto& c = need(corpus, "corpus");
    c.corpus = corpus::split(c.corpus, train_fraction, seed);
  });
}

civ_status civ_corpus_save(const civ_corpus* corpus, const char* path) {
  return guard([&] { corpus::save_corpus(need(corpus, "corpus").corpus, need_str(path, "path")); });
}

civ_status civ_embeddings_load(const char* path, civ_embeddings** out) {
  return guard([&] {
    need(out, "out");
    auto e = std::make_unique<civ_embeddings>();
    e->matrix = embeddings::load_embeddings(need_str(path, "path"));
    *out = e.release();
  });
}

civ_status civ_embeddings_create(const char* const* ids, size_t rows, size_t dim, const double* values,
                                 const char* provider_tag, civ_embeddings** out) {
  return guard([&] {
    need(out, "out");
    if (rows > 0) {
      need(ids, "ids");
      need(values, "values");
    }
    auto e = std::make_unique<civ_embeddings>();
    e->matrix.dim = dim;
    e->matrix.provider_tag = provider_tag ? provider_tag : "";
    for (size_t i = 0; i < rows; ++i) e->matrix.doc_ids.emplace_back(need_str(ids[i], "ids[i]"));
    e->matrix.values.assign(values, values + rows * dim);
    embeddings::validate(e->matrix);
    *out = e.release();
  });
}

civ_status civ_embeddings_fetch(const civ_corpus* corpus, const char* options_json, civ_embeddings** out) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    need(out, "out");
    const auto options = embeddings::fetch_options_from_json(need_str(options_json, "options_json"));
    std::vector<std::string> texts, ids;
    for (const auto& d : c.corpus.documents) {
      texts.push_back(d.raw_text);
      ids.push_back(d.id);
    }
    auto e = std::make_unique<civ_embeddings>();
    e->matrix = embeddings::fetch_embeddings(texts, options, ids);
    *out = e.release();
  });
}

void civ_embeddings_free(civ_embeddings* emb) { delete emb; }

size_t civ_embeddings_rows(const civ_embeddings* emb) { return emb ? emb->matrix.rows() : 0; }

size_t civ_embeddings_dim(const civ_embeddings* emb) { return emb ? emb->matrix.dim : 0; }

civ_status civ_embeddings_save(const civ_embeddings* emb, const char* path, int binary) {
  return guard([&] {
    const auto& e = need(emb, "emb");
    if (binary) {
      embeddings::save_binary(e.matrix, need_str(path, "path"));
    } else {
      embeddings::save_text(e.matrix, need_str(path, "path"));
    }
  });
}

civ_status civ_taxonomy_load(const char* path, civ_taxonomy** out) {
  return guard([&] {
    need(out, "out");
    auto t = std::make_unique<civ_taxonomy>();
    t->taxonomy = load_taxonomy(need_str(path, "path"));
    *out = t.release();
  });
}

void civ_taxonomy_free(civ_taxonomy* taxonomy) { delete taxonomy; }

civ_status civ_model_fit(const civ_corpus* corpus, const char* split, const civ_embeddings* emb,
                         const char* config_json, const civ_taxonomy* taxonomy, const civ_embeddings* seed_embeddings,
                         civ_model** out) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    const auto& e = need(emb, "emb");
    need(out, "out");
    const auto config = pipeline::config_from_json(parse_json(need_str(config_json, "config_json"), "config"));
    const auto docs = documents(c, split);
    std::optional<pipeline::Guidance> guidance;
    if (config.mode == pipeline::Mode::semisupervised) {
      require(taxonomy != nullptr, ErrorCode::configuration, "semisupervised mode requires a taxonomy");
      guidance = make_guidance(c, *taxonomy, seed_embeddings, config);
    } else {
      require(taxonomy == nullptr && seed_embeddings == nullptr, ErrorCode::configuration,
              "unsupervised mode does not take a taxonomy or seed embeddings");
    }
    auto m = std::make_unique<civ_model>();
    m->model = pipeline::fit(docs, e.matrix, config, guidance ? &*guidance : nullptr).model;
    *out = m.release();
  });
}

void civ_model_free(civ_model* model) { delete model; }

size_t civ_model_topic_count(const civ_model* model) { return model ? model->model.topic_count() : 0; }

civ_status civ_model_topics_json(const civ_model* model, char** out_json) {
  return guard([&] {
    const auto& m = need(model, "model");
    need(out_json, "out_json");
    *out_json = copy_out(topics_json(m.model).dump());
  });
}

civ_status civ_model_save(const civ_model* model, const char* dir) {
  return guard([&] {
    const auto& m = need(model, "model");
    pipeline::FitResult r;
    r.model = m.model;
    r.assignment.labels = m.model.train_labels;
    r.assignment.probabilities = m.model.train_probabilities;
    r.assignment.k = static_cast<int>(m.model.topic_count());
    pipeline::save_bundle(r, need_str(dir, "dir"));
  });
}

civ_status civ_model_load(const char* dir, civ_model** out) {
  return guard([&] {
    need(out, "out");
    auto m = std::make_unique<civ_model>();
    m->model = pipeline::load_bundle(need_str(dir, "dir"));
    *out = m.release();
  });
}

civ_status civ_model_train_assignment(const civ_model* model, civ_assignment** out) {
  return guard([&] {
    const auto& m = need(model, "model");
    need(out, "out");
    clustering::ClusterAssignment a;
    a.labels = m.model.train_labels;
    a.probabilities = m.model.train_probabilities;
    *out = make_assignment(m.model.train_ids, a);
  });
}

civ_status civ_model_transform(const civ_model* model, const civ_corpus* corpus, const char* split,
                               const civ_embeddings* emb, civ_assignment** out) {
  return guard([&] {
    const auto& m = need(model, "model");
    const auto& c = need(corpus, "corpus");
    const auto& e = need(emb, "emb");
    need(out, "out");
    const auto docs = documents(c, split);
    const auto a = pipeline::transform(m.model, docs, e.matrix);
    *out = make_assignment(ids_of(docs), a);
  });
}

civ_status civ_model_internal_scores(const civ_model* model, const civ_corpus* corpus, const char* split, double* nc,
                                     double* nd, double* ws) {
  return guard([&] {
    const auto& m = need(model, "model");
    const auto& c = need(corpus, "corpus");
    const auto s = metrics::internal_scores(m.model.representations, pipeline::token_lists(documents(c, split)));
    if (nc) *nc = s.nc;
    if (nd) *nd = s.nd;
    if (ws) *ws = s.ws;
  });
}

void civ_assignment_free(civ_assignment* a) { delete a; }

size_t civ_assignment_size(const civ_assignment* a) { return a ? a->labels.size() : 0; }

int civ_assignment_label(const civ_assignment* a, size_t index) {
  return a && index < a->labels.size() ? a->labels[index] : -1;
}

double civ_assignment_probability(const civ_assignment* a, size_t index) {
  return a && index < a->probabilities.size() ? a->probabilities[index] : 0.0;
}

const char* civ_assignment_doc_id(const civ_assignment* a, size_t index) {
  return a && index < a->ids.size() ? a->ids[index].c_str() : nullptr;
}

civ_status civ_assignment_save(const civ_assignment* a, const char* path) {
  return guard([&] {
    const auto& as = need(a, "assignment");
    clustering::ClusterAssignment ca;
    ca.labels = as.labels;
    ca.probabilities = as.probabilities;
    clustering::write_assignment_csv(ca, as.ids, need_str(path, "path"));
  });
}

civ_status civ_assignment_load(const char* path, civ_assignment** out) {
  return guard([&] {
    need(out, "out");
    const auto table = csv::read_table(need_str(path, "path"));
    const auto id = table.required_column("doc_id");
    const auto topic = table.required_column("topic");
    const auto prob = table.required_column("probability");
    auto a = std::make_unique<civ_assignment>();
    for (std::size_t r = 0; r < table.size(); ++r) {
      const std::string where = std::string(path) + " row " + std::to_string(r + 1);
      const auto t = table.field(r, topic);
      const auto p = table.field(r, prob);
      int label = 0;
      double probability = 0.0;
      const auto rt = std::from_chars(t.data(), t.data() + t.size(), label);
      const auto rp = std::from_chars(p.data(), p.data() + p.size(), probability);
      require(rt.ec == std::errc{} && rt.ptr == t.data() + t.size() && label >= -1, ErrorCode::format,
              where + ": bad topic '" + std::string(t) + "'");
      require(rp.ec == std::errc{} && rp.ptr == p.data() + p.size(), ErrorCode::format,
              where + ": bad probability '" + std::string(p) + "'");
      a->ids.emplace_back(table.field(r, id));
      a->labels.push_back(label);
      a->probabilities.push_back(probability);
    }
    *out = a.release();
  });
}

civ_status civ_evaluate_external(const civ_assignment* a, const char* labels_csv, const char* out_dir,
                                 char** out_json) {
  return guard([&] {
    const auto& as = need(a, "assignment");
    const auto labels = llm::read_labels_csv(need_str(labels_csv, "labels_csv"));
    const auto scores = experiments::evaluate_external(as.ids, as.labels, labels);
    if (out_dir) experiments::write_external_report(scores, out_dir);
    if (out_json) *out_json = copy_out(external_json(scores).dump());
  });
}

civ_status civ_score_model(const civ_model* model, const civ_corpus* corpus, const char* split,
                           const civ_embeddings* emb, const char* labels_csv, char** out_json) {
  return guard([&] {
    const auto& m = need(model, "model");
    const auto& c = need(corpus, "corpus");
    const auto& e = need(emb, "emb");
    need(out_json, "out_json");
    const auto docs = documents(c, split);
    const auto internal = metrics::internal_scores(m.model.representations, pipeline::token_lists(docs));
    const auto assignment = pipeline::transform(m.model, docs, e.matrix);
    const auto labels = llm::read_labels_csv(need_str(labels_csv, "labels_csv"));
    const auto external = experiments::evaluate_external(ids_of(docs), assignment.labels, labels);
    json j = {{"nc", internal.nc},         {"nd", internal.nd},         {"ws", internal.ws},
              {"ari_n1", external.n1.ari}, {"nmi_n1", external.n1.nmi}, {"ari_n2", external.n2.ari},
              {"nmi_n2", external.n2.nmi}, {"external", external_json(external)}};
    *out_json = copy_out(j.dump());
  });
}

civ_status civ_write_comparison(const char* unsup_json, const char* semisup_json, const char* out_dir) {
  return guard([&] {
    const auto u = parse_json(need_str(unsup_json, "unsup_json"), "unsup scores");
    const auto s = parse_json(need_str(semisup_json, "semisup_json"), "semisup scores");
    const std::filesystem::path dir = need_str(out_dir, "out_dir");
    io::ensure_directory(dir);
    experiments::write_comparison(experiments::compare_scores(model_scores_from_json(u), model_scores_from_json(s)),
                                  dir / "comparison.csv");
    json scores = {{"unsup", u}, {"semisup", s}};
    io::write_file(dir / "scores.json", scores.dump(2) + "\n");
  });
}

civ_status civ_run_grid(const civ_corpus* corpus, const civ_embeddings* emb, const char* grid_json,
                        const char* base_config_json, const civ_taxonomy* taxonomy,
                        const civ_embeddings* seed_embeddings, const char* out_dir, char** out_json) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    const auto& e = need(emb, "emb");
    const auto grid = experiments::grid_from_json(parse_json(need_str(grid_json, "grid_json"), "grid"));
    const auto base = pipeline::config_from_json(
        base_config_json ? parse_json(base_config_json, "config") : json::object());
    std::optional<pipeline::Guidance> guidance;
    if (base.mode == pipeline::Mode::semisupervised) {
      require(taxonomy != nullptr, ErrorCode::configuration, "semisupervised mode requires a taxonomy");
      guidance = make_guidance(c, *taxonomy, seed_embeddings, base);
    } else {
      require(taxonomy == nullptr && seed_embeddings == nullptr, ErrorCode::configuration,
              "unsupervised mode does not take a taxonomy or seed embeddings");
    }
    experiments::SweepInputs inputs{c.corpus, e.matrix, base, guidance ? &*guidance : nullptr};
    const auto result = experiments::run_grid(inputs, grid);

    experiments::Report report;
    report.records = result.records;
    report.records.insert(report.records.end(), result.failures.begin(), result.failures.end());
    if (out_dir) experiments::emit_report(report, out_dir);
    if (out_json) {
      json top = json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(10, result.summary.size()); ++i) {
        const auto& s = result.summary[i];
        if (s.runs == 0) break;
        top.push_back({{"config_id", s.cell.id}, {"topics", s.k}, {"nc", s.nc}, {"nd", s.nd}, {"ws", s.ws},
                       {"partial", s.partial()}});
      }
      json j = {{"cells", result.cells.size()},
                {"records", result.records.size()},
                {"failures", result.failures.size()},
                {"top", top}};
      *out_json = copy_out(j.dump());
    }
  });
}

civ_status civ_compare_embeddings(const civ_corpus* corpus, const civ_embeddings* const* sets,
                                  const char* const* names, size_t count, const char* spec_json,
                                  const char* base_config_json, const char* out_dir, char** out_json) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    if (count > 0) {
      need(sets, "sets");
      need(names, "names");
    }
    std::vector<experiments::NamedEmbeddings> named;
    for (size_t i = 0; i < count; ++i) named.push_back({need_str(names[i], "names[i]"), need(sets[i], "sets[i]").matrix});

    const auto j = parse_json(need_str(spec_json, "spec_json"), "compare spec");
    experiments::CompareSpec spec;
    try {
      for (const auto& v : j.at("nr_topics_values")) {
        if (v.is_string()) {
          require(v.get<std::string>() == "auto", ErrorCode::schema, "nr_topics values must be integers or \"auto\"");
          spec.nr_topics_values.push_back(std::nullopt);
        } else {
          spec.nr_topics_values.push_back(v.get<int>());
        }
      }
      if (j.contains("repetitions")) spec.repetitions = j.at("repetitions").get<std::size_t>();
      if (j.contains("base_seed")) spec.base_seed = j.at("base_seed").get<std::uint64_t>();
      if (j.contains("train_fraction")) spec.train_fraction = j.at("train_fraction").get<double>();
      if (j.contains("workers")) spec.workers = j.at("workers").get<std::size_t>();
    } catch (const json::exception& e) {
      fail(ErrorCode::schema, std::string("compare spec: ") + e.what());
    }
    const auto base = pipeline::config_from_json(
        base_config_json ? parse_json(base_config_json, "config") : json::object());
    const auto curves = experiments::compare_embedding_models(c.corpus, named, spec, base);

    json out = json::array();
    for (const auto& p : curves) {
      out.push_back({{"model", p.model},
                     {"nr_topics", p.nr_topics ? json(*p.nr_topics) : json("auto")},
                     {"mean_ws", p.mean_ws},
                     {"std_ws", p.std_ws},
                     {"runs", p.runs},
                     {"failures", p.failures}});
    }
    if (out_dir) {
      const std::filesystem::path dir = out_dir;
      io::ensure_directory(dir);
      std::ostringstream buffer;
      csv::Writer writer(buffer);
      writer.write({"model", "nr_topics", "mean_ws", "std_ws", "runs", "failures"});
      for (const auto& p : curves) {
        writer.write({p.model, p.nr_topics ? std::to_string(*p.nr_topics) : "auto",
                      p.runs ? text::format_double(p.mean_ws) : "", p.runs ? text::format_double(p.std_ws) : "",
                      std::to_string(p.runs), std::to_string(p.failures)});
      }
      io::write_file(dir / "curves.csv", buffer.str());
    }
    if (out_json) *out_json = copy_out(out.dump());
  });
}

civ_status civ_label_corpus(const civ_corpus* corpus, const char* split, const civ_taxonomy* taxonomy,
                            const char* llm_json, const char* out_csv, size_t* no_match) {
  return guard([&] {
    const auto& c = need(corpus, "corpus");
    const auto& t = need(taxonomy, "taxonomy");
    const auto config = llm::config_from_json(parse_json(need_str(llm_json, "llm_json"), "llm config"));
    llm::HttpChatBackend backend(config);
    llm::Labeler labeler(t.taxonomy, config, backend);
    const auto results = labeler.label_all(documents(c, split));
    llm::write_labels_csv(results, need_str(out_csv, "out_csv"));
    if (no_match) {
      *no_match = 0;
      for (const auto& r : results) {
        if (r.n1 == llm::kNoMatch || r.n2 == llm::kNoMatch) ++*no_match;
      }
    }
  });
}

civ_status civ_name_topics(const civ_model* model, const char* llm_json, char** out_json) {
  return guard([&] {
    const auto& m = need(model, "model");
    need(out_json, "out_json");
    const auto config = llm::config_from_json(parse_json(need_str(llm_json, "llm_json"), "llm config"));
    llm::HttpChatBackend backend(config);
    auto topic_list = m.model.representations;
    if (std::count(m.model.train_labels.begin(), m.model.train_labels.end(), -1) > 0) {
      topics::TopicRepresentation outliers;
      outliers.topic_id = -1;
      topic_list.insert(topic_list.begin(), outliers);
    }
    const auto names = llm::name_topics(topic_list, config, backend);
    json j = json::object();
    for (const auto& [id, name] : names) j[std::to_string(id)] = name;
    *out_json = copy_out(j.dump());
  });
}

civ_status civ_synth(const char* spec_json, const char* out_dir) {
  return guard([&] {
    synthetic::FixtureSpec spec;
    if (spec_json) {
      const auto j = parse_json(spec_json, "synth spec");
      try {
        if (j.contains("documents")) spec.documents = j.at("documents").get<std::size_t>();
        if (j.contains("categories")) spec.categories = j.at("categories").get<std::size_t>();
        if (j.contains("subcategories")) spec.subcategories = j.at("subcategories").get<std::size_t>();
        if (j.contains("dim")) spec.dim = j.at("dim").get<std::size_t>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("noise")) spec.noise = j.at("noise").get<double>();
      } catch (const json::exception& e) {
        fail(ErrorCode::schema, std::string("synth spec: ") + e.what());
      }
    }
    synthetic::write_fixture(synthetic::make_fixture(spec), need_str(out_dir, "out_dir"));
  });
}

}  // extern "C"
