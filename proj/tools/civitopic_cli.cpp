// civitopic command line front end. Everything goes through the C API.
#include "civitopic/civitopic.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct Failure {
  civ_status status;
};

void check(civ_status status, const std::string& what) {
  if (status == CIV_OK) return;
  std::fprintf(stderr, "civitopic: %s: %s (%s)\n", what.c_str(), civ_last_error(), civ_status_string(status));
  throw Failure{status};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Corpus = std::unique_ptr<civ_corpus, Deleter<civ_corpus, civ_corpus_free>>;
using Embeddings = std::unique_ptr<civ_embeddings, Deleter<civ_embeddings, civ_embeddings_free>>;
using Taxonomy = std::unique_ptr<civ_taxonomy, Deleter<civ_taxonomy, civ_taxonomy_free>>;
using Model = std::unique_ptr<civ_model, Deleter<civ_model, civ_model_free>>;
using Assignment = std::unique_ptr<civ_assignment, Deleter<civ_assignment, civ_assignment_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  civ_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "civitopic: cannot read %s\n", path.c_str());
    throw Failure{CIV_ERR_IO};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_or_fail(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "civitopic: %s: %s\n", what.c_str(), e.what());
    throw Failure{CIV_ERR_FORMAT};
  }
}

Corpus load_corpus(const std::string& path, const std::string& format) {
  civ_corpus* c = nullptr;
  check(civ_corpus_load(path.c_str(), format.c_str(), &c), "loading " + path);
  return Corpus(c);
}

Embeddings load_embeddings(const std::string& path) {
  civ_embeddings* e = nullptr;
  check(civ_embeddings_load(path.c_str(), &e), "loading " + path);
  return Embeddings(e);
}

Taxonomy load_taxonomy(const std::string& path) {
  civ_taxonomy* t = nullptr;
  check(civ_taxonomy_load(path.c_str(), &t), "loading " + path);
  return Taxonomy(t);
}

Model load_model(const std::string& dir) {
  civ_model* m = nullptr;
  check(civ_model_load(dir.c_str(), &m), "loading model " + dir);
  return Model(m);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Shared preprocessing flags; re-running preprocessing is idempotent and
// records the settings used for seed-word normalization.
struct PreprocessFlags {
  std::string stopwords;
  std::string lemmas;
  std::size_t min_chars = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--stopwords", stopwords, "Stopword list, one per line");
    cmd->add_option("--lemmas", lemmas, "Lemma lexicon (form<TAB>lemma)");
    cmd->add_option("--min-chars", min_chars, "Drop documents shorter than this after cleaning");
  }

  void apply(civ_corpus* c, bool always) const {
    if (always || !stopwords.empty() || !lemmas.empty()) {
      check(civ_corpus_preprocess(c, opt(stopwords), opt(lemmas), min_chars), "preprocessing");
    }
  }
};

struct Guidance {
  Taxonomy taxonomy;
  Embeddings seeds;
};

Guidance load_guidance(const std::string& mode, const std::string& taxonomy, const std::string& seeds) {
  Guidance g;
  if (mode == "semi" || mode == "semisupervised") {
    if (taxonomy.empty()) {
      std::fprintf(stderr, "civitopic: semi mode needs --taxonomy\n");
      throw Failure{CIV_ERR_CONFIGURATION};
    }
    g.taxonomy = load_taxonomy(taxonomy);
    if (!seeds.empty()) g.seeds = load_embeddings(seeds);
  }
  // Unsupervised runs never open the taxonomy file.
  return g;
}

std::string config_text(const std::string& path, const std::string& mode) {
  json cfg = path.empty() ? json::object() : parse_or_fail(slurp(path), path);
  if (!mode.empty()) cfg["mode"] = mode;
  return cfg.dump();
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"civitopic: seeded topic modeling and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(civ_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic labeled fixture");
  std::string synth_out;
  std::size_t synth_docs = 1000, synth_cats = 6, synth_dim = 64;
  std::uint64_t synth_seed = 7;
  double synth_noise = 3.0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--documents", synth_docs, "Number of documents");
  synth->add_option("--categories", synth_cats, "Number of N1 categories (1-10)");
  synth->add_option("--dim", synth_dim, "Embedding dimension");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--noise", synth_noise, "Embedding noise norm");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Deduplicate, clean, tokenize and split a corpus");
  std::string prep_corpus, prep_format = "csv", prep_out, prep_removed;
  double prep_fraction = 0.8;
  std::uint64_t prep_seed = 42;
  PreprocessFlags prep_flags;
  prep->add_option("--corpus", prep_corpus, "Input corpus")->required();
  prep->add_option("--format", prep_format, "csv or jsonl");
  prep->add_option("--train-fraction", prep_fraction, "Share of documents in the train split");
  prep->add_option("--seed", prep_seed, "Split seed");
  prep->add_option("--removed", prep_removed, "Write removed ids and reasons here");
  prep->add_option("--out", prep_out, "Processed corpus CSV")->required();
  prep_flags.add(prep);

  // embed
  auto* embed = app.add_subcommand("embed", "Fetch document embeddings from an HTTP endpoint");
  std::string embed_corpus, embed_endpoint, embed_model, embed_cache, embed_out;
  std::size_t embed_batch = 32;
  bool embed_text = false;
  embed->add_option("--corpus", embed_corpus, "Corpus CSV")->required();
  embed->add_option("--endpoint", embed_endpoint, "Embedding endpoint URL")->required();
  embed->add_option("--model", embed_model, "Model name")->required();
  embed->add_option("--batch-size", embed_batch, "Texts per request");
  embed->add_option("--cache-dir", embed_cache, "Vector cache directory");
  embed->add_option("--out", embed_out, "Output file")->required();
  embed->add_flag("--text", embed_text, "Write the text format instead of float32");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a topic model and write the model bundle");
  std::string fit_mode, fit_config, fit_corpus, fit_emb, fit_tax, fit_seeds, fit_split = "train", fit_out;
  PreprocessFlags fit_flags;
  fit->add_option("--mode", fit_mode, "unsup or semi (overrides the config)");
  fit->add_option("--config", fit_config, "Pipeline config JSON");
  fit->add_option("--corpus", fit_corpus, "Processed corpus CSV")->required();
  fit->add_option("--embeddings", fit_emb, "Document embeddings")->required();
  fit->add_option("--taxonomy", fit_tax, "Taxonomy JSON (semi mode)");
  fit->add_option("--seed-embeddings", fit_seeds, "Seed phrase embeddings (semi mode)");
  fit->add_option("--split", fit_split, "train, test or all");
  fit->add_option("--out", fit_out, "Bundle directory")->required();
  fit_flags.add(fit);

  // transform
  auto* tr = app.add_subcommand("transform", "Assign documents to the topics of a fitted model");
  std::string tr_model, tr_corpus, tr_emb, tr_split = "test", tr_out;
  tr->add_option("--model", tr_model, "Bundle directory")->required();
  tr->add_option("--corpus", tr_corpus, "Processed corpus CSV")->required();
  tr->add_option("--embeddings", tr_emb, "Document embeddings")->required();
  tr->add_option("--split", tr_split, "train, test or all");
  tr->add_option("--out", tr_out, "Assignment CSV")->required();

  // grid
  auto* grid = app.add_subcommand("grid", "Run a hyperparameter grid");
  std::string grid_spec, grid_mode = "unsup", grid_config, grid_corpus, grid_emb, grid_tax, grid_seeds, grid_out;
  PreprocessFlags grid_flags;
  grid->add_option("--grid", grid_spec, "Grid spec JSON")->required();
  grid->add_option("--mode", grid_mode, "unsup or semi");
  grid->add_option("--config", grid_config, "Base pipeline config JSON");
  grid->add_option("--corpus", grid_corpus, "Processed corpus CSV")->required();
  grid->add_option("--embeddings", grid_emb, "Document embeddings")->required();
  grid->add_option("--taxonomy", grid_tax, "Taxonomy JSON (semi mode)");
  grid->add_option("--seed-embeddings", grid_seeds, "Seed phrase embeddings (semi mode)");
  grid->add_option("--out", grid_out, "Report directory")->required();
  grid_flags.add(grid);

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare embedding models by weighted score");
  std::string cmp_sets, cmp_corpus, cmp_nr = "10,30,50,70,90,110,130,auto", cmp_config, cmp_out;
  std::size_t cmp_reps = 10;
  std::uint64_t cmp_seed = 0;
  cmp->add_option("--embeddings", cmp_sets, "name=path,name=path,...")->required();
  cmp->add_option("--corpus", cmp_corpus, "Processed corpus CSV")->required();
  cmp->add_option("--nr-topics", cmp_nr, "Comma-separated nr_topics values");
  cmp->add_option("--repetitions", cmp_reps, "Repetitions per value");
  cmp->add_option("--seed", cmp_seed, "Base seed");
  cmp->add_option("--config", cmp_config, "Base pipeline config JSON");
  cmp->add_option("--out", cmp_out, "Report directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Score an assignment against taxonomy labels");
  std::string ev_run, ev_assignment, ev_labels, ev_out;
  ev->add_option("--run", ev_run, "Bundle directory (uses its clusters.csv)");
  ev->add_option("--assignment", ev_assignment, "Assignment CSV (overrides --run)");
  ev->add_option("--labels", ev_labels, "Labels CSV")->required();
  ev->add_option("--out", ev_out, "Report directory")->required();

  // report
  auto* rep = app.add_subcommand("report", "Compare an unsupervised and a semi-supervised model");
  std::string rep_unsup, rep_semi, rep_corpus, rep_emb, rep_labels, rep_split = "test", rep_out;
  rep->add_option("--unsup", rep_unsup, "Unsupervised bundle")->required();
  rep->add_option("--semi", rep_semi, "Semi-supervised bundle")->required();
  rep->add_option("--corpus", rep_corpus, "Processed corpus CSV")->required();
  rep->add_option("--embeddings", rep_emb, "Document embeddings")->required();
  rep->add_option("--labels", rep_labels, "Labels CSV")->required();
  rep->add_option("--split", rep_split, "train, test or all");
  rep->add_option("--out", rep_out, "Report directory")->required();

  // label
  auto* lab = app.add_subcommand("label", "Label documents with an LLM against the taxonomy");
  std::string lab_corpus, lab_split = "test", lab_tax, lab_endpoint, lab_model, lab_api = "prompt", lab_cache, lab_out;
  lab->add_option("--corpus", lab_corpus, "Processed corpus CSV")->required();
  lab->add_option("--split", lab_split, "train, test or all");
  lab->add_option("--taxonomy", lab_tax, "Taxonomy JSON")->required();
  lab->add_option("--endpoint", lab_endpoint, "Chat endpoint URL")->required();
  lab->add_option("--model", lab_model, "Model name")->required();
  lab->add_option("--api", lab_api, "prompt or messages");
  lab->add_option("--cache-dir", lab_cache, "Response cache directory");
  lab->add_option("--out", lab_out, "Labels CSV")->required();

  // name-topics
  auto* nt = app.add_subcommand("name-topics", "Ask an LLM for short topic labels");
  std::string nt_model, nt_endpoint, nt_llm, nt_api = "prompt", nt_out;
  nt->add_option("--model", nt_model, "Bundle directory")->required();
  nt->add_option("--endpoint", nt_endpoint, "Chat endpoint URL")->required();
  nt->add_option("--llm-model", nt_llm, "Model name")->required();
  nt->add_option("--api", nt_api, "prompt or messages");
  nt->add_option("--out", nt_out, "Output JSON (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      json spec = {{"documents", synth_docs}, {"categories", synth_cats}, {"dim", synth_dim}, {"seed", synth_seed},
                   {"noise", synth_noise}};
      check(civ_synth(spec.dump().c_str(), synth_out.c_str()), "synth");
      std::printf("wrote fixture to %s\n", synth_out.c_str());
    } else if (prep->parsed()) {
      auto c = load_corpus(prep_corpus, prep_format);
      std::size_t removed = 0;
      check(civ_corpus_dedupe(c.get(), opt(prep_removed), &removed), "dedupe");
      prep_flags.apply(c.get(), true);
      check(civ_corpus_split(c.get(), prep_fraction, prep_seed), "split");
      check(civ_corpus_save(c.get(), prep_out.c_str()), "saving " + prep_out);
      std::size_t train = 0, test = 0;
      check(civ_corpus_count(c.get(), "train", &train), "count");
      check(civ_corpus_count(c.get(), "test", &test), "count");
      std::printf("documents=%zu removed=%zu train=%zu test=%zu\n", civ_corpus_size(c.get()), removed, train, test);
    } else if (embed->parsed()) {
      auto c = load_corpus(embed_corpus, "csv");
      json options = {{"endpoint", embed_endpoint}, {"model", embed_model}, {"batch_size", embed_batch}};
      if (!embed_cache.empty()) options["cache_dir"] = embed_cache;
      civ_embeddings* e = nullptr;
      check(civ_embeddings_fetch(c.get(), options.dump().c_str(), &e), "fetching embeddings");
      Embeddings emb(e);
      check(civ_embeddings_save(emb.get(), embed_out.c_str(), embed_text ? 0 : 1), "saving " + embed_out);
      std::printf("rows=%zu dim=%zu\n", civ_embeddings_rows(emb.get()), civ_embeddings_dim(emb.get()));
    } else if (fit->parsed()) {
      const std::string cfg = config_text(fit_config, fit_mode);
      const std::string mode = parse_or_fail(cfg, "config").value("mode", std::string("unsupervised"));
      auto c = load_corpus(fit_corpus, "csv");
      fit_flags.apply(c.get(), false);
      auto emb = load_embeddings(fit_emb);
      auto g = load_guidance(mode, fit_tax, fit_seeds);
      civ_model* m = nullptr;
      check(civ_model_fit(c.get(), fit_split.c_str(), emb.get(), cfg.c_str(), g.taxonomy.get(), g.seeds.get(), &m),
            "fit");
      Model model(m);
      check(civ_model_save(model.get(), fit_out.c_str()), "saving bundle");
      double nc = 0, nd = 0, ws = 0;
      const civ_status scored = civ_model_internal_scores(model.get(), c.get(), fit_split.c_str(), &nc, &nd, &ws);
      std::printf("topics=%zu", civ_model_topic_count(model.get()));
      if (scored == CIV_OK) std::printf(" nc=%.5f nd=%.5f ws=%.5f", nc, nd, ws);
      std::printf("\n");
    } else if (tr->parsed()) {
      auto model = load_model(tr_model);
      auto c = load_corpus(tr_corpus, "csv");
      auto emb = load_embeddings(tr_emb);
      civ_assignment* a = nullptr;
      check(civ_model_transform(model.get(), c.get(), tr_split.c_str(), emb.get(), &a), "transform");
      Assignment as(a);
      check(civ_assignment_save(as.get(), tr_out.c_str()), "saving " + tr_out);
      std::printf("assigned=%zu\n", civ_assignment_size(as.get()));
    } else if (grid->parsed()) {
      const std::string spec = slurp(grid_spec);
      const std::string cfg = config_text(grid_config, grid_mode);
      const std::string mode = parse_or_fail(cfg, "config").value("mode", std::string("unsupervised"));
      auto c = load_corpus(grid_corpus, "csv");
      grid_flags.apply(c.get(), false);
      auto emb = load_embeddings(grid_emb);
      auto g = load_guidance(mode, grid_tax, grid_seeds);
      char* out = nullptr;
      check(civ_run_grid(c.get(), emb.get(), spec.c_str(), cfg.c_str(), g.taxonomy.get(), g.seeds.get(),
                         grid_out.c_str(), &out),
            "grid");
      std::printf("%s\n", take(out).c_str());
    } else if (cmp->parsed()) {
      auto c = load_corpus(cmp_corpus, "csv");
      std::vector<std::string> names;
      std::vector<Embeddings> owned;
      for (const auto& item : split_list(cmp_sets, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          std::fprintf(stderr, "civitopic: --embeddings expects name=path, got '%s'\n", item.c_str());
          return CIV_ERR_PARAMETER;
        }
        names.push_back(item.substr(0, eq));
        owned.push_back(load_embeddings(item.substr(eq + 1)));
      }
      std::vector<const char*> name_ptrs;
      std::vector<const civ_embeddings*> set_ptrs;
      for (std::size_t i = 0; i < names.size(); ++i) {
        name_ptrs.push_back(names[i].c_str());
        set_ptrs.push_back(owned[i].get());
      }
      json values = json::array();
      for (const auto& v : split_list(cmp_nr, ',')) {
        if (v == "auto") {
          values.push_back("auto");
        } else {
          values.push_back(std::stoi(v));
        }
      }
      json spec = {{"nr_topics_values", values}, {"repetitions", cmp_reps}, {"base_seed", cmp_seed}};
      const std::string cfg = config_text(cmp_config, "");
      char* out = nullptr;
      check(civ_compare_embeddings(c.get(), set_ptrs.data(), name_ptrs.data(), names.size(), spec.dump().c_str(),
                                   cfg.c_str(), cmp_out.c_str(), &out),
            "compare");
      std::printf("%s\n", take(out).c_str());
    } else if (ev->parsed()) {
      std::string path = ev_assignment;
      if (path.empty()) {
        if (ev_run.empty()) {
          std::fprintf(stderr, "civitopic: eval needs --run or --assignment\n");
          return CIV_ERR_PARAMETER;
        }
        path = ev_run + "/clusters.csv";
      }
      civ_assignment* a = nullptr;
      check(civ_assignment_load(path.c_str(), &a), "loading " + path);
      Assignment as(a);
      char* out = nullptr;
      check(civ_evaluate_external(as.get(), ev_labels.c_str(), ev_out.c_str(), &out), "eval");
      std::printf("%s\n", take(out).c_str());
    } else if (rep->parsed()) {
      auto unsup = load_model(rep_unsup);
      auto semi = load_model(rep_semi);
      auto c = load_corpus(rep_corpus, "csv");
      auto emb = load_embeddings(rep_emb);
      char* u = nullptr;
      char* s = nullptr;
      check(civ_score_model(unsup.get(), c.get(), rep_split.c_str(), emb.get(), rep_labels.c_str(), &u),
            "scoring unsupervised model");
      const std::string u_json = take(u);
      check(civ_score_model(semi.get(), c.get(), rep_split.c_str(), emb.get(), rep_labels.c_str(), &s),
            "scoring semi-supervised model");
      const std::string s_json = take(s);
      check(civ_write_comparison(u_json.c_str(), s_json.c_str(), rep_out.c_str()), "writing comparison");
      std::printf("wrote %s/comparison.csv\n", rep_out.c_str());
    } else if (lab->parsed()) {
      auto c = load_corpus(lab_corpus, "csv");
      auto t = load_taxonomy(lab_tax);
      json config = {{"endpoint", lab_endpoint}, {"model", lab_model}, {"api", lab_api}};
      if (!lab_cache.empty()) config["cache_dir"] = lab_cache;
      std::size_t no_match = 0;
      check(civ_label_corpus(c.get(), lab_split.c_str(), t.get(), config.dump().c_str(), lab_out.c_str(), &no_match),
            "label");
      std::printf("no_match=%zu\n", no_match);
    } else if (nt->parsed()) {
      auto model = load_model(nt_model);
      json config = {{"endpoint", nt_endpoint}, {"model", nt_llm}, {"api", nt_api}};
      char* out = nullptr;
      check(civ_name_topics(model.get(), config.dump().c_str(), &out), "name-topics");
      const std::string names = take(out);
      if (nt_out.empty()) {
        std::printf("%s\n", names.c_str());
      } else {
        std::ofstream(nt_out) << names << "\n";
      }
    }
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "civitopic: %s\n", e.what());
    return CIV_ERR_PARAMETER;
  }
  return 0;
}
