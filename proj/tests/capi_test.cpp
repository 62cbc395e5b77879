// Exercises the shared library through civitopic.h only.

#include "civitopic/civitopic.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace {

int failures = 0;

void check(bool ok, const char* what) {
  if (!ok) {
    ++failures;
    std::printf("FAILED: %s (last error: %s)\n", what, civ_last_error());
  }
}

#define EXPECT_OK(call) check((call) == CIV_OK, #call)

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const auto root = std::filesystem::temp_directory_path() / ("civitopic_capi_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  const std::string fx = (root / "fx").string();

  check(std::strlen(civ_version()) > 0, "version string");
  check(std::strcmp(civ_status_string(CIV_ERR_SCHEMA), "") != 0, "status string");

  // Argument checks.
  check(civ_corpus_load(nullptr, "csv", nullptr) == CIV_ERR_NULL_ARGUMENT, "null arguments are rejected");
  civ_corpus* missing = nullptr;
  check(civ_corpus_load("/nonexistent/c.csv", "csv", &missing) == CIV_ERR_IO, "missing file is an io error");
  check(missing == nullptr, "no handle on failure");
  check(std::strlen(civ_last_error()) > 0, "error message is kept");

  EXPECT_OK(civ_synth(R"({"documents":300,"categories":4,"noise":1.0,"seed":3})", fx.c_str()));

  civ_corpus* corpus = nullptr;
  EXPECT_OK(civ_corpus_load((fx + "/corpus.csv").c_str(), "csv", &corpus));
  check(civ_corpus_size(corpus) == 300, "corpus size");
  size_t removed = 99;
  EXPECT_OK(civ_corpus_dedupe(corpus, nullptr, &removed));
  EXPECT_OK(civ_corpus_preprocess(corpus, (fx + "/stopwords.txt").c_str(), nullptr, 1));
  EXPECT_OK(civ_corpus_split(corpus, 0.8, 42));
  size_t n_train = 0, n_test = 0;
  EXPECT_OK(civ_corpus_count(corpus, "train", &n_train));
  EXPECT_OK(civ_corpus_count(corpus, "test", &n_test));
  check(n_train + n_test == civ_corpus_size(corpus), "split covers the corpus");
  size_t unused = 0;
  check(civ_corpus_count(corpus, "validation", &unused) == CIV_ERR_PARAMETER, "unknown split name");

  civ_embeddings* emb = nullptr;
  civ_embeddings* seeds = nullptr;
  civ_taxonomy* tax = nullptr;
  EXPECT_OK(civ_embeddings_load((fx + "/embeddings.bin").c_str(), &emb));
  EXPECT_OK(civ_embeddings_load((fx + "/seed_embeddings.txt").c_str(), &seeds));
  EXPECT_OK(civ_taxonomy_load((fx + "/taxonomy.json").c_str(), &tax));
  check(civ_embeddings_dim(emb) == 64, "embedding dim");

  civ_model* unsup = nullptr;
  civ_model* semi = nullptr;
  EXPECT_OK(civ_model_fit(corpus, "train", emb, R"({"min_topic_size":10})", nullptr, nullptr, &unsup));
  EXPECT_OK(civ_model_fit(corpus, "train", emb, R"({"mode":"semisupervised","min_topic_size":10})", tax, seeds,
                          &semi));
  check(civ_model_topic_count(unsup) > 0, "topics found");
  civ_model* bad = nullptr;
  check(civ_model_fit(corpus, "train", emb, R"({"mode":"semisupervised"})", nullptr, nullptr, &bad) ==
            CIV_ERR_CONFIGURATION,
        "semi mode needs a taxonomy");
  check(civ_model_fit(corpus, "train", emb, R"({"bogus":1})", nullptr, nullptr, &bad) == CIV_ERR_SCHEMA,
        "unknown config key");
  check(bad == nullptr, "no model on failure");

  char* topics = nullptr;
  EXPECT_OK(civ_model_topics_json(unsup, &topics));
  check(topics && std::strstr(topics, "\"words\"") != nullptr, "topics json");
  civ_string_free(topics);

  // Save, reload, transform.
  const std::string bundle = (root / "model").string();
  EXPECT_OK(civ_model_save(semi, bundle.c_str()));
  civ_model* loaded = nullptr;
  EXPECT_OK(civ_model_load(bundle.c_str(), &loaded));
  check(civ_model_topic_count(loaded) == civ_model_topic_count(semi), "reloaded topic count");

  civ_assignment* a1 = nullptr;
  civ_assignment* a2 = nullptr;
  EXPECT_OK(civ_model_transform(semi, corpus, "test", emb, &a1));
  EXPECT_OK(civ_model_transform(loaded, corpus, "test", emb, &a2));
  check(civ_assignment_size(a1) == n_test, "test assignment size");
  bool same = civ_assignment_size(a1) == civ_assignment_size(a2);
  for (size_t i = 0; same && i < civ_assignment_size(a1); ++i) {
    same = civ_assignment_label(a1, i) == civ_assignment_label(a2, i) &&
           std::strcmp(civ_assignment_doc_id(a1, i), civ_assignment_doc_id(a2, i)) == 0;
  }
  check(same, "reloaded model assigns identically");

  const std::string assign_path = (root / "assign.csv").string();
  EXPECT_OK(civ_assignment_save(a1, assign_path.c_str()));
  civ_assignment* a3 = nullptr;
  EXPECT_OK(civ_assignment_load(assign_path.c_str(), &a3));
  check(civ_assignment_size(a3) == civ_assignment_size(a1), "assignment round trip");

  char* ext = nullptr;
  EXPECT_OK(civ_evaluate_external(a1, (fx + "/labels.csv").c_str(), (root / "ext").string().c_str(), &ext));
  check(ext && std::strstr(ext, "\"n1\"") != nullptr, "external scores json");
  civ_string_free(ext);
  check(std::filesystem::exists(root / "ext" / "contingency_n1_counts.csv"), "contingency table written");

  double nc = -1, nd = -1, ws = -1;
  EXPECT_OK(civ_model_internal_scores(unsup, corpus, "train", &nc, &nd, &ws));
  check(nc >= 0 && nc <= 1 && nd > 0 && nd <= 1, "internal scores in range");
  check(ws > 0.8 * nc + 0.2 * nd - 1e-12 && ws < 0.8 * nc + 0.2 * nd + 1e-12, "weighted score");

  char* su = nullptr;
  char* ss = nullptr;
  EXPECT_OK(civ_score_model(unsup, corpus, "test", emb, (fx + "/labels.csv").c_str(), &su));
  EXPECT_OK(civ_score_model(semi, corpus, "test", emb, (fx + "/labels.csv").c_str(), &ss));
  EXPECT_OK(civ_write_comparison(su, ss, (root / "cmp").string().c_str()));
  civ_string_free(su);
  civ_string_free(ss);
  const std::string cmp = slurp(root / "cmp" / "comparison.csv");
  check(cmp.find("ARI (N1)") != std::string::npos, "comparison.csv rows");

  char* grid_summary = nullptr;
  EXPECT_OK(civ_run_grid(corpus, emb,
                         R"({"n_gram_ranges":[[1,1]],"nr_topics_values":["auto",3],"min_topic_sizes":[10],)"
                         R"("repetitions":2,"workers":2})",
                         nullptr, nullptr, nullptr, (root / "grid").string().c_str(), &grid_summary));
  civ_string_free(grid_summary);
  check(std::filesystem::exists(root / "grid" / "top10.csv"), "grid report written");

  civ_assignment_free(a1);
  civ_assignment_free(a2);
  civ_assignment_free(a3);
  civ_model_free(unsup);
  civ_model_free(semi);
  civ_model_free(loaded);
  civ_taxonomy_free(tax);
  civ_embeddings_free(emb);
  civ_embeddings_free(seeds);
  civ_corpus_free(corpus);
  civ_model_free(nullptr);
  std::filesystem::remove_all(root);

  std::printf("%s: %d failure(s)\n", failures == 0 ? "ok" : "FAILED", failures);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
