#ifndef CIVITOPIC_H
#define CIVITOPIC_H

/* C interface to the civitopic engine. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every call that
 * can fail returns a civ_status; on failure civ_last_error() describes the
 * problem for the calling thread. Structured inputs and outputs are JSON
 * strings; strings returned through char** must be released with
 * civ_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(CIVITOPIC_BUILDING_LIBRARY)
#define CIV_API __attribute__((visibility("default")))
#else
#define CIV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum civ_status {
  CIV_OK = 0,
  CIV_ERR_PARAMETER = 1,
  CIV_ERR_SCHEMA = 2,
  CIV_ERR_IO = 3,
  CIV_ERR_FORMAT = 4,
  CIV_ERR_DATA = 5,
  CIV_ERR_CONFIGURATION = 6,
  CIV_ERR_TRANSPORT = 7,
  CIV_ERR_PROTOCOL = 8,
  CIV_ERR_EVALUATION = 9,
  CIV_ERR_EMPTY_TOPIC = 10,
  CIV_ERR_UNDEFINED_SIMILARITY = 11,
  CIV_ERR_INTERNAL = 12,
  CIV_ERR_NULL_ARGUMENT = 13
} civ_status;

typedef struct civ_corpus civ_corpus;
typedef struct civ_embeddings civ_embeddings;
typedef struct civ_taxonomy civ_taxonomy;
typedef struct civ_model civ_model;
typedef struct civ_assignment civ_assignment;

CIV_API const char* civ_version(void);
CIV_API const char* civ_status_string(civ_status status);
/* Message of the last failed call on this thread, "" when none. */
CIV_API const char* civ_last_error(void);
CIV_API void civ_string_free(char* s);

/* ---- corpus ---- */

/* format: "csv" or "jsonl" */
CIV_API civ_status civ_corpus_load(const char* path, const char* format, civ_corpus** out);
CIV_API void civ_corpus_free(civ_corpus* corpus);
CIV_API size_t civ_corpus_size(const civ_corpus* corpus);
/* split: "train", "test" or "unassigned" */
CIV_API civ_status civ_corpus_count(const civ_corpus* corpus, const char* split, size_t* out);
CIV_API civ_status civ_corpus_doc_id(const civ_corpus* corpus, size_t index, const char** out);
/* Removes duplicates and empty texts in place; report_path may be NULL. */
CIV_API civ_status civ_corpus_dedupe(civ_corpus* corpus, const char* report_path, size_t* removed);
/* stopwords_path and lemma_path may be NULL. The same settings normalize
 * taxonomy seed words when this corpus is used for a semi-supervised fit. */
CIV_API civ_status civ_corpus_preprocess(civ_corpus* corpus, const char* stopwords_path, const char* lemma_path,
                                         size_t min_chars);
CIV_API civ_status civ_corpus_split(civ_corpus* corpus, double train_fraction, uint64_t seed);
CIV_API civ_status civ_corpus_save(const civ_corpus* corpus, const char* path);

/* ---- embeddings ---- */

CIV_API civ_status civ_embeddings_load(const char* path, civ_embeddings** out);
/* values: rows x dim, row-major. */
CIV_API civ_status civ_embeddings_create(const char* const* ids, size_t rows, size_t dim, const double* values,
                                         const char* provider_tag, civ_embeddings** out);
/* Fetches vectors for every document's raw text. options_json: endpoint,
 * model, batch_size, retries, timeout_seconds, max_in_flight, cache_dir. */
CIV_API civ_status civ_embeddings_fetch(const civ_corpus* corpus, const char* options_json, civ_embeddings** out);
CIV_API void civ_embeddings_free(civ_embeddings* emb);
CIV_API size_t civ_embeddings_rows(const civ_embeddings* emb);
CIV_API size_t civ_embeddings_dim(const civ_embeddings* emb);
/* binary != 0 writes float32 with a JSON sidecar, else the text format. */
CIV_API civ_status civ_embeddings_save(const civ_embeddings* emb, const char* path, int binary);

/* ---- taxonomy ---- */

CIV_API civ_status civ_taxonomy_load(const char* path, civ_taxonomy** out);
CIV_API void civ_taxonomy_free(civ_taxonomy* taxonomy);

/* ---- model ---- */

/* Fits on the documents of `split` ("train", "test", or "all").
 * config_json follows the pipeline config keys. taxonomy and seed_embeddings
 * are only accepted in semisupervised mode (seed_embeddings may be NULL). */
CIV_API civ_status civ_model_fit(const civ_corpus* corpus, const char* split, const civ_embeddings* emb,
                                 const char* config_json, const civ_taxonomy* taxonomy,
                                 const civ_embeddings* seed_embeddings, civ_model** out);
CIV_API void civ_model_free(civ_model* model);
CIV_API size_t civ_model_topic_count(const civ_model* model);
/* [{"topic":0,"size":..,"name":..,"words":[[term,weight],...]},...] */
CIV_API civ_status civ_model_topics_json(const civ_model* model, char** out_json);
CIV_API civ_status civ_model_save(const civ_model* model, const char* dir);
CIV_API civ_status civ_model_load(const char* dir, civ_model** out);
/* Training-set assignment (only for models fitted in this process or loaded
 * from a bundle). */
CIV_API civ_status civ_model_train_assignment(const civ_model* model, civ_assignment** out);
CIV_API civ_status civ_model_transform(const civ_model* model, const civ_corpus* corpus, const char* split,
                                       const civ_embeddings* emb, civ_assignment** out);
/* NC/ND/WS of the model's topics scored against the token lists of `split`. */
CIV_API civ_status civ_model_internal_scores(const civ_model* model, const civ_corpus* corpus, const char* split,
                                             double* nc, double* nd, double* ws);

/* ---- assignments ---- */

CIV_API void civ_assignment_free(civ_assignment* a);
CIV_API size_t civ_assignment_size(const civ_assignment* a);
CIV_API int civ_assignment_label(const civ_assignment* a, size_t index);
CIV_API double civ_assignment_probability(const civ_assignment* a, size_t index);
CIV_API const char* civ_assignment_doc_id(const civ_assignment* a, size_t index);
/* CSV doc_id,topic,probability */
CIV_API civ_status civ_assignment_save(const civ_assignment* a, const char* path);
CIV_API civ_status civ_assignment_load(const char* path, civ_assignment** out);

/* ---- evaluation and experiments ---- */

/* ARI/NMI at both taxonomy levels against a labels CSV. out_dir (nullable)
 * receives contingency tables and external.json. */
CIV_API civ_status civ_evaluate_external(const civ_assignment* a, const char* labels_csv, const char* out_dir,
                                         char** out_json);
/* Internal + external scores of one model on `split`; the JSON is the input
 * format of civ_write_comparison. */
CIV_API civ_status civ_score_model(const civ_model* model, const civ_corpus* corpus, const char* split,
                                   const civ_embeddings* emb, const char* labels_csv, char** out_json);
/* comparison.csv and scores.json from two civ_score_model results. */
CIV_API civ_status civ_write_comparison(const char* unsup_json, const char* semisup_json, const char* out_dir);
/* Grid sweep; writes the report bundle to out_dir and returns a summary. */
CIV_API civ_status civ_run_grid(const civ_corpus* corpus, const civ_embeddings* emb, const char* grid_json,
                                const char* base_config_json, const civ_taxonomy* taxonomy,
                                const civ_embeddings* seed_embeddings, const char* out_dir, char** out_json);
/* spec_json: nr_topics_values, repetitions, base_seed, train_fraction, workers. */
CIV_API civ_status civ_compare_embeddings(const civ_corpus* corpus, const civ_embeddings* const* sets,
                                          const char* const* names, size_t count, const char* spec_json,
                                          const char* base_config_json, const char* out_dir, char** out_json);

/* ---- LLM ---- */

/* Labels the documents of `split` and writes doc_id,n1,n2,raw_response_hash.
 * llm_json: endpoint, model, temperature, context_tokens, truncate_chars,
 * retries, timeout_seconds, api, max_in_flight, cache_dir. */
CIV_API civ_status civ_label_corpus(const civ_corpus* corpus, const char* split, const civ_taxonomy* taxonomy,
                                    const char* llm_json, const char* out_csv, size_t* no_match);
/* {"-1":"Outliers","0":"..."} */
CIV_API civ_status civ_name_topics(const civ_model* model, const char* llm_json, char** out_json);

/* ---- fixtures ---- */

/* Synthetic labeled corpus with embeddings, taxonomy and seed vectors.
 * spec_json keys: documents, categories, subcategories, dim, seed, noise. */
CIV_API civ_status civ_synth(const char* spec_json, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
