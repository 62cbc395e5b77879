#include "civitopic/pipeline.hpp"

#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace civitopic::pipeline {

using nlohmann::json;

std::string_view to_string(Mode mode) {
  return mode == Mode::unsupervised ? "unsupervised" : "semisupervised";
}

Mode parse_mode(std::string_view name) {
  if (name == "unsupervised" || name == "unsup") return Mode::unsupervised;
  if (name == "semisupervised" || name == "semi") return Mode::semisupervised;
  fail(ErrorCode::parameter, "unknown mode '" + std::string(name) + "' (expected unsup or semi)");
}

void validate(const PipelineConfig& config) {
  topics::validate(config.n_gram_range);
  require(config.min_topic_size >= 2, ErrorCode::parameter, "min_topic_size must be >= 2");
  require(config.min_samples <= config.min_topic_size, ErrorCode::parameter,
          "min_samples must not exceed min_topic_size");
  if (config.nr_topics) require(*config.nr_topics >= 2, ErrorCode::parameter, "nr_topics must be >= 2 or auto");
  require(config.target_dim >= 2, ErrorCode::parameter, "target_dim must be >= 2");
  require(config.k_top >= 1, ErrorCode::parameter, "k_top must be >= 1");
  require(config.seed_multiplier > 0.0 && std::isfinite(config.seed_multiplier), ErrorCode::parameter,
          "seed_multiplier must be a positive number");
  require(std::isfinite(config.blend_threshold), ErrorCode::parameter, "blend_threshold must be finite");
}

nlohmann::json to_json(const PipelineConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["n_gram_range"] = {c.n_gram_range.lo, c.n_gram_range.hi};
  if (c.nr_topics) {
    j["nr_topics"] = *c.nr_topics;
  } else {
    j["nr_topics"] = "auto";
  }
  j["min_topic_size"] = c.min_topic_size;
  j["min_samples"] = c.min_samples;
  j["seed"] = c.seed;
  j["seed_multiplier"] = c.seed_multiplier;
  j["blend_threshold"] = c.blend_threshold;
  j["target_dim"] = c.target_dim;
  j["k_top"] = c.k_top;
  j["max_seed_subterms"] = c.max_seed_subterms;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::schema, "pipeline config must be a JSON object");
  static const std::set<std::string> known = {"mode",           "n_gram_range",    "nr_topics",  "min_topic_size",
                                              "min_samples",    "seed",            "seed_multiplier",
                                              "blend_threshold", "target_dim",     "k_top",      "max_seed_subterms"};
  for (const auto& [key, value] : j.items()) {
    require(known.contains(key), ErrorCode::schema, "unknown config field '" + key + "'");
  }
  PipelineConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("n_gram_range")) {
      const auto& r = j.at("n_gram_range");
      require(r.is_array() && r.size() == 2, ErrorCode::schema, "n_gram_range must be a pair");
      c.n_gram_range = {r.at(0).get<int>(), r.at(1).get<int>()};
    }
    if (j.contains("nr_topics")) {
      const auto& n = j.at("nr_topics");
      if (n.is_string()) {
        require(n.get<std::string>() == "auto", ErrorCode::schema, "nr_topics must be an integer or \"auto\"");
        c.nr_topics.reset();
      } else if (n.is_null()) {
        c.nr_topics.reset();
      } else {
        c.nr_topics = n.get<int>();
      }
    }
    if (j.contains("min_topic_size")) c.min_topic_size = j.at("min_topic_size").get<std::size_t>();
    if (j.contains("min_samples")) c.min_samples = j.at("min_samples").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("seed_multiplier")) c.seed_multiplier = j.at("seed_multiplier").get<double>();
    if (j.contains("blend_threshold")) c.blend_threshold = j.at("blend_threshold").get<double>();
    if (j.contains("target_dim")) c.target_dim = j.at("target_dim").get<std::size_t>();
    if (j.contains("k_top")) c.k_top = j.at("k_top").get<std::size_t>();
    if (j.contains("max_seed_subterms")) c.max_seed_subterms = j.at("max_seed_subterms").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("pipeline config: ") + e.what());
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::format, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

clustering::ClusterParams cluster_params(const PipelineConfig& config) {
  clustering::ClusterParams p;
  p.min_cluster_size = config.min_topic_size;
  p.min_samples = config.min_samples;
  return p;
}

std::vector<std::string> ids_of(const std::vector<corpus::Document>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

}  // namespace

std::vector<std::vector<std::string>> token_lists(const std::vector<corpus::Document>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.tokens);
  return out;
}

FitResult fit(const std::vector<corpus::Document>& train, const embeddings::EmbeddingMatrix& embeddings,
              const PipelineConfig& config, const Guidance* guidance) {
  stage("config", [&] {
    validate(config);
    if (config.mode == Mode::semisupervised) {
      require(guidance != nullptr, ErrorCode::configuration, "semisupervised mode requires a taxonomy");
    } else {
      require(guidance == nullptr, ErrorCode::configuration, "unsupervised mode does not take a taxonomy");
    }
    require(!train.empty(), ErrorCode::parameter, "training set is empty");
    return 0;
  });

  const auto ids = ids_of(train);
  FitResult result;
  FittedModel& model = result.model;
  model.config = config;
  model.cluster_params = cluster_params(config);
  model.train_ids = ids;

  auto matrix = stage("embeddings", [&] {
    auto aligned = embeddings::align(embeddings, ids);
    embeddings::validate(aligned);
    return aligned;
  });
  model.provider_tag = matrix.provider_tag;
  model.input_dim = matrix.dim;

  const bool semi = config.mode == Mode::semisupervised;
  if (semi && !guidance->seed_topics.empty()) {
    model.seed_topics = guidance->seed_topics;
    matrix = stage("guidance", [&] { return embeddings::guide_with_seeds(matrix, model.seed_topics, config.blend_threshold); });
  }

  model.reducer = stage("reduction", [&] { return reduction::fit_reducer(matrix, config.target_dim); });
  const auto reduced = stage("reduction", [&] { return reduction::transform(model.reducer, matrix); });
  model.train_points = reduced.values;

  const auto clusters = stage("clustering", [&] {
    return clustering::hdbscan(clustering::Points{model.train_points, config.target_dim}, model.cluster_params);
  });
  model.train_core = clusters.core_distances;

  topics::SeedBoostConfig boost;
  const topics::SeedBoostConfig* boost_ptr = nullptr;
  if (semi) {
    stage("seed words", [&] {
      validate(guidance->taxonomy);
      boost.seed_words = topics::seed_terms(seed_lists(guidance->taxonomy, config.max_seed_subterms),
                                            guidance->preprocess, config.n_gram_range);
      boost.seed_multiplier = config.seed_multiplier;
      return 0;
    });
    boost_ptr = &boost;
  }

  model.vectorizer = stage("vectorize", [&] { return topics::fit_vectorizer(token_lists(train), config.n_gram_range); });
  auto reduced_topics = stage("topic reduction", [&] {
    return topics::reduce_topics(model.vectorizer, clusters.assignment.labels, config.nr_topics, boost_ptr);
  });
  model.weights = std::move(reduced_topics.weights);
  model.merges = std::move(reduced_topics.merges);
  model.train_labels = std::move(reduced_topics.labels);
  model.train_probabilities = clusters.assignment.probabilities;
  model.representations = topics::top_k_words(model.weights, model.vectorizer.vocabulary, config.k_top);

  model.topic_reach.assign(model.topic_count(), 0.0);
  for (std::size_t i = 0; i < model.train_labels.size(); ++i) {
    const int l = model.train_labels[i];
    if (l >= 0) model.topic_reach[l] = std::max(model.topic_reach[l], model.train_core[i]);
  }

  result.assignment.labels = model.train_labels;
  result.assignment.probabilities = model.train_probabilities;
  result.assignment.k = static_cast<int>(model.topic_count());
  return result;
}

clustering::ClusterAssignment transform(const FittedModel& model, const std::vector<corpus::Document>& docs,
                                        const embeddings::EmbeddingMatrix& input) {
  clustering::ClusterAssignment out;
  out.k = static_cast<int>(model.topic_count());
  if (docs.empty()) return out;
  require(input.dim == model.input_dim, ErrorCode::parameter,
          "embedding dimension " + std::to_string(input.dim) + " does not match the fitted model (" +
              std::to_string(model.input_dim) + ")");
  require(input.provider_tag == model.provider_tag, ErrorCode::configuration,
          "embedding provider '" + input.provider_tag + "' does not match the fitted model ('" + model.provider_tag +
              "')");

  auto matrix = embeddings::align(input, ids_of(docs));
  embeddings::validate(matrix);
  if (!model.seed_topics.empty()) {
    matrix = embeddings::guide_with_seeds(matrix, model.seed_topics, model.config.blend_threshold);
  }
  const auto reduced = reduction::transform(model.reducer, matrix);

  const std::size_t dim = model.reducer.target_dim;
  const clustering::Points train{model.train_points, dim};
  const std::size_t n_train = train.rows();
  const std::size_t k = std::min(model.cluster_params.effective_min_samples(), n_train);
  std::vector<double> dist(n_train);
  std::vector<double> scratch;

  out.labels.reserve(docs.size());
  out.probabilities.reserve(docs.size());
  for (std::size_t i = 0; i < reduced.rows(); ++i) {
    const auto x = reduced.row(i);
    for (std::size_t p = 0; p < n_train; ++p) dist[p] = clustering::euclidean(x, train.row(p));
    scratch = dist;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
    const double core_x = scratch[k - 1];

    std::size_t best = 0;
    double best_mr = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n_train; ++p) {
      const double mr = std::max({model.train_core[p], core_x, dist[p]});
      if (mr < best_mr || (mr == best_mr && dist[p] < dist[best])) {
        best_mr = mr;
        best = p;
      }
    }

    const int label = model.train_labels[best];
    if (label < 0 || best_mr > model.topic_reach[label]) {
      out.labels.push_back(-1);
      out.probabilities.push_back(0.0);
      continue;
    }
    const double closeness = best_mr > 0.0 ? std::min(1.0, model.train_core[best] / best_mr) : 1.0;
    out.labels.push_back(label);
    out.probabilities.push_back(model.train_probabilities[best] * closeness);
  }
  return out;
}

namespace {

json seed_topic_json(const embeddings::SeedTopic& s) {
  return {{"label", s.label}, {"seed_words", s.seed_words}, {"embedding", s.seed_embedding}, {"provider_tag", s.provider_tag}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::format, path.string() + ": " + e.what());
  }
}

}  // namespace

void save_bundle(const FitResult& result, const std::filesystem::path& dir) {
  const FittedModel& m = result.model;
  io::ensure_directory(dir);
  const json config = to_json(m.config);

  json cfg = {{"config", config}, {"provider_tag", m.provider_tag}, {"input_dim", m.input_dim}};
  io::write_file(dir / "config.json", dump(cfg));

  json reducer = json::parse(reduction::to_json(m.reducer));
  reducer["config"] = config;
  io::write_file(dir / "reducer.json", dump(reducer));

  json merges = json::array();
  for (const auto& mg : m.merges) merges.push_back({mg.from, mg.into});
  json seeds = json::array();
  for (const auto& s : m.seed_topics) seeds.push_back(seed_topic_json(s));
  json cluster = {{"config", config},
                  {"min_cluster_size", m.cluster_params.min_cluster_size},
                  {"min_samples", m.cluster_params.effective_min_samples()},
                  {"dim", m.reducer.target_dim},
                  {"train_ids", m.train_ids},
                  {"points", m.train_points},
                  {"core_distances", m.train_core},
                  {"labels", m.train_labels},
                  {"probabilities", m.train_probabilities},
                  {"topic_reach", m.topic_reach},
                  {"merges", merges},
                  {"seed_topics", seeds}};
  io::write_file(dir / "cluster_model.json", dump(cluster));

  clustering::write_assignment_csv(result.assignment, m.train_ids, (dir / "clusters.csv").string());

  std::string vocab;
  for (const auto& term : m.vectorizer.vocabulary) vocab += term + "\n";
  io::write_file(dir / "vocabulary.txt", vocab);

  io::write_f32_le(dir / "weights.bin", m.weights.values);
  json weights = {{"config", config},
                  {"topics", m.weights.topics},
                  {"terms", m.weights.terms},
                  {"sizes", m.weights.sizes},
                  {"dtype", "float32-le"}};
  io::write_file(dir / "weights.json", dump(weights));

  const auto outliers =
      static_cast<std::size_t>(std::count(m.train_labels.begin(), m.train_labels.end(), -1));
  topics::write_topic_table(m.representations, outliers, (dir / "topics.csv").string());
}

FittedModel load_bundle(const std::filesystem::path& dir) {
  FittedModel m;
  try {
    const json cfg = read_json(dir / "config.json");
    m.config = config_from_json(cfg.at("config"));
    m.provider_tag = cfg.at("provider_tag").get<std::string>();
    m.input_dim = cfg.at("input_dim").get<std::size_t>();

    json reducer = read_json(dir / "reducer.json");
    reducer.erase("config");
    m.reducer = reduction::from_json(reducer.dump());

    const json cluster = read_json(dir / "cluster_model.json");
    m.cluster_params.min_cluster_size = cluster.at("min_cluster_size").get<std::size_t>();
    m.cluster_params.min_samples = cluster.at("min_samples").get<std::size_t>();
    m.train_ids = cluster.at("train_ids").get<std::vector<std::string>>();
    m.train_points = cluster.at("points").get<std::vector<double>>();
    m.train_core = cluster.at("core_distances").get<std::vector<double>>();
    m.train_labels = cluster.at("labels").get<std::vector<int>>();
    m.train_probabilities = cluster.at("probabilities").get<std::vector<double>>();
    m.topic_reach = cluster.at("topic_reach").get<std::vector<double>>();
    for (const auto& mg : cluster.at("merges")) m.merges.push_back({mg.at(0).get<int>(), mg.at(1).get<int>()});
    for (const auto& s : cluster.at("seed_topics")) {
      m.seed_topics.push_back({s.at("label").get<std::string>(), s.at("seed_words").get<std::vector<std::string>>(),
                               s.at("embedding").get<std::vector<double>>(), s.at("provider_tag").get<std::string>()});
    }
    const std::size_t n = m.train_ids.size();
    require(m.train_points.size() == n * m.reducer.target_dim && m.train_core.size() == n &&
                m.train_labels.size() == n && m.train_probabilities.size() == n,
            ErrorCode::format, "cluster_model.json: inconsistent array lengths");

    auto vocab = io::read_lines(dir / "vocabulary.txt");
    m.vectorizer = topics::make_vectorizer(m.config.n_gram_range, std::move(vocab));

    const json weights = read_json(dir / "weights.json");
    m.weights.topics = weights.at("topics").get<std::size_t>();
    m.weights.terms = weights.at("terms").get<std::size_t>();
    m.weights.sizes = weights.at("sizes").get<std::vector<std::size_t>>();
    m.weights.values = io::read_f32_le(dir / "weights.bin");
    require(m.weights.values.size() == m.weights.topics * m.weights.terms, ErrorCode::format,
            "weights.bin does not match weights.json");
    require(m.weights.terms == m.vectorizer.vocabulary.size(), ErrorCode::format,
            "vocabulary.txt does not match weights.json");
    require(m.topic_reach.size() == m.weights.topics, ErrorCode::format, "topic_reach does not match topic count");
  } catch (const json::exception& e) {
    fail(ErrorCode::format, dir.string() + ": " + e.what());
  }
  m.representations = topics::top_k_words(m.weights, m.vectorizer.vocabulary, m.config.k_top);
  return m;
}

}  // namespace civitopic::pipeline
