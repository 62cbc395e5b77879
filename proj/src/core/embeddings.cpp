#include "civitopic/embeddings.hpp"

#include "civitopic/error.hpp"
#include "civitopic/http.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <future>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace civitopic::embeddings {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "civemb v1";

double parse_number(std::string_view field, std::size_t row) {
  std::string trimmed = text::trim(field);
  double value = 0.0;
  const char* first = trimmed.data();
  if (!trimmed.empty() && trimmed.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, trimmed.data() + trimmed.size(), value);
  if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size() || trimmed.empty()) {
    fail(ErrorCode::format, "row " + std::to_string(row) + ": '" + trimmed + "' is not a number");
  }
  return value;
}

std::vector<double> parse_vector(std::string_view csv_values, std::size_t row) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv_values.size()) {
    auto comma = csv_values.find(',', start);
    if (comma == std::string_view::npos) comma = csv_values.size();
    out.push_back(parse_number(csv_values.substr(start, comma - start), row));
    start = comma + 1;
  }
  return out;
}

std::string format_vector(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += text::format_double(values[i]);
  }
  return out;
}

EmbeddingMatrix load_text(const std::string& content) {
  std::istringstream in(content);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::istringstream hs(header);
  std::string magic_a, magic_b;
  std::size_t n = 0, d = 0;
  hs >> magic_a >> magic_b >> n >> d;
  if (!hs || magic_a + " " + magic_b != kMagic) fail(ErrorCode::format, "malformed civemb header '" + header + "'");
  std::string provider;
  std::getline(hs, provider);
  EmbeddingMatrix m;
  m.provider_tag = text::trim(provider);
  m.dim = d;
  if (d < 2) fail(ErrorCode::format, "embedding dimension must be >= 2");

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorCode::format, "row " + std::to_string(row) + ": missing tab after id");
    auto vec = parse_vector(std::string_view(line).substr(tab + 1), row);
    if (vec.size() != d) {
      fail(ErrorCode::format, "row " + std::to_string(row) + ": expected " + std::to_string(d) + " values, got " +
                                  std::to_string(vec.size()));
    }
    m.doc_ids.push_back(line.substr(0, tab));
    m.values.insert(m.values.end(), vec.begin(), vec.end());
    ++row;
  }
  if (row != n) {
    fail(ErrorCode::format, "header declares " + std::to_string(n) + " rows, file has " + std::to_string(row));
  }
  return m;
}

EmbeddingMatrix load_binary(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  if (!std::filesystem::exists(side)) {
    fail(ErrorCode::format, "'" + path.string() + "' is not a civemb text file and has no sidecar " + side.string());
  }
  json meta;
  try {
    meta = json::parse(io::read_file(side));
  } catch (const json::exception& e) {
    fail(ErrorCode::format, "sidecar " + side.string() + ": " + e.what());
  }
  EmbeddingMatrix m;
  try {
    const auto n = meta.at("n").get<std::size_t>();
    m.dim = meta.at("d").get<std::size_t>();
    m.doc_ids = meta.at("ids").get<std::vector<std::string>>();
    m.provider_tag = meta.value("provider_tag", std::string{});
    if (m.doc_ids.size() != n) fail(ErrorCode::format, "sidecar ids length differs from n");
  } catch (const json::exception& e) {
    fail(ErrorCode::format, "sidecar " + side.string() + ": " + e.what());
  }
  if (m.dim < 2) fail(ErrorCode::format, "embedding dimension must be >= 2");
  m.values = io::read_f32_le(path);
  if (m.values.size() != m.doc_ids.size() * m.dim) {
    fail(ErrorCode::format, "binary block holds " + std::to_string(m.values.size()) + " floats, expected " +
                                std::to_string(m.doc_ids.size() * m.dim));
  }
  return m;
}

}  // namespace

void validate(const EmbeddingMatrix& m) {
  require(m.dim >= 2, ErrorCode::format, "embedding dimension must be >= 2");
  require(m.values.size() == m.rows() * m.dim, ErrorCode::format, "embedding values do not match N x D");
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (!std::isfinite(m.values[i])) {
      fail(ErrorCode::data, "row " + std::to_string(i / m.dim) + ": non-finite embedding value");
    }
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& binary_path) {
  auto side = binary_path;
  side.replace_extension(".json");
  return side;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  if (content.empty()) fail(ErrorCode::format, "embedding file '" + path.string() + "' is empty");
  EmbeddingMatrix m = content.starts_with(kMagic) ? load_text(content) : load_binary(path);
  if (m.rows() == 0) fail(ErrorCode::format, "embedding file '" + path.string() + "' has no rows");
  validate(m);
  return m;
}

void save_text(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  validate(m);
  std::string out = std::string(kMagic) + " " + std::to_string(m.rows()) + " " + std::to_string(m.dim) + " " +
                    m.provider_tag + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += m.doc_ids[i];
    out.push_back('\t');
    out += format_vector(m.row(i));
    out.push_back('\n');
  }
  io::write_file(path, out);
}

void save_binary(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  validate(m);
  io::write_f32_le(path, m.values);
  json meta = {{"n", m.rows()}, {"d", m.dim}, {"ids", m.doc_ids}, {"provider_tag", m.provider_tag}};
  io::write_file(sidecar_path(path), meta.dump(1) + "\n");
}

EmbeddingMatrix align(const EmbeddingMatrix& m, std::span<const std::string> ids) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < m.rows(); ++i) index.emplace(m.doc_ids[i], i);
  EmbeddingMatrix out;
  out.provider_tag = m.provider_tag;
  out.dim = m.dim;
  out.values.reserve(ids.size() * m.dim);
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) fail(ErrorCode::configuration, "no embedding for document '" + id + "'");
    out.doc_ids.push_back(id);
    auto r = m.row(it->second);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::parameter, "cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::undefined_similarity, "cosine similarity of a zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

SeedTopic make_seed_topic(const std::string& label, const std::vector<std::string>& seed_words,
                          const EmbeddingMatrix& phrase_embeddings) {
  require(!seed_words.empty(), ErrorCode::parameter, "seed topic '" + label + "' has no seed words");
  const EmbeddingMatrix rows = align(phrase_embeddings, seed_words);
  std::vector<double> mean(rows.dim, 0.0);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    for (std::size_t j = 0; j < rows.dim; ++j) mean[j] += r[j];
  }
  double norm = 0.0;
  for (double& v : mean) {
    v /= static_cast<double>(rows.rows());
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) fail(ErrorCode::undefined_similarity, "seed topic '" + label + "' has a zero mean embedding");
  for (double& v : mean) v /= norm;
  return {label, seed_words, std::move(mean), phrase_embeddings.provider_tag};
}

std::vector<SeedTopic> make_seed_topics(const std::vector<SeedList>& lists, const EmbeddingMatrix& phrase_embeddings) {
  std::vector<SeedTopic> out;
  for (const auto& list : lists) out.push_back(make_seed_topic(list.label, list.phrases, phrase_embeddings));
  return out;
}

EmbeddingMatrix guide_with_seeds(const EmbeddingMatrix& matrix, const std::vector<SeedTopic>& seeds,
                                 double blend_threshold) {
  for (const auto& seed : seeds) {
    if (seed.provider_tag != matrix.provider_tag) {
      fail(ErrorCode::configuration, "seed topic '" + seed.label + "' comes from provider '" + seed.provider_tag +
                                         "', documents from '" + matrix.provider_tag + "'");
    }
    require(seed.seed_embedding.size() == matrix.dim, ErrorCode::configuration,
            "seed topic '" + seed.label + "' has the wrong dimension");
  }
  EmbeddingMatrix out = matrix;
  if (seeds.empty()) return out;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto doc = out.row(i);
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const double sim = cosine_similarity(doc, seeds[s].seed_embedding);
      if (sim > best_sim) {
        best_sim = sim;
        best = s;
      }
    }
    if (best_sim >= blend_threshold) {
      const auto& seed = seeds[best].seed_embedding;
      for (std::size_t j = 0; j < out.dim; ++j) doc[j] = 0.5 * (doc[j] + seed[j]);
    }
  }
  return out;
}

namespace {

std::string cache_key(const std::string& model, const std::string& content) {
  std::string material = model;
  material.push_back('\0');
  material += content;
  return text::sha256_hex(material);
}

}  // namespace

EmbeddingMatrix fetch_embeddings(const std::vector<std::string>& texts, const FetchOptions& options,
                                 const std::vector<std::string>& ids, FetchStats* stats) {
  require(options.batch_size >= 1, ErrorCode::parameter, "batch_size must be >= 1");
  require(ids.empty() || ids.size() == texts.size(), ErrorCode::parameter, "ids and texts differ in length");
  require(!texts.empty(), ErrorCode::parameter, "no texts to embed");

  std::vector<std::vector<double>> vectors(texts.size());
  std::vector<std::size_t> pending;
  FetchStats local;
  if (options.cache_dir) io::ensure_directory(*options.cache_dir);

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (options.cache_dir) {
      const auto file = *options.cache_dir / (cache_key(options.model_name, texts[i]) + ".vec");
      if (std::filesystem::exists(file)) {
        vectors[i] = parse_vector(text::trim(io::read_file(file)), i);
        ++local.cache_hits;
        continue;
      }
    }
    pending.push_back(i);
  }

  http::PostOptions post;
  post.retries = options.retries;
  post.timeout_seconds = options.timeout_seconds;
  if (const char* key = std::getenv("CIVITOPIC_EMBED_API_KEY"); key && *key) {
    post.headers["Authorization"] = std::string("Bearer ") + key;
  }

  std::mutex cache_mutex;
  auto run_batch = [&](std::size_t begin, std::size_t end) {
    json input = json::array();
    for (std::size_t k = begin; k < end; ++k) input.push_back(texts[pending[k]]);
    const json reply = http::post_json(options.endpoint, {{"model", options.model_name}, {"input", input}}, post);
    if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array()) {
      fail(ErrorCode::protocol, "embedding response lacks a 'vectors' array");
    }
    const auto& got = reply["vectors"];
    if (got.size() != end - begin) {
      fail(ErrorCode::protocol, "embedding response holds " + std::to_string(got.size()) + " vectors for " +
                                    std::to_string(end - begin) + " texts");
    }
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = pending[k];
      try {
        vectors[i] = got[k - begin].get<std::vector<double>>();
      } catch (const json::exception&) {
        fail(ErrorCode::protocol, "embedding response vector " + std::to_string(k - begin) + " is not numeric");
      }
      if (options.cache_dir) {
        std::lock_guard lock(cache_mutex);
        io::write_file(*options.cache_dir / (cache_key(options.model_name, texts[i]) + ".vec"),
                       format_vector(vectors[i]) + "\n");
      }
    }
  };

  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < pending.size(); b += options.batch_size) {
    batches.emplace_back(b, std::min(pending.size(), b + options.batch_size));
  }
  local.requests = batches.size();
  const std::size_t window = std::max<std::size_t>(1, options.max_in_flight);
  for (std::size_t start = 0; start < batches.size(); start += window) {
    std::vector<std::future<void>> inflight;
    for (std::size_t b = start; b < std::min(batches.size(), start + window); ++b) {
      inflight.push_back(std::async(std::launch::async, run_batch, batches[b].first, batches[b].second));
    }
    for (auto& f : inflight) f.get();
  }

  EmbeddingMatrix m;
  m.provider_tag = options.model_name;
  m.dim = vectors.front().size();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (vectors[i].size() != m.dim) fail(ErrorCode::protocol, "embedding vectors differ in dimension");
    m.doc_ids.push_back(ids.empty() ? std::to_string(i) : ids[i]);
    m.values.insert(m.values.end(), vectors[i].begin(), vectors[i].end());
  }
  validate(m);
  if (stats) *stats = local;
  return m;
}

FetchOptions fetch_options_from_json(std::string_view json_text) {
  FetchOptions o;
  try {
    const json j = json::parse(json_text);
    require(j.is_object(), ErrorCode::schema, "fetch options must be a JSON object");
    if (j.contains("endpoint")) o.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) o.model_name = j.at("model").get<std::string>();
    if (j.contains("batch_size")) o.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("retries")) o.retries = j.at("retries").get<int>();
    if (j.contains("timeout_seconds")) o.timeout_seconds = j.at("timeout_seconds").get<double>();
    if (j.contains("max_in_flight")) o.max_in_flight = j.at("max_in_flight").get<std::size_t>();
    if (j.contains("cache_dir")) o.cache_dir = j.at("cache_dir").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("fetch options: ") + e.what());
  }
  require(!o.endpoint.empty(), ErrorCode::configuration, "fetch options need an endpoint");
  require(!o.model_name.empty(), ErrorCode::configuration, "fetch options need a model");
  require(o.batch_size >= 1, ErrorCode::parameter, "batch_size must be >= 1");
  return o;
}

}  // namespace civitopic::embeddings
