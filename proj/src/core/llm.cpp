#include "civitopic/llm.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/http.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <set>
#include <sstream>

namespace civitopic::llm {

using nlohmann::json;

LlmConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::schema, "llm config must be a JSON object");
  LlmConfig c;
  try {
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) c.model_name = j.at("model").get<std::string>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("context_tokens")) c.context_tokens = j.at("context_tokens").get<int>();
    if (j.contains("truncate_chars")) c.truncate_chars = j.at("truncate_chars").get<std::size_t>();
    if (j.contains("retries")) c.retries = j.at("retries").get<int>();
    if (j.contains("timeout_seconds")) c.timeout_seconds = j.at("timeout_seconds").get<double>();
    if (j.contains("max_in_flight")) c.max_in_flight = j.at("max_in_flight").get<std::size_t>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("api")) {
      const auto api = j.at("api").get<std::string>();
      require(api == "prompt" || api == "messages", ErrorCode::schema, "api must be \"prompt\" or \"messages\"");
      c.api = api == "prompt" ? ChatApi::prompt : ChatApi::messages;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("llm config: ") + e.what());
  }
  require(!c.endpoint.empty(), ErrorCode::configuration, "llm config needs an endpoint");
  require(!c.model_name.empty(), ErrorCode::configuration, "llm config needs a model");
  require(c.truncate_chars > 0, ErrorCode::parameter, "truncate_chars must be positive");
  return c;
}

nlohmann::json request_body(const ChatRequest& request, ChatApi api) {
  json body = {{"model", request.model},
               {"temperature", request.temperature},
               {"options", {{"context_tokens", request.context_tokens}}}};
  if (api == ChatApi::prompt) {
    body["prompt"] = request.prompt;
  } else {
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  }
  return body;
}

std::string reply_text(const nlohmann::json& reply, ChatApi api) {
  try {
    if (api == ChatApi::prompt) return reply.at("response").get<std::string>();
    if (reply.contains("message")) return reply.at("message").at("content").get<std::string>();
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::protocol, std::string("unexpected chat reply shape: ") + e.what());
  }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  http::PostOptions post;
  post.retries = config_.retries;
  post.timeout_seconds = config_.timeout_seconds;
  if (const char* key = std::getenv("CIVITOPIC_LLM_API_KEY"); key && *key) {
    post.headers["Authorization"] = std::string("Bearer ") + key;
  }
  return reply_text(http::post_json(config_.endpoint, request_body(request, config_.api), post), config_.api);
}

namespace {

constexpr std::string_view kSeparator = " | ";

std::string escape_document(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '|' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string join_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += kSeparator;
    out += options[i];
  }
  return out;
}

std::string strip_decoration(std::string_view side) {
  static constexpr std::string_view kDecor = " \t\r\n\"'`*<>[]().:;";
  const auto b = side.find_first_not_of(kDecor);
  if (b == std::string_view::npos) return {};
  const auto e = side.find_last_not_of(kDecor);
  return text::trim(side.substr(b, e - b + 1));
}

bool is_word_char(char c) { return static_cast<unsigned char>(c) >= 0x80 || std::isalnum(static_cast<unsigned char>(c)); }

bool contains_word_span(const std::string& haystack, const std::string& needle) {
  std::size_t pos = haystack.find(needle);
  while (pos != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    pos = haystack.find(needle, pos + 1);
  }
  return false;
}

std::string match_side(std::string_view side, const std::vector<std::string>& options) {
  const std::string candidate = strip_decoration(side);
  if (candidate.empty()) return std::string(kNoMatch);
  for (const auto& option : options) {
    if (option == candidate) return option;
  }
  const std::string folded = text::fold(candidate);
  for (const auto& option : options) {
    if (text::fold(option) == folded) return option;
  }
  // Prose around the term: accept one unambiguous option mention. Options
  // nested in a longer matched option ("X" inside "X Urbano") are dropped.
  const std::string haystack = text::fold(side);
  std::vector<std::string> hits;
  for (const auto& option : options) {
    if (contains_word_span(haystack, text::fold(option))) hits.push_back(option);
  }
  std::vector<std::string> maximal;
  for (const auto& h : hits) {
    const std::string fh = text::fold(h);
    const bool nested = std::any_of(hits.begin(), hits.end(), [&](const std::string& other) {
      return other != h && text::fold(other).find(fh) != std::string::npos;
    });
    if (!nested) maximal.push_back(h);
  }
  if (maximal.size() == 1) return maximal.front();
  return std::string(kNoMatch);
}

std::string cache_key(const std::string& model, std::string_view content) {
  std::string material = model;
  material.push_back('\0');
  material.append(content);
  return text::sha256_hex(material);
}

}  // namespace

std::string build_label_prompt(std::string_view text_in, const Taxonomy& taxonomy, const LlmConfig& config) {
  const std::string doc = escape_document(text::truncate_at_whitespace(text_in, config.truncate_chars));
  std::string prompt;
  prompt += "Escolha a categoria do texto abaixo na taxonomia controlada: ";
  prompt += "uma opção do nível 1 e uma opção do nível 2, copiadas sem alteração.\n\n";
  prompt += "NÍVEL 1: " + join_options(taxonomy.n1_options()) + "\n";
  prompt += "NÍVEL 2: " + join_options(taxonomy.n2_options()) + "\n\n";
  prompt += "TEXTO: " + doc + "\n\n";
  prompt += "Formato da resposta, numa única linha: <nível 1>, <nível 2>";
  return prompt;
}

ParsedLabel parse_label_response(std::string_view response, const Taxonomy& taxonomy) {
  const std::string trimmed = text::trim(response);
  if (trimmed.empty()) return {std::string(kNoMatch), std::string(kNoMatch)};
  const auto n1_options = taxonomy.n1_options();
  const auto n2_options = taxonomy.n2_options();
  const auto comma = trimmed.find(',');
  if (comma == std::string::npos) {
    return {match_side(trimmed, n1_options), match_side(trimmed, n2_options)};
  }
  const std::string_view whole(trimmed);
  return {match_side(whole.substr(0, comma), n1_options), match_side(whole.substr(comma + 1), n2_options)};
}

Labeler::Labeler(Taxonomy taxonomy, LlmConfig config, ChatBackend& backend)
    : taxonomy_(std::move(taxonomy)), config_(std::move(config)), backend_(backend) {
  validate(taxonomy_);
  if (config_.cache_dir) io::ensure_directory(*config_.cache_dir);
}

std::optional<std::string> Labeler::cached(const std::string& key) {
  std::lock_guard lock(cache_mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (config_.cache_dir) {
    const auto file = *config_.cache_dir / (key + ".txt");
    if (std::filesystem::exists(file)) {
      auto response = io::read_file(file);
      cache_.emplace(key, response);
      return response;
    }
  }
  return std::nullopt;
}

void Labeler::store(const std::string& key, const std::string& response) {
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(key, response);
  if (config_.cache_dir) io::write_file(*config_.cache_dir / (key + ".txt"), response);
}

LabelResult Labeler::label(const corpus::Document& doc) {
  require(!doc.raw_text.empty(), ErrorCode::parameter, "document '" + doc.id + "' has no text to label");
  const std::string key = cache_key(config_.model_name, doc.raw_text);
  std::string response;
  if (auto hit = cached(key)) {
    response = std::move(*hit);
  } else {
    ChatRequest request{config_.model_name, build_label_prompt(doc.raw_text, taxonomy_, config_), config_.temperature,
                        config_.context_tokens};
    ++calls_;
    try {
      response = backend_.complete(request);
    } catch (const Error& e) {
      throw Error(e.code(), "document '" + doc.id + "': " + e.what());
    }
    store(key, response);
  }
  auto parsed = parse_label_response(response, taxonomy_);
  return {doc.id, std::move(parsed.n1), std::move(parsed.n2), std::move(response)};
}

std::vector<LabelResult> Labeler::label_all(const std::vector<corpus::Document>& docs) {
  std::vector<LabelResult> out(docs.size());
  // First occurrence of each text goes out; repeats are served from the cache.
  std::vector<std::size_t> first, repeats;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    (seen.insert(docs[i].raw_text).second ? first : repeats).push_back(i);
  }
  const std::size_t window = std::max<std::size_t>(1, config_.max_in_flight);
  for (std::size_t start = 0; start < first.size(); start += window) {
    std::vector<std::future<void>> inflight;
    for (std::size_t k = start; k < std::min(first.size(), start + window); ++k) {
      const std::size_t i = first[k];
      inflight.push_back(std::async(std::launch::async, [&, i] { out[i] = label(docs[i]); }));
    }
    for (auto& f : inflight) f.get();
  }
  for (std::size_t i : repeats) out[i] = label(docs[i]);
  return out;
}

LabelResult label_document(const corpus::Document& doc, const Taxonomy& taxonomy, const LlmConfig& config,
                           ChatBackend& backend) {
  Labeler labeler(taxonomy, config, backend);
  return labeler.label(doc);
}

void write_labels_csv(const std::vector<LabelResult>& labels, const std::string& path) {
  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"doc_id", "n1", "n2", "raw_response_hash"});
  for (const auto& l : labels) writer.write({l.doc_id, l.n1, l.n2, text::sha256_hex(l.raw_response)});
  io::write_file(path, out.str());
}

std::vector<LabelResult> read_labels_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  const std::size_t id = table.required_column("doc_id");
  const std::size_t n1 = table.required_column("n1");
  const std::size_t n2 = table.required_column("n2");
  std::vector<LabelResult> out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    out.push_back({std::string(table.field(r, id)), std::string(table.field(r, n1)), std::string(table.field(r, n2)), {}});
  }
  return out;
}

std::string build_naming_prompt(const std::vector<topics::TopicRepresentation>& topic_list) {
  std::string prompt =
      "Nomeie cada tópico a partir das suas palavras-chave, usando no máximo três palavras por nome.\n"
      "Saída: somente um objeto JSON no formato {\"<id>\": \"<nome>\"}.\n\n";
  for (const auto& t : topic_list) {
    std::vector<std::string> words;
    for (const auto& w : t.top_words) words.push_back(w.term);
    prompt += "Tópico " + std::to_string(t.topic_id) + ": " + text::join(words, ", ") + "\n";
  }
  return prompt;
}

namespace {

std::map<int, std::string> parse_naming_reply(const std::string& reply) {
  std::map<int, std::string> out;
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return out;
  json obj;
  try {
    obj = json::parse(reply.substr(open, close - open + 1));
  } catch (const json::exception&) {
    return out;
  }
  if (!obj.is_object()) return out;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_string()) continue;
    try {
      std::size_t used = 0;
      const int id = std::stoi(key, &used);
      if (used != key.size()) continue;
      out[id] = text::trim(value.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  return out;
}

bool acceptable_label(const std::string& label) {
  const auto words = text::split_whitespace(label);
  return !words.empty() && words.size() <= 3;
}

}  // namespace

std::map<int, std::string> name_topics(const std::vector<topics::TopicRepresentation>& topic_list,
                                       const LlmConfig& config, ChatBackend& backend) {
  std::map<int, std::string> names;
  std::vector<topics::TopicRepresentation> pending;
  for (const auto& t : topic_list) {
    if (t.topic_id == -1) {
      names[-1] = std::string(kOutliers);
    } else {
      pending.push_back(t);
    }
  }
  for (int attempt = 0; attempt < 2 && !pending.empty(); ++attempt) {
    ChatRequest request{config.model_name, build_naming_prompt(pending), config.temperature, config.context_tokens};
    const auto reply = parse_naming_reply(backend.complete(request));
    std::vector<topics::TopicRepresentation> still;
    for (const auto& t : pending) {
      auto it = reply.find(t.topic_id);
      if (it != reply.end() && acceptable_label(it->second)) {
        names[t.topic_id] = it->second;
      } else {
        still.push_back(t);
      }
    }
    pending = std::move(still);
  }
  for (const auto& t : pending) names[t.topic_id] = t.name;
  return names;
}

}  // namespace civitopic::llm
