#pragma once

#include "civitopic/corpus.hpp"
#include "civitopic/taxonomy.hpp"
#include "civitopic/topics.hpp"

#include "json.hpp"

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace civitopic::llm {

inline constexpr std::string_view kNoMatch = "no_match";
inline constexpr std::string_view kOutliers = "Outliers";

enum class ChatApi {
  prompt,    // {model, prompt, temperature, options} -> {response}
  messages,  // {model, messages:[...], temperature, options} -> {message:{content}} or {choices:[...]}
};

struct LlmConfig {
  std::string endpoint;
  std::string model_name;
  double temperature = 0.2;
  int context_tokens = 2048;
  std::size_t truncate_chars = 1500;
  int retries = 3;
  double timeout_seconds = 120.0;
  ChatApi api = ChatApi::prompt;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
};

/// Keys: endpoint, model, temperature, context_tokens, truncate_chars,
/// retries, timeout_seconds, api ("prompt" | "messages"), max_in_flight,
/// cache_dir. Missing keys keep their defaults.
LlmConfig config_from_json(const nlohmann::json& j);

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.2;
  int context_tokens = 2048;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

nlohmann::json request_body(const ChatRequest& request, ChatApi api);
std::string reply_text(const nlohmann::json& reply, ChatApi api);

/// Talks to a chat endpoint over HTTP. A bearer token is taken from
/// CIVITOPIC_LLM_API_KEY when set.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(LlmConfig config) : config_(std::move(config)) {}
  std::string complete(const ChatRequest& request) override;

 private:
  LlmConfig config_;
};

struct LabelResult {
  std::string doc_id;
  std::string n1;
  std::string n2;
  std::string raw_response;
};

/// Option lists of both levels followed by the document cut to
/// config.truncate_chars characters at a whitespace boundary.
std::string build_label_prompt(std::string_view text, const Taxonomy& taxonomy, const LlmConfig& config);

struct ParsedLabel {
  std::string n1;
  std::string n2;
};

/// Splits on the first comma and validates each side against its option list:
/// exact match, then case/accent-folded match, then a single unambiguous
/// option occurring inside the side's text. Anything else is no_match.
ParsedLabel parse_label_response(std::string_view response, const Taxonomy& taxonomy);

/// Document labeling with a response cache keyed by (model, text hash).
class Labeler {
 public:
  Labeler(Taxonomy taxonomy, LlmConfig config, ChatBackend& backend);

  LabelResult label(const corpus::Document& doc);
  std::vector<LabelResult> label_all(const std::vector<corpus::Document>& docs);

  std::size_t network_calls() const { return calls_.load(); }

 private:
  std::optional<std::string> cached(const std::string& key);
  void store(const std::string& key, const std::string& response);

  Taxonomy taxonomy_;
  LlmConfig config_;
  ChatBackend& backend_;
  std::mutex cache_mutex_;
  std::map<std::string, std::string> cache_;
  std::atomic<std::size_t> calls_{0};
};

LabelResult label_document(const corpus::Document& doc, const Taxonomy& taxonomy, const LlmConfig& config,
                           ChatBackend& backend);

/// CSV `doc_id,n1,n2,raw_response_hash`.
void write_labels_csv(const std::vector<LabelResult>& labels, const std::string& path);
/// raw_response is left empty.
std::vector<LabelResult> read_labels_csv(const std::string& path);

std::string build_naming_prompt(const std::vector<topics::TopicRepresentation>& topics);

/// Topic -1 is "Outliers" without a call. The rest are requested in one call
/// as a JSON object id -> label; missing or over-long (> 3 words) labels are
/// requested once more, then fall back to the topic's auto-name.
std::map<int, std::string> name_topics(const std::vector<topics::TopicRepresentation>& topics,
                                       const LlmConfig& config, ChatBackend& backend);

}  // namespace civitopic::llm
