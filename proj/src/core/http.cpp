#include "civitopic/http.hpp"

#include "civitopic/error.hpp"

#include "httplib.h"

#include <chrono>
#include <thread>

namespace civitopic::http {

Endpoint parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  require(scheme_end != std::string::npos, ErrorCode::configuration, "endpoint '" + url + "' lacks a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.base = url;
    ep.path = "/";
  } else {
    ep.base = url.substr(0, path_start);
    ep.path = url.substr(path_start);
  }
  require(ep.base.size() > scheme_end + 3, ErrorCode::configuration, "endpoint '" + url + "' lacks a host");
  return ep;
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const PostOptions& options) {
  const Endpoint ep = parse_url(url);
  httplib::Client client(ep.base);
  const auto timeout = std::chrono::duration<double>(options.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  for (const auto& [k, v] : options.headers) headers.emplace(k, v);
  const std::string payload = body.dump();

  std::string last_error;
  const int attempts = std::max(0, options.retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      fail(ErrorCode::transport, url + ": HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::protocol, url + ": response is not JSON: " + e.what());
    }
  }
  fail(ErrorCode::transport, url + ": request failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace civitopic::http
