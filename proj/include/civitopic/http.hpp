#pragma once

#include "json.hpp"

#include <map>
#include <string>

namespace civitopic::http {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // always starts with '/'
};

Endpoint parse_url(const std::string& url);

struct PostOptions {
  double timeout_seconds = 60.0;
  int retries = 3;
  std::map<std::string, std::string> headers;
};

/// POSTs a JSON body and parses a JSON reply. Connection failures and 5xx
/// replies are retried; anything still failing afterwards is a transport
/// error, an unparsable body is a protocol error.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const PostOptions& options);

}  // namespace civitopic::http
