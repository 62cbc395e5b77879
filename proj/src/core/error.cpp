#include "civitopic/error.hpp"

namespace civitopic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parameter: return "parameter error";
    case ErrorCode::schema: return "schema error";
    case ErrorCode::io: return "I/O error";
    case ErrorCode::format: return "format error";
    case ErrorCode::data: return "data error";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::transport: return "transport error";
    case ErrorCode::protocol: return "protocol error";
    case ErrorCode::evaluation: return "evaluation error";
    case ErrorCode::empty_topic: return "empty-topic error";
    case ErrorCode::undefined_similarity: return "undefined-similarity error";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace civitopic
