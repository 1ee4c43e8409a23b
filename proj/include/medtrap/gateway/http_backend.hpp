/// @file http_backend.hpp
/// @brief OpenAI-compatible chat-completions backend over HTTP(S).

#pragma once

#include <chrono>
#include <string>

#include "medtrap/gateway/gateway.hpp"

namespace medtrap::gateway {

struct HttpEndpoint {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string api_key;   // resolved from the environment by the caller; may be empty
    std::chrono::seconds timeout{120};
};

/// Posts to `<base_url>/chat/completions`. Connection failures, 408, 429 and
/// 5xx responses raise TransportError; other non-200 statuses raise
/// std::runtime_error since retrying cannot help.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpEndpoint endpoint);
    ChatResponse send(const ChatRequest& req) override;

private:
    HttpEndpoint endpoint_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

/// Parses an OpenAI chat-completions response body.
ChatResponse parse_openai_response(const nlohmann::json& body);

}  // namespace medtrap::gateway
