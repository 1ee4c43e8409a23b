/// @file http_backend.cpp

#include "medtrap/gateway/http_backend.hpp"

#include <httplib.h>

namespace medtrap::gateway {

namespace {

FinishReason map_finish(const std::string& s) {
    if (s == "stop" || s == "complete" || s.empty()) return FinishReason::Complete;
    if (s == "length") return FinishReason::Length;
    return FinishReason::Error;
}

}  // namespace

HttpBackend::HttpBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    const auto& url = endpoint_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("base_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatResponse parse_openai_response(const nlohmann::json& body) {
    const auto& choice = body.at("choices").at(0);
    ChatResponse r;
    const auto& content = choice.at("message").at("content");
    r.text = content.is_null() ? "" : content.get<std::string>();
    r.finish_reason = map_finish(choice.value("finish_reason", std::string{}));
    if (const auto u = body.find("usage"); u != body.end() && u->is_object()) {
        r.usage.prompt = u->value("prompt_tokens", 0);
        r.usage.completion = u->value("completion_tokens", 0);
    }
    return r;
}

ChatResponse HttpBackend::send(const ChatRequest& req) {
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(endpoint_.timeout);
    cli.set_read_timeout(endpoint_.timeout);
    cli.set_write_timeout(endpoint_.timeout);
    httplib::Headers headers;
    if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

    const auto res = cli.Post(path_prefix_ + "/chat/completions", headers, to_json(req).dump(), "application/json");
    if (!res) throw TransportError("http: " + httplib::to_string(res.error()) + " for " + scheme_host_port_);
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
        throw TransportError("http: status " + std::to_string(res->status) + " from " + scheme_host_port_);
    }
    if (res->status != 200) {
        throw std::runtime_error("http: status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    const auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw TransportError("http: response body is not JSON");
    try {
        return parse_openai_response(body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("http: unexpected response layout: ") + e.what());
    }
}

}  // namespace medtrap::gateway
