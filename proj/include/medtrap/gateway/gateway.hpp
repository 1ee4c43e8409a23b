/// @file gateway.hpp
/// @brief Uniform access to chat-completion endpoints.
///
/// The gateway routes a request to the backend registered for its model id,
/// serves repeats from a content-addressed on-disk cache, retries transport
/// failures with exponential backoff, and bounds in-flight backend calls.
/// complete_json() adds a prompt-visible re-ask loop on top for replies that
/// do not satisfy a declared JSON shape.

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/gateway/json_shape.hpp"

namespace medtrap::gateway {

using json = nlohmann::json;

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string tag;  // pipeline stage name; not part of the cache key

    /// Throws std::invalid_argument on an empty message list, temperature
    /// outside [0,2] or non-positive max_tokens.
    void validate() const;
};

enum class FinishReason { Complete, Length, Error };

struct TokenUsage {
    int prompt = 0;
    int completion = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Complete;
    TokenUsage usage;

    bool operator==(const ChatResponse&) const = default;
};

json to_json(const ChatRequest& req);
json to_json(const ChatResponse& resp);
ChatResponse response_from_json(const json& j);

/// Hex SHA-256 over the canonical (model_id, messages, temperature, max_tokens) tuple.
std::string cache_key(const ChatRequest& req);

/// Retryable network / server failure.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// complete_json() exhausted its attempts; carries every raw reply.
class JsonShapeFailure : public std::runtime_error {
public:
    JsonShapeFailure(std::string message, std::vector<std::string> attempts)
        : std::runtime_error(std::move(message)), attempts_(std::move(attempts)) {}
    const std::vector<std::string>& attempts() const { return attempts_; }

private:
    std::vector<std::string> attempts_;
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Throws TransportError for retryable failures.
    virtual ChatResponse send(const ChatRequest& req) = 0;
};

/// Disk cache: one JSON file per key under `dir`, holding the response and
/// the request metadata for audit. Writes are temp-file-then-rename.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<ChatResponse> get(const std::string& key) const;
    void put(const std::string& key, const ChatRequest& req, const ChatResponse& resp);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{200};
};

struct GatewayOptions {
    std::optional<std::filesystem::path> cache_dir;
    RetryPolicy retry;
    int max_in_flight = 8;
};

struct GatewayStats {
    std::size_t requests = 0;
    std::size_t backend_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t transport_retries = 0;
    std::map<std::string, std::size_t> requests_by_tag;
};

class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Registers `backend` for `model_id`; "*" registers a fallback for any model.
    void register_backend(const std::string& model_id, std::shared_ptr<Backend> backend);
    bool has_backend(const std::string& model_id) const;

    ChatResponse complete(const ChatRequest& req);

    /// Asks until a reply parses as a JSON object satisfying `shape`. Each bad
    /// reply is appended to the conversation with an error note before the
    /// next attempt. Throws JsonShapeFailure after `max_attempts` failures.
    json complete_json(ChatRequest req, const JsonShape& shape, int max_attempts);

    GatewayStats stats() const;

private:
    std::shared_ptr<Backend> backend_for(const std::string& model_id) const;
    ChatResponse send_with_retries(Backend& backend, const ChatRequest& req);

    GatewayOptions options_;
    std::optional<ResponseCache> cache_;
    std::map<std::string, std::shared_ptr<Backend>> backends_;
    mutable std::mutex mu_;
    GatewayStats stats_;
    std::counting_semaphore<4096> in_flight_;
};

}  // namespace medtrap::gateway
