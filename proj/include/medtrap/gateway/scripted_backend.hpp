/// @file scripted_backend.hpp
/// @brief Deterministic fixture-driven backend for offline runs and tests.
///
/// Fixture file layout (JSON):
///
///     {"rules": [
///       {"tag": "verify", "model": "*", "contains": ["Reference diagnosis"],
///        "captures": ["Original question: "],
///        "response": {"challenge": ...} | "raw reply text",
///        "times": 1}
///     ]}
///
/// The first rule whose tag, model and every `contains` substring match the
/// request fires. `times` makes a rule single-shot (or N-shot); without it the
/// rule repeats. Each `captures` label grabs the rest of the line following it
/// in the prompt; `{{1}}` in the response inserts capture 1 JSON-escaped and
/// `{{raw:1}}` inserts it verbatim. `"transport_error": true` simulates a
/// network failure. A request no rule matches raises UnmatchedPromptError.

#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/gateway/gateway.hpp"

namespace medtrap::gateway {

class UnmatchedPromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScriptRule {
    std::string tag = "*";
    std::string model = "*";
    std::vector<std::string> contains;
    std::vector<std::string> captures;
    std::string response;
    std::optional<int> times;
    bool transport_error = false;
    FinishReason finish_reason = FinishReason::Complete;
};

class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;
    explicit ScriptedBackend(std::vector<ScriptRule> rules);
    ScriptedBackend(ScriptedBackend&& other) noexcept;

    static ScriptedBackend from_json(const nlohmann::json& fixtures);
    static ScriptedBackend from_file(const std::filesystem::path& path);

    void add_rule(ScriptRule rule);

    ChatResponse send(const ChatRequest& req) override;

    std::size_t invocations() const;
    std::size_t fired(std::size_t rule_index) const;

    /// Keeps a copy of every request from now on (off by default).
    void record_requests(bool on);
    std::vector<ChatRequest> requests() const;

private:
    struct State {
        ScriptRule rule;
        int fired = 0;
    };
    std::vector<State> rules_;
    std::size_t invocations_ = 0;
    bool recording_ = false;
    std::vector<ChatRequest> recorded_;
    mutable std::mutex mu_;
};

}  // namespace medtrap::gateway
