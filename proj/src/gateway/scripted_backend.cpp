/// @file scripted_backend.cpp

#include "medtrap/gateway/scripted_backend.hpp"

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"

namespace medtrap::gateway {

namespace {

std::optional<std::string> capture_after(const std::string& content, const std::string& label) {
    const auto pos = content.find(label);
    if (pos == std::string::npos) return std::nullopt;
    const auto start = pos + label.size();
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    return text::trim(std::string_view(content).substr(start, end - start));
}

std::string substitute(const std::string& tmpl, const std::vector<std::string>& caps) {
    std::string out;
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl.compare(i, 2, "{{") == 0) {
            const auto close = tmpl.find("}}", i + 2);
            if (close != std::string::npos) {
                std::string token = tmpl.substr(i + 2, close - i - 2);
                bool raw = false;
                if (token.rfind("raw:", 0) == 0) {
                    raw = true;
                    token = token.substr(4);
                }
                const bool numeric = !token.empty() && token.find_first_not_of("0123456789") == std::string::npos;
                if (numeric) {
                    const auto idx = std::stoul(token);
                    if (idx >= 1 && idx <= caps.size()) {
                        out += raw ? caps[idx - 1] : text::json_escape(caps[idx - 1]);
                        i = close + 2;
                        continue;
                    }
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules) {
    for (auto& r : rules) rules_.push_back({std::move(r), 0});
}

ScriptedBackend::ScriptedBackend(ScriptedBackend&& other) noexcept {
    std::lock_guard lock(other.mu_);
    rules_ = std::move(other.rules_);
    invocations_ = other.invocations_;
    recording_ = other.recording_;
    recorded_ = std::move(other.recorded_);
}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& fixtures) {
    const auto& list = fixtures.is_array() ? fixtures : fixtures.at("rules");
    std::vector<ScriptRule> rules;
    for (const auto& r : list) {
        ScriptRule rule;
        rule.tag = r.value("tag", "*");
        rule.model = r.value("model", "*");
        if (const auto c = r.find("contains"); c != r.end()) {
            rule.contains = c->is_string() ? std::vector<std::string>{c->get<std::string>()}
                                           : c->get<std::vector<std::string>>();
        }
        rule.captures = r.value("captures", std::vector<std::string>{});
        if (const auto resp = r.find("response"); resp != r.end()) {
            rule.response = resp->is_string() ? resp->get<std::string>() : resp->dump();
        }
        if (const auto t = r.find("times"); t != r.end()) rule.times = t->get<int>();
        rule.transport_error = r.value("transport_error", false);
        const auto finish = r.value("finish_reason", "complete");
        rule.finish_reason = finish == "length" ? FinishReason::Length
                             : finish == "error" ? FinishReason::Error
                                                 : FinishReason::Complete;
        if (!rule.transport_error && !r.contains("response")) {
            throw std::invalid_argument("scripted rule for tag '" + rule.tag + "' has no response");
        }
        rules.push_back(std::move(rule));
    }
    return ScriptedBackend(std::move(rules));
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
}

void ScriptedBackend::add_rule(ScriptRule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back({std::move(rule), 0});
}

ChatResponse ScriptedBackend::send(const ChatRequest& req) {
    std::string content;
    for (const auto& m : req.messages) {
        if (m.role == "assistant") continue;
        content += m.content;
        content.push_back('\n');
    }

    std::lock_guard lock(mu_);
    ++invocations_;
    if (recording_) recorded_.push_back(req);
    for (auto& state : rules_) {
        const auto& rule = state.rule;
        if (rule.times && state.fired >= *rule.times) continue;
        if (rule.tag != "*" && rule.tag != req.tag) continue;
        if (rule.model != "*" && rule.model != req.model_id) continue;
        bool ok = true;
        for (const auto& needle : rule.contains) {
            if (content.find(needle) == std::string::npos) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::vector<std::string> caps;
        for (const auto& label : rule.captures) {
            auto cap = capture_after(content, label);
            if (!cap) {
                ok = false;
                break;
            }
            caps.push_back(std::move(*cap));
        }
        if (!ok) continue;

        ++state.fired;
        if (rule.transport_error) throw TransportError("scripted transport failure for tag '" + req.tag + "'");
        ChatResponse resp;
        resp.text = substitute(rule.response, caps);
        resp.finish_reason = rule.finish_reason;
        resp.usage.prompt = static_cast<int>(content.size() / 4);
        resp.usage.completion = static_cast<int>(resp.text.size() / 4);
        return resp;
    }
    throw UnmatchedPromptError("unmatched prompt for tag '" + req.tag + "' (model '" + req.model_id + "')");
}

std::size_t ScriptedBackend::invocations() const {
    std::lock_guard lock(mu_);
    return invocations_;
}

void ScriptedBackend::record_requests(bool on) {
    std::lock_guard lock(mu_);
    recording_ = on;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mu_);
    return recorded_;
}

std::size_t ScriptedBackend::fired(std::size_t rule_index) const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(rules_.at(rule_index).fired);
}

}  // namespace medtrap::gateway
