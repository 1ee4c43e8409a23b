/// @file gateway.cpp

#include "medtrap/gateway/gateway.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "medtrap/core/digest.hpp"

namespace medtrap::gateway {

namespace {

std::string_view finish_name(FinishReason r) {
    switch (r) {
        case FinishReason::Complete: return "complete";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "error";
}

FinishReason parse_finish(const std::string& s) {
    if (s == "complete") return FinishReason::Complete;
    if (s == "length") return FinishReason::Length;
    return FinishReason::Error;
}

// Releases a semaphore slot on scope exit.
class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<4096>& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<4096>& sem_;
};

}  // namespace

void ChatRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("chat request: messages must be non-empty");
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw std::invalid_argument("chat request: temperature must be in [0,2]");
    }
    if (max_tokens <= 0) throw std::invalid_argument("chat request: max_tokens must be positive");
}

json to_json(const ChatRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", req.model_id},
                {"messages", msgs},
                {"temperature", req.temperature},
                {"max_tokens", req.max_tokens}};
}

json to_json(const ChatResponse& resp) {
    return json{{"text", resp.text},
                {"finish_reason", finish_name(resp.finish_reason)},
                {"usage", {{"prompt_tokens", resp.usage.prompt}, {"completion_tokens", resp.usage.completion}}}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.finish_reason = parse_finish(j.value("finish_reason", "complete"));
    if (const auto u = j.find("usage"); u != j.end()) {
        r.usage.prompt = u->value("prompt_tokens", 0);
        r.usage.completion = u->value("completion_tokens", 0);
    }
    return r;
}

std::string cache_key(const ChatRequest& req) { return sha256_hex(to_json(req).dump()); }

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.contains("response")) return std::nullopt;
    return response_from_json(j.at("response"));
}

void ResponseCache::put(const std::string& key, const ChatRequest& req, const ChatResponse& resp) {
    static std::atomic<std::uint64_t> counter{0};
    const auto target = path_for(key);
    std::filesystem::create_directories(target.parent_path());
    json entry{{"key", key}, {"tag", req.tag}, {"request", to_json(req)}, {"response", to_json(resp)}};
    auto tmp = target;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
           std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
        out << entry.dump(2);
    }
    std::filesystem::rename(tmp, target);
}

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, std::min(options_.max_in_flight, 4096))) {
    if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
}

Gateway::~Gateway() = default;

void Gateway::register_backend(const std::string& model_id, std::shared_ptr<Backend> backend) {
    std::lock_guard lock(mu_);
    backends_[model_id] = std::move(backend);
}

bool Gateway::has_backend(const std::string& model_id) const { return backend_for(model_id) != nullptr; }

std::shared_ptr<Backend> Gateway::backend_for(const std::string& model_id) const {
    std::lock_guard lock(mu_);
    if (auto it = backends_.find(model_id); it != backends_.end()) return it->second;
    if (auto it = backends_.find("*"); it != backends_.end()) return it->second;
    return nullptr;
}

ChatResponse Gateway::send_with_retries(Backend& backend, const ChatRequest& req) {
    for (int attempt = 0;; ++attempt) {
        try {
            SlotGuard slot(in_flight_);
            {
                std::lock_guard lock(mu_);
                ++stats_.backend_calls;
            }
            return backend.send(req);
        } catch (const TransportError&) {
            if (attempt >= options_.retry.max_retries) throw;
            {
                std::lock_guard lock(mu_);
                ++stats_.transport_retries;
            }
            std::this_thread::sleep_for(options_.retry.base_delay * (1 << attempt));
        }
    }
}

ChatResponse Gateway::complete(const ChatRequest& req) {
    req.validate();
    auto backend = backend_for(req.model_id);
    if (!backend) throw UnknownModelError("no backend registered for model '" + req.model_id + "'");
    {
        std::lock_guard lock(mu_);
        ++stats_.requests;
        ++stats_.requests_by_tag[req.tag];
    }

    std::string key;
    if (cache_) {
        key = cache_key(req);
        if (auto hit = cache_->get(key)) {
            std::lock_guard lock(mu_);
            ++stats_.cache_hits;
            return *hit;
        }
    }

    auto resp = send_with_retries(*backend, req);
    if (cache_ && resp.finish_reason != FinishReason::Error) cache_->put(key, req, resp);
    return resp;
}

json Gateway::complete_json(ChatRequest req, const JsonShape& shape, int max_attempts) {
    if (max_attempts < 1) throw std::invalid_argument("complete_json: max_attempts must be >= 1");
    std::vector<std::string> attempts;
    std::string problem;
    for (int a = 0; a < max_attempts; ++a) {
        const auto resp = complete(req);
        attempts.push_back(resp.text);
        const auto parsed = extract_json_object(resp.text);
        if (!parsed) {
            problem = "the reply did not contain a JSON object";
        } else if (auto v = shape.violation(*parsed)) {
            problem = *v;
        } else {
            return *parsed;
        }
        req.messages.push_back({"assistant", resp.text});
        req.messages.push_back({"user", "Your previous reply could not be used: " + problem +
                                            ". Reply again with only a JSON object of the form " +
                                            shape.describe() + "."});
    }
    throw JsonShapeFailure("[" + req.tag + "] no reply satisfied the expected JSON shape after " +
                               std::to_string(max_attempts) + " attempts: " + problem,
                           std::move(attempts));
}

GatewayStats Gateway::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

}  // namespace medtrap::gateway
