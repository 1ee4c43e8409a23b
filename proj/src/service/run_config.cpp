/// @file run_config.cpp

#include "medtrap/service/run_config.hpp"

#include <cstdlib>

#include "medtrap/core/types.hpp"
#include "medtrap/gateway/http_backend.hpp"
#include "medtrap/gateway/prompt_catalog.hpp"
#include "medtrap/gateway/scripted_backend.hpp"
#include "medtrap/core/serialize.hpp"

namespace medtrap::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_dir(const fs::path& p, const std::string& field) {
    if (!fs::is_directory(p)) throw ValidationError(field + ": directory not found: " + p.string());
}

}  // namespace

void RunConfig::validate() const {
    require_dir(knowledge_dir, "paths.knowledge");
    require_dir(prompt_dir, "paths.prompts");
    if (scripted_fixtures && !fs::is_regular_file(*scripted_fixtures)) {
        throw ValidationError("backend.scripted: file not found: " + scripted_fixtures->string());
    }
    if (!scripted_fixtures && endpoints.empty()) throw ValidationError("backend: no scripted fixtures or endpoints");
    for (const auto& e : endpoints) {
        if (e.base_url.empty()) throw ValidationError("backend.endpoints: base_url must be non-empty");
        if (e.timeout_s <= 0) throw ValidationError("backend.endpoints: timeout_s must be positive");
    }
    if (max_in_flight < 1) throw ValidationError("max_in_flight: must be >= 1");
    gen.validate();
    eval.validate();
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    RunConfig cfg;
    if (const auto b = j.find("backend"); b != j.end()) {
        if (b->contains("scripted")) cfg.scripted_fixtures = resolve(base_dir, b->at("scripted").get<std::string>());
        for (const auto& e : b->value("endpoints", json::array())) {
            if (e.contains("api_key")) {
                throw ValidationError("backend.endpoints: inline api_key is not allowed; name an env var in api_key_env");
            }
            EndpointConfig ep;
            ep.base_url = e.at("base_url").get<std::string>();
            ep.api_key_env = e.value("api_key_env", "");
            ep.models = e.value("models", std::vector<std::string>{});
            ep.timeout_s = e.value("timeout_s", 120);
            cfg.endpoints.push_back(std::move(ep));
        }
    }
    if (const auto m = j.find("models"); m != j.end()) {
        cfg.generator_model = m->value("generator", cfg.generator_model);
        cfg.judge_model = m->value("judge", cfg.judge_model);
        cfg.candidate_models = m->value("candidates", std::vector<std::string>{});
    }
    if (const auto g = j.find("generation"); g != j.end()) cfg.gen = generate::gen_config_from_json(*g);
    if (const auto e = j.find("evaluation"); e != j.end()) cfg.eval = evaluate::eval_config_from_json(*e);
    cfg.gen.generator.model_id = cfg.generator_model;
    cfg.gen.judge.model_id = cfg.judge_model;
    cfg.eval.judge.model_id = cfg.judge_model;

    const auto paths = j.value("paths", json::object());
    cfg.knowledge_dir = resolve(base_dir, paths.value("knowledge", "knowledge"));
    cfg.prompt_dir = paths.contains("prompts") ? resolve(base_dir, paths.at("prompts").get<std::string>())
                                               : default_prompt_dir();
    if (paths.contains("cache")) cfg.cache_dir = resolve(base_dir, paths.at("cache").get<std::string>());
    if (paths.contains("output")) cfg.output_dir = resolve(base_dir, paths.at("output").get<std::string>());
    cfg.language = j.value("language", cfg.language);
    cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);

    cfg.validate();
    if (cfg.cache_dir) fs::create_directories(*cfg.cache_dir);
    if (cfg.output_dir) fs::create_directories(*cfg.output_dir);
    return cfg;
}

RunConfig load_run_config(const fs::path& path, const std::optional<fs::path>& scripted) {
    if (!fs::is_regular_file(path)) throw ValidationError("config: file not found: " + path.string());
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ValidationError("config: not valid JSON: " + path.string());
    if (scripted) j["backend"] = {{"scripted", fs::absolute(*scripted).string()}};
    auto cfg = run_config_from_json(j, fs::absolute(path).parent_path());
    cfg.source = path;
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json backend = json::object();
    if (cfg.scripted_fixtures) backend["scripted"] = cfg.scripted_fixtures->filename().string();
    json eps = json::array();
    for (const auto& e : cfg.endpoints) {
        eps.push_back({{"base_url", e.base_url}, {"api_key_env", e.api_key_env}, {"models", e.models},
                       {"timeout_s", e.timeout_s}});
    }
    backend["endpoints"] = eps;
    return json{{"backend", backend},
                {"models",
                 {{"generator", cfg.generator_model}, {"judge", cfg.judge_model}, {"candidates", cfg.candidate_models}}},
                {"generation", generate::to_json(cfg.gen)},
                {"evaluation", evaluate::to_json(cfg.eval)},
                {"language", cfg.language},
                {"max_in_flight", cfg.max_in_flight}};
}

std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& cfg) {
    gateway::GatewayOptions opts;
    opts.cache_dir = cfg.cache_dir;
    opts.max_in_flight = cfg.max_in_flight;
    auto gw = std::make_unique<gateway::Gateway>(opts);
    if (cfg.scripted_fixtures) {
        gw->register_backend("*", std::make_shared<gateway::ScriptedBackend>(
                                      gateway::ScriptedBackend::from_file(*cfg.scripted_fixtures)));
        return gw;
    }
    for (const auto& e : cfg.endpoints) {
        gateway::HttpEndpoint ep;
        ep.base_url = e.base_url;
        if (!e.api_key_env.empty()) {
            const char* key = std::getenv(e.api_key_env.c_str());
            if (!key) throw ValidationError("backend.endpoints: environment variable " + e.api_key_env + " is not set");
            ep.api_key = key;
        }
        ep.timeout = std::chrono::seconds(e.timeout_s);
        auto backend = std::make_shared<gateway::HttpBackend>(ep);
        if (e.models.empty()) {
            gw->register_backend("*", backend);
        } else {
            for (const auto& m : e.models) gw->register_backend(m, backend);
        }
    }
    return gw;
}

}  // namespace medtrap::service
