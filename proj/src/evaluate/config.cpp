/// @file config.cpp

#include "medtrap/evaluate/config.hpp"

#include <cmath>

namespace medtrap::evaluate {

using nlohmann::json;

void EvalConfig::validate() const {
    double sum = 0.0;
    for (auto c : kAllCriteria) {
        const auto it = weights.find(c);
        if (it == weights.end()) throw ValidationError("weights: missing criterion " + std::string(to_string(c)));
        if (!(it->second >= 0.0)) throw ValidationError("weights: must be non-negative");
        sum += it->second;
    }
    if (weights.size() != kAllCriteria.size()) throw ValidationError("weights: unexpected criterion");
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("weights: must sum to 1");
    if (group_size < 1) throw ValidationError("group_size: must be >= 1");
    if (answer_max_tokens < 1) throw ValidationError("answer_max_tokens: must be positive");
    if (answer_word_cap < 1) throw ValidationError("answer_word_cap: must be positive");
    if (max_predict < 1) throw ValidationError("max_predict: must be >= 1");
    if (workers < 1) throw ValidationError("workers: must be >= 1");
}

json to_json(const EvalConfig& cfg) {
    json w = json::object();
    for (const auto& [c, v] : cfg.weights) w[std::string(to_string(c))] = v;
    return json{{"weights", w},
                {"answer_max_tokens", cfg.answer_max_tokens},
                {"answer_word_cap", cfg.answer_word_cap},
                {"group_size", cfg.group_size},
                {"max_predict", cfg.max_predict},
                {"include_flagged", cfg.include_flagged},
                {"judge", {{"model", cfg.judge.model_id}, {"temperature", cfg.judge.temperature}}}};
}

EvalConfig eval_config_from_json(const json& j, EvalConfig cfg) {
    auto get = [&](const char* key, auto& dst) {
        if (const auto it = j.find(key); it != j.end()) {
            try {
                it->get_to(dst);
            } catch (const json::exception& e) {
                throw ValidationError(std::string(key) + ": " + e.what());
            }
        }
    };
    if (const auto it = j.find("weights"); it != j.end()) {
        cfg.weights.clear();
        for (const auto& [k, v] : it->items()) {
            const auto c = parse_criterion(k);
            if (!c) throw ValidationError("weights: unknown criterion '" + k + "'");
            cfg.weights[*c] = v.get<double>();
        }
    }
    get("answer_max_tokens", cfg.answer_max_tokens);
    get("answer_word_cap", cfg.answer_word_cap);
    get("group_size", cfg.group_size);
    get("max_predict", cfg.max_predict);
    get("include_flagged", cfg.include_flagged);
    get("workers", cfg.workers);
    get("challenge_example_description", cfg.challenge_example_description);
    get("challenge_example_diagnosis", cfg.challenge_example_diagnosis);
    cfg.validate();
    return cfg;
}

}  // namespace medtrap::evaluate
