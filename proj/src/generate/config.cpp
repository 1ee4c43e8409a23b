/// @file config.cpp

#include "medtrap/generate/config.hpp"

#include <algorithm>
#include <set>

#include "medtrap/core/digest.hpp"
#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"

namespace medtrap::generate {

using nlohmann::json;

namespace {

const std::set<std::string>& style_words() {
    static const std::set<std::string> words{
        "about",    "average", "basic",   "clarity", "clear",    "communication", "describes", "detail",
        "detailed", "direct",  "educated", "education", "expert", "expresses", "fairly",   "from",
        "good",     "health",  "high",    "indirect", "knowledge", "knows",    "language", "level",
        "limited",  "literacy", "little", "medical",  "medium",  "much",      "neutral",  "often",
        "patient",  "person",  "plain",   "poor",     "precise", "rarely",    "some",     "speaks",
        "style",    "talks",   "tends",   "terms",    "that",    "their",     "very",     "vague",
        "what",     "when",    "which",   "with",     "without", "words",     "years",    "year"};
    return words;
}

std::string slug_mode(GenMode m) { return m == GenMode::Benchmark ? "benchmark" : "challenge"; }

}  // namespace

std::vector<std::string> PersonaDescriptor::leak_terms() const {
    if (identity_terms) return *identity_terms;
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (word.size() >= 4 && !style_words().count(word) &&
            std::find(out.begin(), out.end(), word) == out.end()) {
            out.push_back(word);
        }
        word.clear();
    };
    for (const char c : text::to_lower(description)) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

void GenConfig::validate() const {
    if (max_refine_iterations < 1) throw ValidationError("max_refine_iterations: must be >= 1");
    if (static_cast<int>(eta_schedule.size()) < max_refine_iterations) {
        throw ValidationError("eta_schedule: needs at least max_refine_iterations entries");
    }
    for (double e : eta_schedule) {
        if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("eta_schedule: every value must be in [0,1]");
    }
    if (scorepoint_count < 1) throw ValidationError("scorepoint_count: must be >= 1");
    if (rumor_pool_size < 1 || rumor_pool_size > 10) throw ValidationError("rumor_pool_size: must be in [1,10]");
    if (differential_count < 1) throw ValidationError("differential_count: must be >= 1");
    if (traps.empty()) throw ValidationError("traps: the trap set is empty");
    if (workers < 1) throw ValidationError("workers: must be >= 1");
    for (const auto& p : persona_pool) {
        if (text::trim(p.description).empty()) throw ValidationError("persona_pool: empty persona description");
    }
}

std::vector<PersonaDescriptor> GenConfig::personas() const {
    if (!persona_pool.empty()) return persona_pool;
    return {{"default", "an adult patient", std::vector<std::string>{}}};
}

json to_json(const GenConfig& cfg) {
    json traps = json::array();
    for (auto t : cfg.traps) traps.push_back(to_string(t));
    json personas = json::array();
    for (const auto& p : cfg.persona_pool) {
        json e{{"id", p.id}, {"description", p.description}};
        if (p.identity_terms) e["identity_terms"] = *p.identity_terms;
        personas.push_back(e);
    }
    return json{{"max_refine_iterations", cfg.max_refine_iterations},
                {"eta_schedule", cfg.eta_schedule},
                {"scorepoint_count", cfg.scorepoint_count},
                {"rumor_pool_size", cfg.rumor_pool_size},
                {"differential_count", cfg.differential_count},
                {"traps", traps},
                {"mode", slug_mode(cfg.mode)},
                {"persona_pool", personas},
                {"rng_seed", cfg.rng_seed},
                {"pronoun_tone", cfg.pronoun_tone},
                {"symptom_synonyms", cfg.symptom_synonyms},
                {"heldout_symptoms", cfg.heldout_symptoms},
                {"generator", {{"model", cfg.generator.model_id}, {"temperature", cfg.generator.temperature}}},
                {"judge", {{"model", cfg.judge.model_id}, {"temperature", cfg.judge.temperature}}}};
}

GenConfig gen_config_from_json(const json& j, GenConfig cfg) {
    auto get = [&](const char* key, auto& dst) {
        if (const auto it = j.find(key); it != j.end()) {
            try {
                it->get_to(dst);
            } catch (const json::exception& e) {
                throw ValidationError(std::string(key) + ": " + e.what());
            }
        }
    };
    get("max_refine_iterations", cfg.max_refine_iterations);
    get("eta_schedule", cfg.eta_schedule);
    get("scorepoint_count", cfg.scorepoint_count);
    get("rumor_pool_size", cfg.rumor_pool_size);
    get("differential_count", cfg.differential_count);
    get("rng_seed", cfg.rng_seed);
    get("pronoun_tone", cfg.pronoun_tone);
    get("symptom_synonyms", cfg.symptom_synonyms);
    get("heldout_symptoms", cfg.heldout_symptoms);
    get("workers", cfg.workers);
    if (const auto it = j.find("traps"); it != j.end()) {
        cfg.traps.clear();
        if (it->is_string() && it->get<std::string>() == "all") {
            cfg.traps.assign(kAllTraps.begin(), kAllTraps.end());
        } else {
            for (const auto& t : *it) {
                const auto parsed = parse_trap(t.get<std::string>());
                if (!parsed) throw ValidationError("traps: unknown trap '" + t.get<std::string>() + "'");
                cfg.traps.push_back(*parsed);
            }
        }
    }
    if (const auto it = j.find("mode"); it != j.end()) {
        const auto m = text::normalize(it->get<std::string>());
        if (m == "benchmark") cfg.mode = GenMode::Benchmark;
        else if (m == "challenge") cfg.mode = GenMode::Challenge;
        else throw ValidationError("mode: expected benchmark or challenge");
    }
    if (const auto it = j.find("persona_pool"); it != j.end()) {
        cfg.persona_pool.clear();
        int index = 0;
        for (const auto& p : *it) {
            PersonaDescriptor d;
            if (p.is_string()) {
                d.description = p.get<std::string>();
            } else {
                d.description = p.at("description").get<std::string>();
                d.id = p.value("id", std::string{});
                if (p.contains("identity_terms")) d.identity_terms = p.at("identity_terms").get<std::vector<std::string>>();
            }
            if (d.id.empty()) d.id = "persona-" + std::to_string(index);
            ++index;
            cfg.persona_pool.push_back(std::move(d));
        }
    }
    cfg.validate();
    return cfg;
}

std::string config_digest(const GenConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

}  // namespace medtrap::generate
