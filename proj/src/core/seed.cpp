/// @file seed.cpp

#include "medtrap/core/seed.hpp"

#include <algorithm>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"

namespace medtrap {

SeedParse validate_seed(const nlohmann::json& raw) {
    SeedParse result;
    if (!raw.is_object()) {
        result.errors.emplace_back("record is not an object");
        return result;
    }

    SeedCase seed;
    auto string_field = [&](const char* key, std::string& dst) {
        const auto it = raw.find(key);
        if (it == raw.end() || !it->is_string()) return false;
        dst = it->get<std::string>();
        return true;
    };

    if (!string_field("id", seed.id) || seed.id.empty()) result.errors.emplace_back("missing id");
    if (!string_field("true_diagnosis", seed.true_diagnosis) || text::trim(seed.true_diagnosis).empty()) {
        result.errors.emplace_back("empty diagnosis");
    }

    const auto sym = raw.find("symptoms");
    if (sym == raw.end() || !sym->is_array() || sym->empty()) {
        result.errors.emplace_back("missing symptoms");
    } else {
        for (const auto& s : *sym) {
            SymptomRecord rec;
            if (s.is_string()) {
                rec.name = s.get<std::string>();
            } else {
                try {
                    rec = s.get<SymptomRecord>();
                } catch (const std::exception& e) {
                    result.errors.emplace_back(std::string("malformed symptom: ") + e.what());
                    continue;
                }
            }
            if (text::trim(rec.name).empty()) {
                result.errors.emplace_back("symptom with empty name");
                continue;
            }
            if (rec.severity && (*rec.severity < 0 || *rec.severity > 10)) {
                result.errors.emplace_back("severity out of range: " + rec.name + " = " +
                                           std::to_string(*rec.severity));
            }
            seed.symptoms.push_back(std::move(rec));
        }
    }

    if (!string_field("medical_entity", seed.medical_entity) || seed.medical_entity.empty()) {
        result.errors.emplace_back("missing medical_entity");
    } else if (!seed.symptoms.empty()) {
        const auto key = text::normalize(seed.medical_entity);
        const bool found = std::any_of(seed.symptoms.begin(), seed.symptoms.end(),
                                       [&](const SymptomRecord& r) { return text::normalize(r.name) == key; });
        if (!found) result.errors.emplace_back("entity not in symptoms: " + seed.medical_entity);
    }

    if (const auto src = raw.find("source"); src != raw.end()) {
        const auto parsed = src->is_string() ? parse_seed_source(src->get<std::string>()) : std::nullopt;
        if (!parsed) {
            result.errors.emplace_back("unknown source");
        } else {
            seed.source = *parsed;
        }
    }
    if (const auto lang = raw.find("language_tag"); lang != raw.end() && lang->is_string()) {
        seed.language_tag = lang->get<std::string>();
    }

    if (result.errors.empty()) result.seed = std::move(seed);
    return result;
}

std::vector<SeedCase> load_seeds(const std::filesystem::path& path) {
    const auto rows = parse_jsonl(read_file(path));
    std::vector<SeedCase> seeds;
    std::string problems;
    for (size_t i = 0; i < rows.size(); ++i) {
        auto parsed = validate_seed(rows[i]);
        if (!parsed.ok()) {
            problems += "record " + std::to_string(i + 1) + ": " + text::join(parsed.errors, "; ") + "\n";
            continue;
        }
        seeds.push_back(std::move(*parsed.seed));
    }
    if (!problems.empty()) throw ValidationError("invalid seeds in " + path.string() + ":\n" + problems);
    return seeds;
}

SeverityScale::SeverityScale(std::vector<Band> bands) : bands_(std::move(bands)) {
    for (int s = 0; s <= 10; ++s) {
        const bool covered = std::any_of(bands_.begin(), bands_.end(),
                                         [s](const Band& b) { return s >= b.min && s <= b.max; });
        if (!covered) throw ValidationError("severity scale: value " + std::to_string(s) + " not covered");
    }
}

SeverityScale SeverityScale::english() {
    return SeverityScale({{0, 0, "mild"}, {1, 3, "mild"}, {4, 6, "moderate"}, {7, 9, "severe"}, {10, 10, "extreme"}});
}

SeverityScale SeverityScale::from_json(const nlohmann::json& j) {
    std::vector<Band> bands;
    for (const auto& b : j) {
        bands.push_back({b.at("min").get<int>(), b.at("max").get<int>(), b.at("word").get<std::string>()});
    }
    return SeverityScale(std::move(bands));
}

const std::string& SeverityScale::word_for(int severity) const {
    for (const auto& b : bands_) {
        if (severity >= b.min && severity <= b.max) return b.word;
    }
    throw ValidationError("severity out of range: " + std::to_string(severity));
}

}  // namespace medtrap
