/// @file serialize.cpp

#include "medtrap/core/serialize.hpp"

#include <fstream>
#include <sstream>

namespace medtrap {

namespace {

template <typename T>
T required(const json& j, const char* key) {
    if (!j.is_object()) throw ValidationError(std::string(key) + ": enclosing value is not an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string(key) + ": missing");
    try {
        return it->get<T>();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(key) + "." + e.what());
    } catch (const json::exception& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    }
}

template <typename T>
T optional_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(key) + "." + e.what());
    } catch (const json::exception& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    }
}

template <typename E, typename Parse>
E required_enum(const json& j, const char* key, Parse parse) {
    const auto s = required<std::string>(j, key);
    const auto v = parse(s);
    if (!v) throw ValidationError(std::string(key) + ": unknown value '" + s + "'");
    return *v;
}

Stance parse_stance_name(std::string_view s) {
    if (s == "Supports") return Stance::Supports;
    if (s == "Opposes") return Stance::Opposes;
    if (s == "Undetermined") return Stance::Undetermined;
    throw ValidationError("unknown stance '" + std::string(s) + "'");
}

}  // namespace

void to_json(json& j, const SymptomRecord& v) {
    j = json{{"name", v.name}};
    if (v.severity) j["severity"] = *v.severity;
    if (v.duration) j["duration"] = *v.duration;
    if (v.frequency) j["frequency"] = *v.frequency;
    if (v.triggers) j["triggers"] = *v.triggers;
}

void from_json(const json& j, SymptomRecord& v) {
    v.name = required<std::string>(j, "name");
    v.severity = optional_field<int>(j, "severity");
    v.duration = optional_field<std::string>(j, "duration");
    v.frequency = optional_field<std::string>(j, "frequency");
    v.triggers = optional_field<std::string>(j, "triggers");
}

void to_json(json& j, const SeedCase& v) {
    j = json{{"id", v.id},
             {"symptoms", v.symptoms},
             {"true_diagnosis", v.true_diagnosis},
             {"medical_entity", v.medical_entity},
             {"source", to_string(v.source)},
             {"language_tag", v.language_tag}};
}

void from_json(const json& j, SeedCase& v) {
    v.id = required<std::string>(j, "id");
    v.symptoms = required<std::vector<SymptomRecord>>(j, "symptoms");
    v.true_diagnosis = required<std::string>(j, "true_diagnosis");
    v.medical_entity = required<std::string>(j, "medical_entity");
    const auto src = optional_or<std::string>(j, "source", "Custom");
    const auto parsed = parse_seed_source(src);
    if (!parsed) throw ValidationError("source: unknown value '" + src + "'");
    v.source = *parsed;
    v.language_tag = optional_or<std::string>(j, "language_tag", "en");
}

void to_json(json& j, const PersonaStyle& v) {
    j = json{{"medical_knowledge", to_string(v.medical_knowledge)},
             {"clarity", to_string(v.clarity)},
             {"communication_style", to_string(v.communication_style)}};
}

void from_json(const json& j, PersonaStyle& v) {
    v.medical_knowledge = required_enum<Level>(j, "medical_knowledge", parse_level);
    v.clarity = required_enum<Level>(j, "clarity", parse_level);
    v.communication_style = required_enum<CommStyle>(j, "communication_style", parse_comm_style);
}

void to_json(json& j, const RumorFactPair& v) {
    j = json{{"entity", v.entity}, {"rumor", v.rumor}, {"fact", v.fact}, {"valid", v.valid}};
}

void from_json(const json& j, RumorFactPair& v) {
    v.entity = required<std::string>(j, "entity");
    v.rumor = required<std::string>(j, "rumor");
    v.fact = required<std::string>(j, "fact");
    v.valid = optional_or<bool>(j, "valid", false);
}

void to_json(json& j, const ScorePoints& v) {
    j = json{{"evidence", v.evidence}, {"treatment", v.treatment}, {"lifestyle", v.lifestyle}};
}

void from_json(const json& j, ScorePoints& v) {
    v.evidence = required<std::vector<std::string>>(j, "evidence");
    v.treatment = required<std::vector<std::string>>(j, "treatment");
    v.lifestyle = required<std::vector<std::string>>(j, "lifestyle");
}

void to_json(json& j, const ValidationReport& v) {
    j = json::object();
    for (auto name : ValidationReport::kDimensions) {
        const auto& d = v.dimension(name);
        j[std::string(name)] = json{{"assessment", d.assessment}, {"pass", d.pass}};
    }
}

void from_json(const json& j, ValidationReport& v) {
    for (auto name : ValidationReport::kDimensions) {
        const std::string key(name);
        const auto dim = required<json>(j, key.c_str());
        auto& d = v.dimension(name);
        d.assessment = optional_or<std::string>(dim, "assessment", "");
        try {
            d.pass = required<bool>(dim, "pass");
        } catch (const ValidationError& e) {
            throw ValidationError(key + "." + e.what());
        }
    }
}

void to_json(json& j, const RefineIteration& v) {
    j = json{{"report", v.report}};
    if (v.refined_text) j["refined_text"] = *v.refined_text;
    if (v.eta) j["eta"] = *v.eta;
}

void from_json(const json& j, RefineIteration& v) {
    v.report = required<ValidationReport>(j, "report");
    v.refined_text = optional_field<std::string>(j, "refined_text");
    v.eta = optional_field<double>(j, "eta");
}

void to_json(json& j, const PipelineTrace& v) {
    j = json{{"raw_text", v.raw_text},         {"trapped_text", v.trapped_text},
             {"styled_text", v.styled_text},   {"rumored_text", v.rumored_text},
             {"iterations", v.iterations},     {"validated", v.validated},
             {"flags", v.flags}};
}

void from_json(const json& j, PipelineTrace& v) {
    v.raw_text = required<std::string>(j, "raw_text");
    v.trapped_text = required<std::string>(j, "trapped_text");
    v.styled_text = required<std::string>(j, "styled_text");
    v.rumored_text = required<std::string>(j, "rumored_text");
    v.iterations = required<std::vector<RefineIteration>>(j, "iterations");
    v.validated = required<bool>(j, "validated");
    v.flags = optional_or<std::vector<std::string>>(j, "flags", {});
}

void to_json(json& j, const BenchQuestion& v) {
    j = json{{"id", v.id},
             {"seed_id", v.seed_id},
             {"text", v.text},
             {"true_diagnosis", v.true_diagnosis},
             {"distractor_diagnosis", v.distractor_diagnosis},
             {"trap", to_string(v.trap)},
             {"persona", v.persona},
             {"rumor_pair", v.rumor_pair},
             {"score_points", v.score_points},
             {"provenance", v.provenance}};
}

void from_json(const json& j, BenchQuestion& v) {
    v.id = required<std::string>(j, "id");
    v.seed_id = required<std::string>(j, "seed_id");
    v.text = required<std::string>(j, "text");
    v.true_diagnosis = required<std::string>(j, "true_diagnosis");
    v.distractor_diagnosis = required<std::string>(j, "distractor_diagnosis");
    v.trap = required_enum<TrapKind>(j, "trap", parse_trap);
    v.persona = required<PersonaStyle>(j, "persona");
    v.rumor_pair = required<RumorFactPair>(j, "rumor_pair");
    v.score_points = required<ScorePoints>(j, "score_points");
    v.provenance = required<PipelineTrace>(j, "provenance");
}

void to_json(json& j, const ModelAnswer& v) {
    j = json{{"question_id", v.question_id},
             {"model_id", v.model_id},
             {"text", v.text},
             {"ranked_diagnoses", v.ranked_diagnoses},
             {"missing", v.missing}};
    if (!v.error.empty()) j["error"] = v.error;
}

void from_json(const json& j, ModelAnswer& v) {
    v.question_id = required<std::string>(j, "question_id");
    v.model_id = required<std::string>(j, "model_id");
    v.text = required<std::string>(j, "text");
    v.ranked_diagnoses = optional_or<std::vector<std::string>>(j, "ranked_diagnoses", {});
    v.missing = optional_or<bool>(j, "missing", false);
    v.error = optional_or<std::string>(j, "error", "");
    if (!v.missing && v.text.empty()) throw ValidationError("text: empty on a non-missing answer");
}

void to_json(json& j, const HelpScores& v) {
    j = json{{"evidence", v.evidence}, {"treatment", v.treatment}, {"lifestyle", v.lifestyle}};
}

void from_json(const json& j, HelpScores& v) {
    v.evidence = required<int>(j, "evidence");
    v.treatment = required<int>(j, "treatment");
    v.lifestyle = required<int>(j, "lifestyle");
}

void to_json(json& j, const EvalRecord& v) {
    j = json{{"question_id", v.question_id},
             {"model_id", v.model_id},
             {"seed_id", v.seed_id},
             {"acc_sub", v.acc_sub},
             {"ver_rectified", v.ver_rectified},
             {"help_sub", v.help_sub},
             {"primary_diagnosis", v.primary_diagnosis},
             {"rumor_stance", to_string(v.rumor_stance)},
             {"fact_stance", to_string(v.fact_stance)},
             {"judge_rationales", v.judge_rationales},
             {"flags", v.flags}};
}

void from_json(const json& j, EvalRecord& v) {
    v.question_id = required<std::string>(j, "question_id");
    v.model_id = required<std::string>(j, "model_id");
    v.seed_id = optional_or<std::string>(j, "seed_id", "");
    v.acc_sub = required<int>(j, "acc_sub");
    v.ver_rectified = required<bool>(j, "ver_rectified");
    v.help_sub = required<HelpScores>(j, "help_sub");
    v.primary_diagnosis = optional_or<std::string>(j, "primary_diagnosis", "");
    v.rumor_stance = parse_stance_name(optional_or<std::string>(j, "rumor_stance", "Undetermined"));
    v.fact_stance = parse_stance_name(optional_or<std::string>(j, "fact_stance", "Undetermined"));
    v.judge_rationales = optional_or<std::vector<std::string>>(j, "judge_rationales", {});
    v.flags = optional_or<std::vector<std::string>>(j, "flags", {});
}

void to_json(json& j, const PredictionGroup& v) {
    j = json{{"seed_id", v.seed_id},
             {"model_id", v.model_id},
             {"normalized_diagnoses", v.normalized_diagnoses},
             {"entropy", v.entropy},
             {"score", v.score}};
}

void from_json(const json& j, PredictionGroup& v) {
    v.seed_id = required<std::string>(j, "seed_id");
    v.model_id = optional_or<std::string>(j, "model_id", "");
    v.normalized_diagnoses = required<std::vector<std::string>>(j, "normalized_diagnoses");
    v.entropy = required<double>(j, "entropy");
    v.score = optional_or<double>(j, "score", 0.0);
}

void to_json(json& j, const ScoreCard& v) {
    j = json{{"model_id", v.model_id}, {"acc", v.acc},   {"ver", v.ver},
             {"help", v.help},         {"cons", v.cons}, {"avg", v.avg},
             {"questions", v.questions}, {"groups", v.groups}};
}

void from_json(const json& j, ScoreCard& v) {
    v.model_id = required<std::string>(j, "model_id");
    v.acc = required<double>(j, "acc");
    v.ver = required<double>(j, "ver");
    v.help = required<double>(j, "help");
    v.cons = required<double>(j, "cons");
    v.avg = required<double>(j, "avg");
    v.questions = optional_or<size_t>(j, "questions", 0);
    v.groups = optional_or<size_t>(j, "groups", 0);
}

void validate(const BenchQuestion& q) {
    if (q.id.empty()) throw ValidationError("id: must be non-empty");
    if (q.seed_id.empty()) throw ValidationError("seed_id: must be non-empty");
    if (q.text.empty()) throw ValidationError("text: must be non-empty");
    if (q.true_diagnosis.empty()) throw ValidationError("true_diagnosis: must be non-empty");
    if (q.rumor_pair.rumor.empty()) throw ValidationError("rumor_pair.rumor: must be non-empty");
    if (q.rumor_pair.fact.empty()) throw ValidationError("rumor_pair.fact: must be non-empty");
    if (q.rumor_pair.rumor == q.rumor_pair.fact) throw ValidationError("rumor_pair: rumor equals fact");
    for (const auto& it : q.provenance.iterations) {
        if (it.eta && (*it.eta < 0.0 || *it.eta > 1.0)) {
            throw ValidationError("provenance.iterations.eta: outside [0,1]");
        }
    }
}

std::string serialize_dataset(std::span<const BenchQuestion> items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        try {
            validate(items[i]);
        } catch (const ValidationError& e) {
            throw ValidationError("item " + std::to_string(i) + ": " + e.what());
        }
        out += to_jsonl_line(items[i]);
    }
    return out;
}

std::vector<BenchQuestion> parse_dataset(std::string_view jsonl) {
    return parse_jsonl_as<BenchQuestion>(jsonl);
}

std::vector<json> parse_jsonl(std::string_view text) {
    std::vector<json> out;
    size_t line_no = 0;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (const auto it = j.find("schema_version"); it != j.end()) {
            if (!it->is_string() || it->get<std::string>() != kSchemaVersion) {
                throw ValidationError("line " + std::to_string(line_no) + ": schema_version: unsupported");
            }
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace medtrap
