/// @file serialize.hpp
/// @brief JSON / JSONL encodings for the domain types.
///
/// Every JSONL line carries "schema_version": "1". Objects are emitted with
/// sorted keys so output is byte-stable. Decoding is strict: a missing or
/// mistyped field raises ValidationError naming the field.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/types.hpp"

namespace medtrap {

using json = nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "1";

void to_json(json& j, const SymptomRecord& v);
void from_json(const json& j, SymptomRecord& v);
void to_json(json& j, const SeedCase& v);
void from_json(const json& j, SeedCase& v);
void to_json(json& j, const PersonaStyle& v);
void from_json(const json& j, PersonaStyle& v);
void to_json(json& j, const RumorFactPair& v);
void from_json(const json& j, RumorFactPair& v);
void to_json(json& j, const ScorePoints& v);
void from_json(const json& j, ScorePoints& v);
void to_json(json& j, const ValidationReport& v);
void from_json(const json& j, ValidationReport& v);
void to_json(json& j, const RefineIteration& v);
void from_json(const json& j, RefineIteration& v);
void to_json(json& j, const PipelineTrace& v);
void from_json(const json& j, PipelineTrace& v);
void to_json(json& j, const BenchQuestion& v);
void from_json(const json& j, BenchQuestion& v);
void to_json(json& j, const ModelAnswer& v);
void from_json(const json& j, ModelAnswer& v);
void to_json(json& j, const HelpScores& v);
void from_json(const json& j, HelpScores& v);
void to_json(json& j, const EvalRecord& v);
void from_json(const json& j, EvalRecord& v);
void to_json(json& j, const PredictionGroup& v);
void from_json(const json& j, PredictionGroup& v);
void to_json(json& j, const ScoreCard& v);
void from_json(const json& j, ScoreCard& v);

/// Throws ValidationError naming the first offending field.
void validate(const BenchQuestion& q);

/// One object per line, schema_version stamped. Validates each item first.
std::string serialize_dataset(std::span<const BenchQuestion> items);
std::vector<BenchQuestion> parse_dataset(std::string_view jsonl);

/// Encodes any serializable value as one JSONL line (with trailing newline).
template <typename T>
std::string to_jsonl_line(const T& value) {
    json j = value;
    j["schema_version"] = std::string(kSchemaVersion);
    return j.dump() + "\n";
}

template <typename T>
std::string to_jsonl(std::span<const T> values) {
    std::string out;
    for (const auto& v : values) out += to_jsonl_line(v);
    return out;
}

/// Splits JSONL text into parsed objects, skipping blank lines. Rejects lines
/// whose schema_version is present and not "1".
std::vector<json> parse_jsonl(std::string_view text);

template <typename T>
std::vector<T> parse_jsonl_as(std::string_view text) {
    std::vector<T> out;
    for (const auto& j : parse_jsonl(text)) out.push_back(j.get<T>());
    return out;
}

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace medtrap
