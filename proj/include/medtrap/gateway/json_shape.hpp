/// @file json_shape.hpp
/// @brief Field-requirement descriptions for judge replies.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace medtrap::gateway {

enum class FieldKind { Any, String, NonEmptyString, StringArray, Array, Object, Bool, Number };

class JsonShape {
public:
    using Check = std::function<std::optional<std::string>(const nlohmann::json&)>;

    JsonShape& require(std::string key, FieldKind kind);
    JsonShape& require_object(std::string key, JsonShape nested);
    /// Extra whole-object predicate; returns an error message on violation.
    JsonShape& check(std::string description, Check fn);

    /// First violation, or nullopt when `j` satisfies every requirement.
    std::optional<std::string> violation(const nlohmann::json& j) const;

    /// Human-readable summary appended to re-ask prompts.
    std::string describe() const;

private:
    struct Field {
        std::string key;
        FieldKind kind;
        std::vector<JsonShape> nested;  // 0 or 1 element
    };
    struct Predicate {
        std::string description;
        Check fn;
    };
    std::vector<Field> fields_;
    std::vector<Predicate> checks_;
};

/// Pulls the first JSON object out of a model reply, tolerating markdown
/// fences and surrounding prose. Returns nullopt when none parses.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

}  // namespace medtrap::gateway
