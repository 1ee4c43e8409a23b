/// @file json_shape.cpp

#include "medtrap/gateway/json_shape.hpp"

namespace medtrap::gateway {

namespace {

std::string_view kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::Any: return "any value";
        case FieldKind::String: return "string";
        case FieldKind::NonEmptyString: return "non-empty string";
        case FieldKind::StringArray: return "array of strings";
        case FieldKind::Array: return "array";
        case FieldKind::Object: return "object";
        case FieldKind::Bool: return "boolean";
        case FieldKind::Number: return "number";
    }
    return "value";
}

bool matches(const nlohmann::json& v, FieldKind k) {
    switch (k) {
        case FieldKind::Any: return true;
        case FieldKind::String: return v.is_string();
        case FieldKind::NonEmptyString: return v.is_string() && !v.get_ref<const std::string&>().empty();
        case FieldKind::StringArray:
            if (!v.is_array()) return false;
            for (const auto& e : v) {
                if (!e.is_string()) return false;
            }
            return true;
        case FieldKind::Array: return v.is_array();
        case FieldKind::Object: return v.is_object();
        case FieldKind::Bool: return v.is_boolean();
        case FieldKind::Number: return v.is_number();
    }
    return false;
}

}  // namespace

JsonShape& JsonShape::require(std::string key, FieldKind kind) {
    fields_.push_back({std::move(key), kind, {}});
    return *this;
}

JsonShape& JsonShape::require_object(std::string key, JsonShape nested) {
    fields_.push_back({std::move(key), FieldKind::Object, {std::move(nested)}});
    return *this;
}

JsonShape& JsonShape::check(std::string description, Check fn) {
    checks_.push_back({std::move(description), std::move(fn)});
    return *this;
}

std::optional<std::string> JsonShape::violation(const nlohmann::json& j) const {
    if (!j.is_object()) return "expected a JSON object";
    for (const auto& f : fields_) {
        const auto it = j.find(f.key);
        if (it == j.end()) return "missing field \"" + f.key + "\"";
        if (!matches(*it, f.kind)) {
            return "field \"" + f.key + "\" must be a " + std::string(kind_name(f.kind));
        }
        if (!f.nested.empty()) {
            if (auto v = f.nested.front().violation(*it)) return "in \"" + f.key + "\": " + *v;
        }
    }
    for (const auto& c : checks_) {
        if (auto v = c.fn(j)) return *v;
    }
    return std::nullopt;
}

std::string JsonShape::describe() const {
    std::string out = "{";
    for (size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + fields_[i].key + "\": ";
        if (!fields_[i].nested.empty()) {
            out += fields_[i].nested.front().describe();
        } else {
            out += "<" + std::string(kind_name(fields_[i].kind)) + ">";
        }
    }
    out += "}";
    for (const auto& c : checks_) out += "; " + c.description;
    return out;
}

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
    // Scan every '{' and try the balanced span that starts there.
    for (size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    auto parsed = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace medtrap::gateway
