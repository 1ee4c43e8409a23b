/// @file prompt_catalog.cpp

#include "medtrap/gateway/prompt_catalog.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "medtrap/core/digest.hpp"
#include "medtrap/core/serialize.hpp"

namespace medtrap {

namespace {

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

// Calls on_text for literal spans and on_var for placeholder names.
template <typename Text, typename Var>
void scan(const std::string& tmpl, Text on_text, Var on_var) {
    size_t i = 0, literal = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{' && i + 1 < tmpl.size() && ident_start(tmpl[i + 1])) {
            size_t j = i + 1;
            while (j < tmpl.size() && ident_char(tmpl[j])) ++j;
            if (j < tmpl.size() && tmpl[j] == '}') {
                on_text(std::string_view(tmpl).substr(literal, i - literal));
                on_var(tmpl.substr(i + 1, j - i - 1));
                i = literal = j + 1;
                continue;
            }
        }
        ++i;
    }
    on_text(std::string_view(tmpl).substr(literal));
}

std::filesystem::path pick(const std::filesystem::path& root, const std::string& lang, const std::string& file) {
    const auto local = root / lang / file;
    if (std::filesystem::exists(local)) return local;
    return root / "en" / file;
}

}  // namespace

PromptCatalog PromptCatalog::load(const std::filesystem::path& root, const std::string& lang) {
    if (!std::filesystem::is_directory(root)) {
        throw std::runtime_error("prompt catalog directory not found: " + root.string());
    }
    PromptCatalog cat;
    cat.lang_ = lang;
    for (const auto& dir : {root / "en", root / lang}) {
        if (!std::filesystem::is_directory(dir)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.path().extension() != ".txt") continue;
            cat.templates_[entry.path().stem().string()] = read_file(entry.path());
        }
    }
    if (cat.templates_.empty()) throw std::runtime_error("prompt catalog has no templates: " + root.string());

    const auto traps_path = pick(root, lang, "traps.json");
    if (!std::filesystem::exists(traps_path)) {
        throw std::runtime_error("prompt catalog is missing traps.json: " + root.string());
    }
    const auto traps = nlohmann::json::parse(read_file(traps_path));
    for (auto kind : kAllTraps) {
        const auto key = std::string(to_string(kind));
        if (!traps.contains(key)) throw std::runtime_error("traps.json has no entry for " + key);
        const auto& t = traps.at(key);
        cat.traps_[kind] = {t.at("name").get<std::string>(), t.at("description").get<std::string>(),
                            t.at("task").get<std::string>()};
    }

    const auto sev_path = pick(root, lang, "severity.json");
    if (std::filesystem::exists(sev_path)) {
        cat.severity_ = SeverityScale::from_json(nlohmann::json::parse(read_file(sev_path)));
    }
    cat.digest_ = directory_digest(root);
    return cat;
}

std::vector<std::string> PromptCatalog::tags() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : templates_) out.push_back(k);
    return out;
}

const std::string& PromptCatalog::raw(const std::string& tag) const {
    const auto it = templates_.find(tag);
    if (it == templates_.end()) throw std::invalid_argument("no prompt template for tag '" + tag + "'");
    return it->second;
}

std::string PromptCatalog::render(const std::string& tag, const PromptVars& vars) const {
    const auto& tmpl = raw(tag);
    std::string out;
    scan(
        tmpl, [&](std::string_view s) { out.append(s); },
        [&](const std::string& name) {
            const auto it = vars.find(name);
            if (it == vars.end()) {
                throw std::invalid_argument("prompt '" + tag + "': no value for placeholder {" + name + "}");
            }
            out.append(it->second);
        });
    return out;
}

const TrapText& PromptCatalog::trap(TrapKind kind) const { return traps_.at(kind); }

std::vector<std::string> PromptCatalog::placeholders(const std::string& text) {
    std::vector<std::string> out;
    scan(
        text, [](std::string_view) {},
        [&](const std::string& name) {
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        });
    return out;
}

std::filesystem::path default_prompt_dir() {
    if (const char* env = std::getenv("MEDTRAP_PROMPT_DIR"); env != nullptr && *env != '\0') return env;
    return MEDTRAP_PROMPT_DIR;
}

}  // namespace medtrap
