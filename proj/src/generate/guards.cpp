/// @file guards.cpp

#include "medtrap/generate/guards.hpp"

#include <algorithm>
#include <cctype>

#include "medtrap/core/text.hpp"

namespace medtrap::generate {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> out;
    std::string w;
    for (const char c : text::to_lower(text)) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '/') {
            w.push_back(c);
        } else if (!w.empty()) {
            out.push_back(std::move(w));
            w.clear();
        }
    }
    if (!w.empty()) out.push_back(std::move(w));
    return out;
}

}  // namespace

std::vector<std::string> check_symptoms(const std::string& text, const SeedCase& seed, const SymptomLexicon& lex) {
    std::vector<std::string> problems;
    std::vector<std::string> allowed;
    for (const auto& s : seed.symptoms) {
        const auto key = text::normalize(s.name);
        std::vector<std::string> forms{s.name};
        if (const auto it = lex.synonyms.find(key); it != lex.synonyms.end()) {
            forms.insert(forms.end(), it->second.begin(), it->second.end());
        }
        for (const auto& f : forms) allowed.push_back(text::normalize(f));
        const bool present =
            std::any_of(forms.begin(), forms.end(), [&](const std::string& f) { return text::contains_ci(text, f); });
        if (!present) problems.push_back("missing symptom: " + s.name);
    }
    for (const auto& h : lex.heldout) {
        const auto key = text::normalize(h);
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
        if (text::contains_word_ci(text, h)) problems.push_back("unseeded symptom: " + h);
    }
    return problems;
}

std::vector<std::string> check_rumor(const std::string& text, const RumorFactPair& pair) {
    std::vector<std::string> problems;
    const auto rumor = text::strip_sentence(pair.rumor);
    const auto fact = text::strip_sentence(pair.fact);
    if (!text::contains_ci(text, rumor)) problems.emplace_back("rumor missing");
    if (!fact.empty() && text::contains_ci(text, fact)) problems.emplace_back("fact leaked");
    return problems;
}

std::vector<std::string> check_persona_leak(const std::string& text, const std::vector<std::string>& terms) {
    std::vector<std::string> problems;
    for (const auto& t : terms) {
        if (!text::trim(t).empty() && text::contains_word_ci(text, t)) problems.push_back("persona leak: " + t);
    }
    return problems;
}

std::vector<std::string> check_severity(const std::string& text, const SeedCase& seed, const SeverityScale& scale) {
    std::vector<std::string> problems;
    for (const auto& s : seed.symptoms) {
        if (!s.severity) continue;
        const auto& word = scale.word_for(*s.severity);
        if (!text::contains_word_ci(text, word) && !text::contains_ci(text, word)) {
            problems.push_back("severity word missing: " + s.name + " (" + word + ")");
        }
    }
    const auto w = words_of(text);
    for (size_t i = 0; i < w.size(); ++i) {
        const auto slash = w[i].find('/');
        if (slash != std::string::npos && all_digits(w[i].substr(0, slash)) && w[i].substr(slash + 1) == "10") {
            problems.push_back("numeric severity: " + w[i]);
            continue;
        }
        if (!all_digits(w[i])) continue;
        const bool out_of_ten = i + 3 < w.size() && w[i + 1] == "out" && w[i + 2] == "of" && w[i + 3] == "10";
        const bool points = i + 1 < w.size() && (w[i + 1] == "points" || w[i + 1] == "point");
        const bool labelled = i > 0 && (w[i - 1] == "severity" || w[i - 1] == "score" || w[i - 1] == "rated" ||
                                        w[i - 1] == "level" || w[i - 1] == "rating");
        const bool labelled_of = i > 1 && w[i - 1] == "of" && (w[i - 2] == "severity" || w[i - 2] == "score");
        if (out_of_ten || points || labelled || labelled_of) problems.push_back("numeric severity: " + w[i]);
    }
    return problems;
}

std::vector<std::string> check_distractor(const std::string& text, const std::string& distractor) {
    if (text::contains_ci(text, distractor)) return {};
    return {"distractor not mentioned: " + distractor};
}

}  // namespace medtrap::generate
