/// @file knowledge_base.cpp

#include "medtrap/knowledge/knowledge_base.hpp"

#include <algorithm>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"

namespace medtrap::knowledge {

std::string KnowledgeBase::key_for(const std::string& name) {
    std::string s = name;
    std::replace(s.begin(), s.end(), '_', ' ');
    return text::normalize(s);
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("knowledge directory not found: " + dir.string());
    }
    KnowledgeBase kb;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        kb.add(entry.path().stem().string(), read_file(entry.path()));
    }
    return kb;
}

void KnowledgeBase::add(const std::string& name, std::string article) {
    articles_[key_for(name)] = std::move(article);
}

std::string KnowledgeBase::lookup(const std::string& name) const {
    const auto key = key_for(name);
    if (key.empty()) return {};
    if (const auto it = articles_.find(key); it != articles_.end()) return it->second;

    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [k, article] : articles_) {
        const bool related = k.find(key) != std::string::npos || key.find(k) != std::string::npos;
        if (related && k.size() > best_len) {
            best = &article;
            best_len = k.size();
        }
    }
    return best ? *best : std::string{};
}

}  // namespace medtrap::knowledge
