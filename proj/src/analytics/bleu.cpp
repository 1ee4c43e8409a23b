/// @file bleu.cpp

#include "medtrap/analytics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include "medtrap/core/text.hpp"

namespace medtrap::analytics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Tokens& t, std::size_t n) {
    NgramCounts out;
    if (t.size() < n) return out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))];
    return out;
}

bool is_separator(char32_t cp) {
    if (cp < 0x80) {
        const auto c = static_cast<unsigned char>(cp);
        return std::isspace(c) || std::ispunct(c);
    }
    // General punctuation, CJK symbols and full-width forms.
    return (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF00 && cp <= 0xFF0F) ||
           (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65) ||
           cp == 0x00A0;
}

}  // namespace

Tokens bleu_tokenize(std::string_view input) {
    Tokens out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (const char32_t cp : text::utf8_decode(text::to_lower(input))) {
        if (is_separator(cp)) {
            flush();
        } else if (text::is_cjk(cp)) {
            flush();
            out.push_back(text::utf8_encode(cp));
        } else {
            current += text::utf8_encode(cp);
        }
    }
    flush();
    return out;
}

double sentence_bleu(const std::vector<Tokens>& references, const Tokens& hypothesis) {
    if (references.empty()) throw std::invalid_argument("sentence_bleu: no references");
    if (hypothesis.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto hyp = ngrams(hypothesis, n);
        std::size_t total = 0;
        for (const auto& [g, c] : hyp) total += c;
        std::size_t clipped = 0;
        for (const auto& [g, c] : hyp) {
            std::size_t max_ref = 0;
            for (const auto& ref : references) {
                const auto rc = ngrams(ref, n);
                if (const auto it = rc.find(g); it != rc.end()) max_ref = std::max(max_ref, it->second);
            }
            clipped += std::min(c, max_ref);
        }
        const double p = (clipped == 0 || total == 0) ? kBleuEpsilon
                                                      : static_cast<double>(clipped) / static_cast<double>(total);
        log_sum += 0.25 * std::log(p);
    }
    const auto c = static_cast<long>(hypothesis.size());
    long r = static_cast<long>(references.front().size());
    for (const auto& ref : references) {
        const auto len = static_cast<long>(ref.size());
        if (std::labs(len - c) < std::labs(r - c) || (std::labs(len - c) == std::labs(r - c) && len < r)) r = len;
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_sum);
}

double self_bleu(const std::vector<std::string>& texts) {
    if (texts.size() < 2) throw std::invalid_argument("self_bleu: needs at least two texts");
    std::vector<Tokens> tokens;
    for (const auto& t : texts) tokens.push_back(bleu_tokenize(t));
    double sum = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::vector<Tokens> refs;
        for (std::size_t j = 0; j < tokens.size(); ++j) {
            if (j != i) refs.push_back(tokens[j]);
        }
        sum += sentence_bleu(refs, tokens[i]);
    }
    return sum / static_cast<double>(tokens.size());
}

double self_bleu_diversity(const std::vector<std::string>& texts) { return 1.0 - self_bleu(texts); }

}  // namespace medtrap::analytics
