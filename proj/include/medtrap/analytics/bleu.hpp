/// @file bleu.hpp
/// @brief Sentence BLEU and group Self-BLEU diversity.
///
/// BLEU uses n-grams 1..4 with weight 0.25 each, reference counts clipped by
/// the maximum over references, the brevity penalty against the reference
/// length closest to the hypothesis (ties to the shorter), and 1e-9 in place
/// of zero n-gram matches.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medtrap::analytics {

using Tokens = std::vector<std::string>;

inline constexpr double kBleuEpsilon = 1e-9;

/// Lowercases and splits on whitespace and ASCII punctuation. Every CJK code
/// point becomes its own token, so higher-order n-grams cover character
/// bigrams and beyond.
Tokens bleu_tokenize(std::string_view text);

double sentence_bleu(const std::vector<Tokens>& references, const Tokens& hypothesis);

/// Mean BLEU of each text against the other k−1 texts. Requires k >= 2.
double self_bleu(const std::vector<std::string>& texts);

/// 1 − self_bleu.
double self_bleu_diversity(const std::vector<std::string>& texts);

}  // namespace medtrap::analytics
