/// @file metrics.hpp
/// @brief Pure scoring arithmetic: rectification, consistency, helpfulness,
/// score aggregation and Top-k challenge accuracy.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "medtrap/core/types.hpp"

namespace medtrap::evaluate {

/// A response rectifies a rumor iff it opposes the rumor and supports the fact.
bool rectifies(Stance rumor_stance, Stance fact_stance);

/// Base-2 Shannon entropy of the empirical label distribution.
double entropy_bits(std::span<const std::string> labels);

/// 100·(1 − H/log2 m) for a group of m labels; 100 when m = 1.
/// Computed as 100·Σ c·log2 c / (m·log2 m) so the all-equal and all-distinct
/// cases come out exact. Throws std::invalid_argument on an empty group.
double consistency_score(std::span<const std::string> labels);

/// Weighted helpfulness; the exact arithmetic mean when all weights are equal.
double help_value(const HelpScores& h, const std::map<Criterion, double>& weights);

double average_of_four(double acc, double ver, double help, double cons);

/// Folds one model's records and groups into a ScoreCard. Inputs are sorted
/// by id first so the result does not depend on their order. Throws
/// std::invalid_argument on empty records or groups, or mixed models.
ScoreCard aggregate(std::vector<EvalRecord> records, std::vector<PredictionGroup> groups,
                    const std::map<Criterion, double>& weights);

struct TopKHits {
    bool top1 = false;
    bool top3 = false;
    bool top5 = false;
};

/// Hit flags from per-prediction equivalence labels (rank order).
TopKHits topk_hits(const std::vector<bool>& labels);

/// 100 × mean of the Top-1, Top-3 and Top-5 hit rates.
double challenge_score(std::span<const TopKHits> hits);

}  // namespace medtrap::evaluate
