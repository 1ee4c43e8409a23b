/// @file metrics.cpp

#include "medtrap/evaluate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace medtrap::evaluate {

namespace {

std::map<std::string, std::size_t> counts_of(std::span<const std::string> labels) {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    return counts;
}

double sum_c_log_c(const std::map<std::string, std::size_t>& counts) {
    double s = 0.0;
    for (const auto& [label, c] : counts) {
        if (c > 1) s += static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
    return s;
}

}  // namespace

bool rectifies(Stance rumor_stance, Stance fact_stance) {
    return rumor_stance == Stance::Opposes && fact_stance == Stance::Supports;
}

double entropy_bits(std::span<const std::string> labels) {
    if (labels.empty()) return 0.0;
    const auto m = static_cast<double>(labels.size());
    const double h = std::log2(m) - sum_c_log_c(counts_of(labels)) / m;
    return h < 0.0 ? 0.0 : h;
}

double consistency_score(std::span<const std::string> labels) {
    if (labels.empty()) throw std::invalid_argument("consistency_score: empty prediction group");
    if (labels.size() == 1) return 100.0;
    const auto m = static_cast<double>(labels.size());
    return 100.0 * sum_c_log_c(counts_of(labels)) / (m * std::log2(m));
}

double help_value(const HelpScores& h, const std::map<Criterion, double>& weights) {
    const auto w = [&](Criterion c) {
        const auto it = weights.find(c);
        if (it == weights.end()) throw std::invalid_argument("help_value: missing weight");
        return it->second;
    };
    const double we = w(Criterion::Evidence);
    if (we == w(Criterion::Treatment) && we == w(Criterion::Lifestyle)) {
        return static_cast<double>(h.evidence + h.treatment + h.lifestyle) / 3.0;
    }
    return we * h.evidence + w(Criterion::Treatment) * h.treatment + w(Criterion::Lifestyle) * h.lifestyle;
}

double average_of_four(double acc, double ver, double help, double cons) { return (acc + ver + help + cons) / 4.0; }

ScoreCard aggregate(std::vector<EvalRecord> records, std::vector<PredictionGroup> groups,
                    const std::map<Criterion, double>& weights) {
    if (records.empty()) throw std::invalid_argument("aggregate: no evaluation records");
    if (groups.empty()) throw std::invalid_argument("aggregate: no prediction groups");
    const auto& model = records.front().model_id;
    for (const auto& r : records) {
        if (r.model_id != model) throw std::invalid_argument("aggregate: records span several models");
    }
    for (const auto& g : groups) {
        if (g.model_id != model) throw std::invalid_argument("aggregate: groups belong to another model");
    }
    std::sort(records.begin(), records.end(),
              [](const EvalRecord& a, const EvalRecord& b) { return a.question_id < b.question_id; });
    std::sort(groups.begin(), groups.end(),
              [](const PredictionGroup& a, const PredictionGroup& b) { return a.seed_id < b.seed_id; });

    std::size_t top1 = 0;
    std::size_t rectified = 0;
    double help_sum = 0.0;
    for (const auto& r : records) {
        if (r.acc_sub == 100) ++top1;
        if (r.ver_rectified) ++rectified;
        help_sum += help_value(r.help_sub, weights);
    }
    double cons_sum = 0.0;
    for (const auto& g : groups) cons_sum += g.score;

    const auto n = static_cast<double>(records.size());
    ScoreCard card;
    card.model_id = model;
    card.acc = 100.0 * static_cast<double>(top1) / n;
    card.ver = 100.0 * static_cast<double>(rectified) / n;
    card.help = help_sum / n;
    card.cons = cons_sum / static_cast<double>(groups.size());
    card.avg = average_of_four(card.acc, card.ver, card.help, card.cons);
    card.questions = records.size();
    card.groups = groups.size();
    return card;
}

TopKHits topk_hits(const std::vector<bool>& labels) {
    TopKHits h;
    for (std::size_t i = 0; i < labels.size() && i < 5; ++i) {
        if (!labels[i]) continue;
        if (i < 1) h.top1 = true;
        if (i < 3) h.top3 = true;
        h.top5 = true;
    }
    return h;
}

double challenge_score(std::span<const TopKHits> hits) {
    if (hits.empty()) throw std::invalid_argument("challenge_score: no answers");
    double t1 = 0, t3 = 0, t5 = 0;
    for (const auto& h : hits) {
        t1 += h.top1;
        t3 += h.top3;
        t5 += h.top5;
    }
    const auto n = static_cast<double>(hits.size());
    return 100.0 * (t1 / n + t3 / n + t5 / n) / 3.0;
}

}  // namespace medtrap::evaluate
