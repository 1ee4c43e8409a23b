/// @file workflow.hpp
/// @brief The generate / answer / evaluate / analyze commands as library calls.
///
/// Every command writes its outputs atomically and records the content
/// digests of its inputs, so a rerun on identical inputs (and cache) produces
/// identical files.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/service/run_config.hpp"

namespace medtrap::service {

struct GenerateOptions {
    std::filesystem::path seeds;
    std::filesystem::path out_dir;  // questions.jsonl and manifest.json
    std::optional<std::vector<TrapKind>> traps;
    std::optional<std::uint64_t> rng_seed;
};

struct GenerateSummary {
    std::size_t seeds = 0;
    std::size_t questions = 0;
    std::size_t unvalidated = 0;
    std::size_t seed_failures = 0;
    std::filesystem::path questions_path;
    std::filesystem::path manifest_path;
};

GenerateSummary run_generate(const RunConfig& cfg, gateway::Gateway& gw, const GenerateOptions& opts);

struct AnswerOptions {
    std::filesystem::path questions;
    std::filesystem::path out;  // answers JSONL; reused for resume
    std::string model_id;
    bool challenge = false;
    bool include_flagged = false;
};

struct AnswerSummary {
    std::size_t answered = 0;      // new answers collected this run
    std::size_t resumed = 0;       // already present in `out`
    std::size_t skipped_flagged = 0;
    std::size_t failed = 0;        // answers recorded as missing
};

/// One answer per selected question. Completed answers already in `out` for
/// the same model are kept and not re-asked; missing ones are retried. New
/// answers are appended as they arrive, then the file is rewritten in
/// question order.
AnswerSummary run_answer(const RunConfig& cfg, gateway::Gateway& gw, const AnswerOptions& opts);

struct EvaluateOptions {
    std::filesystem::path questions;
    std::filesystem::path answers;
    std::filesystem::path out_dir;
    bool challenge = false;
};

/// Writes eval_records.jsonl, prediction_groups.jsonl and scorecards.json
/// (or challenge_records.jsonl and challenge_cards.json in challenge mode).
/// Returns the scorecard document.
nlohmann::json run_evaluate(const RunConfig& cfg, gateway::Gateway& gw, const EvaluateOptions& opts);

enum class SignificanceMetric { Acc, Ver, Help };

struct SignificanceRequest {
    std::filesystem::path records;  // eval_records.jsonl
    std::string model_a;
    std::string model_b;
    SignificanceMetric metric = SignificanceMetric::Acc;
    double fraction = 0.8;
    int runs = 10;
};

struct AnalyzeOptions {
    std::vector<std::pair<double, double>> deltas;  // (static, dynamic)
    std::optional<std::filesystem::path> self_bleu;
    std::optional<std::filesystem::path> ac1;
    std::optional<std::string> ac1_task_kind;
    std::vector<std::string> ac1_categories;
    std::optional<SignificanceRequest> significance;
    std::optional<std::filesystem::path> expression;  // questions JSONL; needs a judge
    std::optional<std::filesystem::path> diagnoses;   // questions JSONL; needs a judge
    std::uint64_t rng_seed = 0;
};

/// Runs each requested statistic. Judge-backed statistics require `cfg` and
/// `gw`. Each entry records the file name and SHA-256 of its input.
nlohmann::json run_analyze(const AnalyzeOptions& opts, const RunConfig* cfg = nullptr, gateway::Gateway* gw = nullptr);

std::optional<SignificanceMetric> parse_significance_metric(const std::string& s);

/// Texts grouped for Self-BLEU: lines with a "texts" array form one group
/// each (named by "group"); question lines group by seed_id.
std::vector<std::pair<std::string, std::vector<std::string>>> read_text_groups(const std::filesystem::path& path);

}  // namespace medtrap::service
