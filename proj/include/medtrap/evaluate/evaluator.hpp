/// @file evaluator.hpp
/// @brief Answer collection and judge-backed scoring of benchmark questions.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/types.hpp"
#include "medtrap/evaluate/config.hpp"
#include "medtrap/evaluate/metrics.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/gateway/prompt_catalog.hpp"

namespace medtrap::evaluate {

inline constexpr std::string_view kFlagMissingAnswer = "missing-answer";
inline constexpr std::string_view kFlagHelpUnreadable = "help-judge-unreadable";
inline constexpr std::string_view kFlagConsUnreadable = "cons-judge-unreadable";
inline constexpr std::string_view kFlagChallengeUnreadable = "challenge-judge-unreadable";

struct JudgedHelp {
    int acc_sub = 0;
    HelpScores help;
    std::vector<std::string> diagnoses;  // in order of appearance
    std::vector<std::string> rationales;
    std::vector<std::string> flags;

    std::string primary_diagnosis() const { return diagnoses.empty() ? std::string{} : diagnoses.front(); }
};

struct StanceVerdict {
    Stance stance = Stance::Undetermined;
    std::string reason;
    bool readable = true;
};

struct VeracityResult {
    Stance rumor_stance = Stance::Undetermined;
    Stance fact_stance = Stance::Undetermined;
    bool rectified = false;
    std::vector<std::string> rationales;
    std::vector<std::string> flags;
};

struct NormalizedNames {
    std::vector<std::string> names;
    std::vector<std::string> flags;
};

struct ChallengeRecord {
    std::string question_id;
    std::string model_id;
    std::vector<std::string> predictions;
    std::vector<bool> labels;
    TopKHits hits;
    std::vector<std::string> flags;
};

struct ChallengeCard {
    std::string model_id;
    double top1 = 0.0;  // percentages
    double top3 = 0.0;
    double top5 = 0.0;
    double score = 0.0;
    std::size_t questions = 0;
};

struct EvaluationResult {
    std::vector<EvalRecord> records;       // sorted by (model, question id)
    std::vector<PredictionGroup> groups;   // sorted by (model, seed id)
    std::vector<ScoreCard> scorecards;     // sorted by model
};

struct ChallengeResult {
    std::vector<ChallengeRecord> records;
    std::vector<ChallengeCard> cards;
};

nlohmann::json to_json(const ChallengeRecord& r);
nlohmann::json to_json(const ChallengeCard& c);

class Evaluator {
public:
    /// Validates `cfg`; throws ValidationError.
    Evaluator(gateway::Gateway& gw, const PromptCatalog& prompts, EvalConfig cfg);

    const EvalConfig& config() const { return cfg_; }

    /// Asks `model_id` for an answer (or, in challenge mode, a ranked list).
    /// Any failure yields a record with missing = true and the error text.
    ModelAnswer collect_answer(const std::string& model_id, const BenchQuestion& q, bool challenge = false) const;

    /// Rubric judge. Requires non-empty score-points for every criterion.
    /// A missing answer scores zero without a judge call.
    JudgedHelp judge_help_and_acc(const ModelAnswer& answer, const BenchQuestion& q) const;

    /// Three-way stance of `answer_text` towards `statement`; unreadable
    /// judge output counts as Undetermined. Both inputs must be non-empty.
    Stance classify_stance(const std::string& statement, const std::string& answer_text) const;
    StanceVerdict classify_stance_detailed(const std::string& statement, const std::string& answer_text) const;

    /// Requires pair.valid. Missing answers are never rectifying.
    VeracityResult veracity(const ModelAnswer& answer, const RumorFactPair& pair) const;
    bool veracity_indicator(const ModelAnswer& answer, const RumorFactPair& pair) const;

    /// Canonical names, same length as `raw` (non-empty). Inputs equal after
    /// case/space folding always map to the same name. Judge failure returns
    /// the inputs unchanged with a flag.
    NormalizedNames normalize_diagnoses(const std::vector<std::string>& raw) const;

    EvalRecord evaluate_answer(const ModelAnswer& answer, const BenchQuestion& q) const;

    /// Scores every answer against its question. Answers naming unknown
    /// question ids raise ValidationError listing them. Questions lacking an
    /// answer for a model score as missing. Flagged questions are skipped
    /// unless include_flagged is set.
    EvaluationResult evaluate(const std::vector<BenchQuestion>& questions,
                              const std::vector<ModelAnswer>& answers) const;

    /// Equivalence labels for each prediction against `truth`; failure or an
    /// empty label list gives all-false.
    std::vector<bool> judge_challenge(const std::string& truth, const std::vector<std::string>& predictions,
                                      std::vector<std::string>* flags = nullptr) const;

    ChallengeResult challenge_accuracy(const std::vector<BenchQuestion>& questions,
                                       const std::vector<ModelAnswer>& answers) const;

private:
    std::vector<const BenchQuestion*> scored_questions(const std::vector<BenchQuestion>& questions,
                                                       const std::vector<ModelAnswer>& answers) const;
    template <typename Fn>
    void parallel_for(std::size_t n, Fn&& fn) const;

    gateway::Gateway& gw_;
    const PromptCatalog& prompts_;
    EvalConfig cfg_;
};

}  // namespace medtrap::evaluate
