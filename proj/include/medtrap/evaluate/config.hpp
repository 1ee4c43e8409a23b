/// @file config.hpp
/// @brief Evaluation settings.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/types.hpp"
#include "medtrap/gateway/ask.hpp"

namespace medtrap::evaluate {

struct EvalConfig {
    /// Helpfulness weights per criterion; must sum to 1.
    std::map<Criterion, double> weights{
        {Criterion::Evidence, 1.0 / 3.0}, {Criterion::Treatment, 1.0 / 3.0}, {Criterion::Lifestyle, 1.0 / 3.0}};
    int answer_max_tokens = 2048;
    int answer_word_cap = 200;
    /// Expected answers per prediction group (questions per seed).
    int group_size = 4;
    int max_predict = 5;
    std::string challenge_example_description =
        "For the past week I have had a runny nose, sneezing and a scratchy throat, and I feel a little tired.";
    std::vector<std::string> challenge_example_diagnosis{"Common cold", "Allergic rhinitis", "Acute sinusitis",
                                                         "Influenza", "Acute pharyngitis"};
    gateway::CallSettings judge{"judge", 0.0, 1024, 3};
    bool include_flagged = false;
    int workers = 1;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

nlohmann::json to_json(const EvalConfig& cfg);
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});

}  // namespace medtrap::evaluate
