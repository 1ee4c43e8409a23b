/// @file ask.hpp
/// @brief Small helpers for issuing single-prompt requests through the gateway.

#pragma once

#include <string>

#include "medtrap/gateway/gateway.hpp"

namespace medtrap::gateway {

struct CallSettings {
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;
    int json_attempts = 3;
};

ChatRequest single_turn(const CallSettings& s, std::string tag, std::string prompt);

/// Follow-up turn: replays `prompt` and the previous reply, then adds `note`.
ChatRequest follow_up(const CallSettings& s, std::string tag, std::string prompt, std::string previous_reply,
                      std::string note);

}  // namespace medtrap::gateway
