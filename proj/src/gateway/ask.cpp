/// @file ask.cpp

#include "medtrap/gateway/ask.hpp"

namespace medtrap::gateway {

ChatRequest single_turn(const CallSettings& s, std::string tag, std::string prompt) {
    ChatRequest r;
    r.model_id = s.model_id;
    r.temperature = s.temperature;
    r.max_tokens = s.max_tokens;
    r.tag = std::move(tag);
    r.messages.push_back({"user", std::move(prompt)});
    return r;
}

ChatRequest follow_up(const CallSettings& s, std::string tag, std::string prompt, std::string previous_reply,
                      std::string note) {
    auto r = single_turn(s, std::move(tag), std::move(prompt));
    r.messages.push_back({"assistant", std::move(previous_reply)});
    r.messages.push_back({"user", std::move(note)});
    return r;
}

}  // namespace medtrap::gateway
