#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "medtrap/core/digest.hpp"
#include "medtrap/core/serialize.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/gateway/http_backend.hpp"
#include "medtrap/gateway/scripted_backend.hpp"

using namespace medtrap::gateway;
using nlohmann::json;

namespace {

ChatRequest make_request(std::string tag, std::string content, double temperature = 0.0) {
    ChatRequest r;
    r.model_id = "m1";
    r.tag = std::move(tag);
    r.temperature = temperature;
    r.messages = {{"user", std::move(content)}};
    return r;
}

class CountingBackend : public Backend {
public:
    ChatResponse send(const ChatRequest& req) override {
        ++calls;
        return {"reply to " + req.messages.back().content, FinishReason::Complete, {1, 2}};
    }
    std::atomic<int> calls{0};
};

class FlakyBackend : public Backend {
public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    ChatResponse send(const ChatRequest&) override {
        if (calls++ < failures_) throw TransportError("down");
        return {"ok", FinishReason::Complete, {}};
    }
    int calls = 0;

private:
    int failures_;
};

struct TempDir {
    TempDir() : path(std::filesystem::temp_directory_path() / ("medtrap_gw_" + std::to_string(::getpid()) + "_" +
                                                              std::to_string(counter++))) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::filesystem::path path;
    static inline int counter = 0;
};

GatewayOptions fast_options(std::optional<std::filesystem::path> cache = std::nullopt) {
    GatewayOptions o;
    o.cache_dir = std::move(cache);
    o.retry.base_delay = std::chrono::milliseconds(1);
    return o;
}

}  // namespace

TEST(ChatRequest, Validation) {
    auto r = make_request("t", "hi");
    EXPECT_NO_THROW(r.validate());
    r.temperature = 2.5;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r.temperature = -0.1;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r.temperature = 0.7;
    r.messages.clear();
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r = make_request("t", "hi");
    r.max_tokens = 0;
    EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(CacheKey, TemperatureChangesKey) {
    const auto a = make_request("t", "same", 0.7);
    const auto b = make_request("t", "same", 0.0);
    // Independent recomputation of both key tuples.
    const auto tuple = [](const ChatRequest& r) {
        json j{{"model", r.model_id}, {"messages", json::array()}, {"temperature", r.temperature},
               {"max_tokens", r.max_tokens}};
        for (const auto& m : r.messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
        return medtrap::sha256_hex(j.dump());
    };
    EXPECT_EQ(cache_key(a), tuple(a));
    EXPECT_EQ(cache_key(b), tuple(b));
    EXPECT_NE(cache_key(a), cache_key(b));
}

TEST(CacheKey, TagIsNotPartOfKey) {
    EXPECT_EQ(cache_key(make_request("x", "c")), cache_key(make_request("y", "c")));
}

TEST(Gateway, SecondIdenticalCallServedFromCache) {
    TempDir dir;
    Gateway gw(fast_options(dir.path));
    auto backend = std::make_shared<CountingBackend>();
    gw.register_backend("m1", backend);
    const auto req = make_request("t", "hello");
    const auto first = gw.complete(req);
    const auto second = gw.complete(req);
    EXPECT_EQ(first, second);
    EXPECT_EQ(backend->calls.load(), 1);
    EXPECT_EQ(gw.stats().cache_hits, 1u);
}

TEST(Gateway, CacheSurvivesNewGatewayAndStoresAuditMetadata) {
    TempDir dir;
    const auto req = make_request("raw", "persist me");
    {
        Gateway gw(fast_options(dir.path));
        gw.register_backend("m1", std::make_shared<CountingBackend>());
        gw.complete(req);
    }
    Gateway gw(fast_options(dir.path));
    auto backend = std::make_shared<CountingBackend>();
    gw.register_backend("m1", backend);
    EXPECT_EQ(gw.complete(req).text, "reply to persist me");
    EXPECT_EQ(backend->calls.load(), 0);
    const auto key = cache_key(req);
    const auto entry = json::parse(medtrap::read_file(dir.path / key.substr(0, 2) / (key + ".json")));
    EXPECT_EQ(entry.at("tag"), "raw");
    EXPECT_EQ(entry.at("request").at("model"), "m1");
}

// For any request, n calls yield n identical responses and at most one backend call.
TEST(GatewayProperty, CacheIdempotence) {
    TempDir dir;
    Gateway gw(fast_options(dir.path));
    auto backend = std::make_shared<CountingBackend>();
    gw.register_backend("*", backend);
    for (int r = 0; r < 20; ++r) {
        const auto req = make_request("t", "prompt " + std::to_string(r), (r % 3) * 0.5);
        const int before = backend->calls.load();
        const auto first = gw.complete(req);
        for (int n = 0; n < 1 + r % 5; ++n) EXPECT_EQ(gw.complete(req), first);
        EXPECT_EQ(backend->calls.load() - before, 1);
    }
}

TEST(Gateway, ConcurrentCallsAreSafe) {
    TempDir dir;
    auto opts = fast_options(dir.path);
    opts.max_in_flight = 2;
    Gateway gw(opts);
    auto backend = std::make_shared<CountingBackend>();
    gw.register_backend("m1", backend);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&gw, t] {
            for (int i = 0; i < 20; ++i) gw.complete(make_request("t", "p" + std::to_string((t * 20 + i) % 10)));
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(gw.stats().requests, 160u);
    EXPECT_LE(backend->calls.load(), 160);
    EXPECT_GE(backend->calls.load(), 10);
}

TEST(Gateway, UnknownModel) {
    Gateway gw(fast_options());
    EXPECT_THROW(gw.complete(make_request("t", "x")), UnknownModelError);
}

TEST(Gateway, TransportRetriesThenSucceeds) {
    Gateway gw(fast_options());
    auto backend = std::make_shared<FlakyBackend>(2);
    gw.register_backend("m1", backend);
    EXPECT_EQ(gw.complete(make_request("t", "x")).text, "ok");
    EXPECT_EQ(backend->calls, 3);
    EXPECT_EQ(gw.stats().transport_retries, 2u);
}

TEST(Gateway, TransportFailureAfterBoundedRetries) {
    Gateway gw(fast_options());
    auto backend = std::make_shared<FlakyBackend>(100);
    gw.register_backend("m1", backend);
    EXPECT_THROW(gw.complete(make_request("t", "x")), TransportError);
    EXPECT_EQ(backend->calls, 4);  // one try plus three retries
}

TEST(Scripted, ResponseEqualsFixtureVerbatim) {
    Gateway gw(fast_options());
    gw.register_backend("*", std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(
                                 json::parse(R"({"rules":[{"tag":"raw","response":"  exact text\n"}]})"))));
    EXPECT_EQ(gw.complete(make_request("raw", "anything")).text, "  exact text\n");
}

TEST(Scripted, FirstSingleShotThenFallThrough) {
    auto backend = ScriptedBackend::from_json(json::parse(R"([
        {"tag":"t","response":"first","times":1},
        {"tag":"t","response":"second"}])"));
    EXPECT_EQ(backend.send(make_request("t", "a")).text, "first");
    EXPECT_EQ(backend.send(make_request("t", "a")).text, "second");
    EXPECT_EQ(backend.send(make_request("t", "a")).text, "second");
    EXPECT_EQ(backend.fired(0), 1u);
    EXPECT_EQ(backend.fired(1), 2u);
}

TEST(Scripted, UnmatchedTagNamed) {
    auto backend = ScriptedBackend::from_json(json::parse(R"([{"tag":"validate","response":"{}"}])"));
    try {
        backend.send(make_request("refine", "a"));
        FAIL();
    } catch (const UnmatchedPromptError& e) {
        EXPECT_NE(std::string(e.what()).find("refine"), std::string::npos);
    }
}

TEST(Scripted, ContainsModelAndCaptures) {
    auto backend = ScriptedBackend::from_json(json::parse(R"([
        {"tag":"t","model":"other","response":"wrong model"},
        {"tag":"t","contains":["needle"],"captures":["Question: "],
         "response":{"echo":"{{1}}","n":1}},
        {"tag":"t","captures":["Question: "],"response":"raw={{raw:1}} missing={{2}}"}])"));
    const auto r1 = backend.send(make_request("t", "needle\nQuestion: say \"hi\"\nrest"));
    EXPECT_EQ(json::parse(r1.text).at("echo"), "say \"hi\"");
    const auto r2 = backend.send(make_request("t", "Question: plain"));
    EXPECT_EQ(r2.text, "raw=plain missing={{2}}");
}

TEST(Scripted, SimulatedTransportError) {
    auto backend = ScriptedBackend::from_json(json::parse(R"([{"tag":"t","transport_error":true,"times":1},
                                                              {"tag":"t","response":"after"}])"));
    Gateway gw(fast_options());
    gw.register_backend("*", std::make_shared<ScriptedBackend>(std::move(backend)));
    EXPECT_EQ(gw.complete(make_request("t", "x")).text, "after");
}

TEST(Scripted, RejectsRuleWithoutResponse) {
    EXPECT_THROW(ScriptedBackend::from_json(json::parse(R"([{"tag":"t"}])")), std::invalid_argument);
}

// Same fixtures, same request sequence: same bytes.
TEST(ScriptedProperty, BitReproducible) {
    const auto fixtures = json::parse(R"([
        {"tag":"a","response":"A1","times":2},{"tag":"a","response":"A2"},
        {"tag":"b","captures":["x="],"response":"{{1}}!"}])");
    const auto run = [&] {
        auto backend = ScriptedBackend::from_json(fixtures);
        std::string out;
        for (int i = 0; i < 10; ++i) {
            out += backend.send(make_request(i % 2 ? "a" : "b", "x=" + std::to_string(i))).text + "|";
        }
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(CompleteJson, ParsesDiagnosesList) {
    Gateway gw(fast_options());
    gw.register_backend("*", std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(
                                 json::parse(R"([{"tag":"d","response":{"diagnoses":["A"]}}])"))));
    const auto shape = JsonShape().require("diagnoses", FieldKind::StringArray);
    const auto j = gw.complete_json(make_request("d", "q"), shape, 1);
    EXPECT_EQ(j.at("diagnoses").get<std::vector<std::string>>(), std::vector<std::string>{"A"});
}

TEST(CompleteJson, GarbageThenValidSucceedsOnSecondAttempt) {
    auto scripted = std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(json::parse(R"([
        {"tag":"d","response":"not json at all","times":1},
        {"tag":"d","contains":["could not be used"],"response":"```json\n{\"diagnoses\":[\"B\"]}\n```"}])")));
    Gateway gw(fast_options());
    gw.register_backend("*", scripted);
    const auto shape = JsonShape().require("diagnoses", FieldKind::StringArray);
    const auto j = gw.complete_json(make_request("d", "q"), shape, 2);
    EXPECT_EQ(j.at("diagnoses")[0], "B");
    EXPECT_EQ(scripted->invocations(), 2u);
}

TEST(CompleteJson, AllGarbageFailsWithEveryAttempt) {
    Gateway gw(fast_options());
    gw.register_backend("*", std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(
                                 json::parse(R"([{"tag":"d","response":"{\"other\": 1}"}])"))));
    const auto shape = JsonShape().require("diagnoses", FieldKind::StringArray);
    try {
        gw.complete_json(make_request("d", "q"), shape, 3);
        FAIL();
    } catch (const JsonShapeFailure& e) {
        EXPECT_EQ(e.attempts().size(), 3u);
        EXPECT_NE(std::string(e.what()).find("diagnoses"), std::string::npos);
    }
    EXPECT_THROW(gw.complete_json(make_request("d", "q"), shape, 0), std::invalid_argument);
}

// Whatever complete_json returns satisfies the declared shape.
TEST(CompleteJsonProperty, NoPartiallyValidValueEscapes) {
    const std::vector<std::string> replies{
        R"({"a":"x","b":[1]})", R"({"a":"","b":[]})", R"({"a":"x"})", R"({"b":[]})", "[1,2]", "{", R"({"a":1,"b":[]})",
        R"(prefix {"a":"y","b":["z"]} suffix)"};
    const auto shape = JsonShape().require("a", FieldKind::NonEmptyString).require("b", FieldKind::Array);
    for (size_t i = 0; i < replies.size(); ++i) {
        for (size_t k = 0; k < replies.size(); ++k) {
            json rules = json::array({{{"tag", "s"}, {"response", replies[i]}, {"times", 1}},
                                      {{"tag", "s"}, {"response", replies[k]}}});
            Gateway gw(fast_options());
            gw.register_backend("*", std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(rules)));
            try {
                const auto j = gw.complete_json(make_request("s", "q"), shape, 2);
                EXPECT_FALSE(shape.violation(j).has_value()) << j.dump();
            } catch (const JsonShapeFailure& e) {
                EXPECT_EQ(e.attempts().size(), 2u);
            }
        }
    }
}

TEST(ExtractJson, HandlesFencesProseAndBracesInStrings) {
    EXPECT_EQ(extract_json_object("Sure! {\"a\": \"}{\"} done")->at("a"), "}{");
    EXPECT_EQ(extract_json_object("{bad} then {\"ok\":true}")->at("ok"), true);
    EXPECT_FALSE(extract_json_object("no braces").has_value());
}

TEST(HttpBackend, RoundTripAgainstLocalServer) {
    httplib::Server server;
    std::string seen_auth;
    json seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        const json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}},
                                          {"finish_reason", "stop"}}}},
                            {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 1}}}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/busy/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server.Post("/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const auto base = "http://127.0.0.1:" + std::to_string(port);
    HttpBackend backend({base + "/v1", "secret", std::chrono::seconds(5)});
    const auto resp = backend.send(make_request("t", "ping", 0.7));
    EXPECT_EQ(resp.text, "pong");
    EXPECT_EQ(resp.finish_reason, FinishReason::Complete);
    EXPECT_EQ(resp.usage.prompt, 3);
    EXPECT_EQ(seen_auth, "Bearer secret");
    EXPECT_EQ(seen_body.at("model"), "m1");
    EXPECT_DOUBLE_EQ(seen_body.at("temperature").get<double>(), 0.7);

    HttpBackend busy({base + "/busy", "", std::chrono::seconds(5)});
    EXPECT_THROW(busy.send(make_request("t", "x")), TransportError);
    HttpBackend bad({base + "/bad", "", std::chrono::seconds(5)});
    EXPECT_THROW(bad.send(make_request("t", "x")), std::runtime_error);

    server.stop();
    th.join();

    HttpBackend down({base + "/v1", "", std::chrono::seconds(1)});
    EXPECT_THROW(down.send(make_request("t", "x")), TransportError);
}
