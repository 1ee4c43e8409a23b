/// @file test_generate.cpp

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "medtrap/core/rng.hpp"
#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include "medtrap/generate/generator.hpp"
#include "test_support.hpp"

namespace medtrap {
namespace {

using generate::CandidateBundle;
using generate::GenConfig;
using generate::GenMode;
using generate::Generator;
using generate::PersonaDescriptor;
using nlohmann::json;
using tsupport::ScriptedGateway;

json verdicts(bool challenge, bool rationality = true) {
    auto dim = [](bool pass, const char* why) { return json{{"assessment", why}, {"verify_result", pass ? "Pass" : "Fail"}}; };
    return json{{"challenge", dim(challenge, challenge ? "subtle" : "the trap is too obvious")},
                {"rationality", dim(rationality, rationality ? "sound" : "extra symptom")},
                {"trap_integrity", dim(true, "present")},
                {"style_consistency", dim(true, "fits")},
                {"misleading_embedding", dim(true, "natural")}};
}

json default_rules() {
    return json::array({
        {{"tag", "raw"},
         {"response",
          {{"description", "I have a severe headache and some mild nausea that started three days ago."},
           {"question", "What could this be?"}}}},
        {{"tag", "differential"},
         {"response",
          {{"root_diagnosis", {{"name", "Migraine"}, {"symptoms", {"headache"}}}},
           {"similar_diagnoses",
            {{{"name", "Tension headache"}, {"symptoms", {"headache", "neck stiffness"}}},
             {{"name", "Sinusitis"}, {"symptoms", {"facial pain"}}},
             {{"name", "Cluster headache"}, {"symptoms", {"eye pain"}}}}}}}},
        {{"tag", "rumor"},
         {"captures", {"Symptom: "}},
         {"response",
          {{"statement_pairs",
            {{{"incorrect_statement", "{{1}} always goes away if you drink strong coffee."},
              {"correct_statement", "Coffee does not reliably relieve {{1}}."}},
             {{"incorrect_statement", "{{1}} is always caused by drinking cold water."},
              {"correct_statement", "Cold water is not a recognised cause of {{1}}."}}}}}}},
        {{"tag", "rumor_check"}, {"contains", "coffee"}, {"response", {{"verdict", "Invalid"}}}},
        {{"tag", "rumor_check"}, {"response", {{"verdict", "Valid"}}}},
        {{"tag", "trap"},
         {"captures", {"Original question: ", "Distractor diagnosis: "}},
         {"response", {{"TrapQuestion", "{{1}} I am fairly sure this is {{2}}."}}}},
        {{"tag", "persona_extract"},
         {"response", {{"medical_knowledge", "Low"}, {"clarity", "High"}, {"communication_style", "Direct"}}}},
        {{"tag", "style"}, {"captures", {"Original question: "}}, {"response", {{"PolishedPatientQuestion", "{{1}}"}}}},
        {{"tag", "rumor_insert"},
         {"captures", {"Original question: ", "Claim to embed: "}},
         {"response", {{"RumoredQuestion", "{{1}} I heard that {{2}}"}}}},
        {{"tag", "verify"}, {"response", verdicts(true)}},
        {{"tag", "optimize"},
         {"captures", {"Current question: "}},
         {"response", {{"gradient_explanation", "made the trap subtler"}, {"refined_question", "{{1}} Please help."}}}},
        {{"tag", "evidence"}, {"response", {{"diagnosis_evidences", {"throbbing pain", "nausea", "photophobia"}}}}},
        {{"tag", "treatment"}, {"response", {{"treatment_suggestions", {"triptans", "NSAIDs", "antiemetics"}}}}},
        {{"tag", "lifestyle"}, {"response", {{"lifestyle_suggestions", {"sleep", "hydration", "trigger diary"}}}}},
    });
}

/// Override rules take precedence over the defaults.
json rules_with(std::initializer_list<json> overrides) {
    json out = json::array();
    for (const auto& r : overrides) out.push_back(r);
    for (const auto& r : default_rules()) out.push_back(r);
    return out;
}

SeedCase migraine_seed(std::string id = "s1") {
    SeedCase s;
    s.id = std::move(id);
    s.symptoms = {{"headache", 8, std::string("3 days"), std::nullopt, std::nullopt},
                  {"nausea", 2, std::nullopt, std::nullopt, std::nullopt}};
    s.true_diagnosis = "Migraine";
    s.medical_entity = "headache";
    return s;
}

GenConfig test_config() {
    GenConfig c;
    c.rumor_pool_size = 2;
    c.persona_pool = {{"mason", "Mason, limited medical knowledge", std::nullopt}};
    return c;
}

struct Harness {
    explicit Harness(json rules, GenConfig cfg = test_config())
        : sg(rules), gen(*sg.gw, tsupport::catalog(), kb, std::move(cfg)) {}
    knowledge::KnowledgeBase kb;
    ScriptedGateway sg;
    Generator gen;

    std::vector<std::string> prompts_for(const std::string& tag) const {
        std::vector<std::string> out;
        for (const auto& r : sg.backend->requests()) {
            if (r.tag == tag) out.push_back(r.messages.front().content);
        }
        return out;
    }
    size_t calls(const std::string& tag) const { return prompts_for(tag).size(); }
};

CandidateBundle bundle_for(const std::string& question) {
    CandidateBundle b;
    b.seed = migraine_seed();
    b.question = question;
    b.trapped_question = "trapped";
    b.trap = TrapKind::DistractingHistory;
    b.distractor = {"Sinusitis", {"facial pain"}};
    b.persona = {"mason", "Mason, limited medical knowledge", std::nullopt};
    b.rumor = {"headache", "headache is always caused by drinking cold water.",
               "Cold water is not a recognised cause of headache.", true};
    return b;
}

const std::string kGoodQuestion =
    "I have a severe headache and mild nausea. I heard that headache is always caused by drinking cold water.";

// ---------------------------------------------------------------- config

TEST(GenConfig, DefaultsValidate) {
    GenConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.max_refine_iterations, 3);
    EXPECT_EQ(c.eta_schedule, (std::vector<double>{0.3, 0.6, 0.9}));
    EXPECT_EQ(c.scorepoint_count, 3);
    EXPECT_EQ(c.rumor_pool_size, 10);
    EXPECT_EQ(c.traps.size(), 4u);
}

TEST(GenConfig, RejectsBadValues) {
    auto expect_bad = [](auto mutate, const std::string& field) {
        GenConfig c;
        mutate(c);
        try {
            c.validate();
            FAIL() << "expected failure for " << field;
        } catch (const ValidationError& e) {
            EXPECT_EQ(std::string(e.what()).rfind(field, 0), 0u) << e.what();
        }
    };
    expect_bad([](GenConfig& c) { c.eta_schedule = {0.3, 1.2, 0.9}; }, "eta_schedule");
    expect_bad([](GenConfig& c) { c.eta_schedule = {0.3, 0.6}; }, "eta_schedule");
    expect_bad([](GenConfig& c) { c.traps.clear(); }, "traps");
    expect_bad([](GenConfig& c) { c.rumor_pool_size = 11; }, "rumor_pool_size");
    expect_bad([](GenConfig& c) { c.max_refine_iterations = 0; }, "max_refine_iterations");
    expect_bad([](GenConfig& c) { c.workers = 0; }, "workers");
}

TEST(GenConfig, FromJsonAndDigest) {
    const auto c = generate::gen_config_from_json(
        json{{"traps", {"self-diagnosis", "ExternalNoise"}},
             {"mode", "challenge"},
             {"rng_seed", 42},
             {"persona_pool", {"a retired miner", {{"id", "p2"}, {"description", "x"}, {"identity_terms", {"nurse"}}}}}});
    EXPECT_EQ(c.traps, (std::vector<TrapKind>{TrapKind::SelfDiagnosis, TrapKind::ExternalNoise}));
    EXPECT_EQ(c.mode, GenMode::Challenge);
    ASSERT_EQ(c.persona_pool.size(), 2u);
    EXPECT_EQ(c.persona_pool[0].id, "persona-0");
    EXPECT_EQ(c.persona_pool[1].leak_terms(), std::vector<std::string>{"nurse"});

    auto d = c;
    EXPECT_EQ(generate::config_digest(c), generate::config_digest(d));
    d.rng_seed = 43;
    EXPECT_NE(generate::config_digest(c), generate::config_digest(d));

    EXPECT_THROW(generate::gen_config_from_json(json{{"traps", {"bogus"}}}), ValidationError);
    EXPECT_THROW(generate::gen_config_from_json(json{{"mode", "both"}}), ValidationError);
}

TEST(PersonaDescriptor, DerivedLeakTermsDropStyleVocabulary) {
    const PersonaDescriptor p{"x", "Mason, limited medical knowledge", std::nullopt};
    EXPECT_EQ(p.leak_terms(), std::vector<std::string>{"mason"});
    const PersonaDescriptor q{"y", "A retired coal miner who speaks plainly", std::nullopt};
    EXPECT_EQ(q.leak_terms(), (std::vector<std::string>{"retired", "coal", "miner", "plainly"}));
    const PersonaDescriptor r{"z", "Mason", std::vector<std::string>{}};
    EXPECT_TRUE(r.leak_terms().empty());
}

// ---------------------------------------------------------------- guards

TEST(Guards, SymptomContainment) {
    const auto seed = migraine_seed();
    generate::SymptomLexicon lex;
    EXPECT_TRUE(generate::check_symptoms("Severe HEADACHE and  nausea.", seed, lex).empty());
    EXPECT_EQ(generate::check_symptoms("A severe headache.", seed, lex),
              std::vector<std::string>{"missing symptom: nausea"});
    lex.synonyms["nausea"] = {"queasy"};
    EXPECT_TRUE(generate::check_symptoms("A headache and I feel queasy.", seed, lex).empty());
    lex.heldout = {"fever", "nausea"};
    EXPECT_EQ(generate::check_symptoms("A headache, nausea and a fever.", seed, lex),
              std::vector<std::string>{"unseeded symptom: fever"});
    EXPECT_TRUE(generate::check_symptoms("A headache, nausea and feverish thoughts.", seed, lex).empty());
}

TEST(Guards, RumorPresentFactAbsent) {
    const RumorFactPair p{"headache", "Headache always goes away with coffee.", "Coffee does not cure headache.", true};
    EXPECT_TRUE(generate::check_rumor("I read that headache always goes away with coffee, is that true?", p).empty());
    EXPECT_EQ(generate::check_rumor("I have a headache.", p), std::vector<std::string>{"rumor missing"});
    EXPECT_EQ(generate::check_rumor("Headache always goes away with coffee. Coffee does not cure headache!", p),
              std::vector<std::string>{"fact leaked"});
}

TEST(Guards, PersonaLeakWholeWords) {
    EXPECT_EQ(generate::check_persona_leak("As a Mason I wonder", {"mason"}),
              std::vector<std::string>{"persona leak: mason"});
    EXPECT_TRUE(generate::check_persona_leak("masonry dust", {"mason"}).empty());
}

TEST(Guards, SeverityWordsNotNumbers) {
    const auto seed = migraine_seed();
    const auto scale = SeverityScale::english();
    EXPECT_TRUE(generate::check_severity("A severe headache for 3 days and mild nausea.", seed, scale).empty());
    for (const char* bad : {"A severe headache, 8/10, mild nausea.", "A severe headache (8 out of 10), mild nausea.",
                            "Severe headache, severity 8, mild nausea.", "Severe headache rated 8, mild nausea.",
                            "Severe headache worth 8 points, mild nausea.", "Severe headache, severity of 8, mild nausea."}) {
        EXPECT_FALSE(generate::check_severity(bad, seed, scale).empty()) << bad;
    }
    EXPECT_EQ(generate::check_severity("A headache and mild nausea.", seed, scale),
              std::vector<std::string>{"severity word missing: headache (severe)"});
}

// ---------------------------------------------------------------- sampling

TEST(Sampling, BenchmarkModeYieldsEveryTrapOnce) {
    Rng rng(7);
    std::vector<TrapKind> traps(kAllTraps.begin(), kAllTraps.end());
    const auto draws = generate::sample_trap_and_distractor(traps, GenMode::Benchmark, 3, rng);
    ASSERT_EQ(draws.size(), 4u);
    for (size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(draws[i].trap, traps[i]);
        EXPECT_LT(draws[i].distractor_index, 3u);
    }
    EXPECT_THROW(generate::sample_trap_and_distractor(traps, GenMode::Benchmark, 0, rng), std::invalid_argument);
    EXPECT_THROW(generate::sample_trap_and_distractor({}, GenMode::Benchmark, 3, rng), std::invalid_argument);
}

double chi_square(const std::vector<int>& counts) {
    double total = 0;
    for (int c : counts) total += c;
    const double expected = total / static_cast<double>(counts.size());
    double x = 0;
    for (int c : counts) x += (c - expected) * (c - expected) / expected;
    return x;
}

TEST(Sampling, ChallengeModeIsUniform) {
    Rng rng(2024);
    std::vector<TrapKind> traps(kAllTraps.begin(), kAllTraps.end());
    std::vector<int> trap_counts(4, 0);
    std::vector<int> distractor_counts(5, 0);
    for (int i = 0; i < 4000; ++i) {
        const auto d = generate::sample_trap_and_distractor(traps, GenMode::Challenge, 5, rng);
        ASSERT_EQ(d.size(), 1u);
        ++trap_counts[static_cast<size_t>(d[0].trap)];
        ++distractor_counts[d[0].distractor_index];
    }
    // Upper 0.001 quantiles of chi-square with 3 and 4 degrees of freedom.
    EXPECT_LT(chi_square(trap_counts), 16.266);
    EXPECT_LT(chi_square(distractor_counts), 18.467);
}

TEST(Sampling, SameSeedSameDraws) {
    std::vector<TrapKind> traps(kAllTraps.begin(), kAllTraps.end());
    auto a = Rng::derive(5, "seed-a");
    auto b = Rng::derive(5, "seed-a");
    for (int i = 0; i < 50; ++i) {
        const auto x = generate::sample_trap_and_distractor(traps, GenMode::Challenge, 7, a);
        const auto y = generate::sample_trap_and_distractor(traps, GenMode::Challenge, 7, b);
        EXPECT_EQ(x[0].trap, y[0].trap);
        EXPECT_EQ(x[0].distractor_index, y[0].distractor_index);
    }
}

TEST(Refinement, InstructionBandsAndEtaFormat) {
    EXPECT_EQ(generate::format_eta(0.3), "0.3");
    EXPECT_EQ(generate::format_eta(1.0), "1");
    EXPECT_NE(generate::refinement_instruction(0.3), generate::refinement_instruction(0.6));
    EXPECT_NE(generate::refinement_instruction(0.6), generate::refinement_instruction(0.9));
    EXPECT_EQ(generate::refinement_instruction(0.0), generate::refinement_instruction(0.3));
    EXPECT_EQ(generate::refinement_instruction(0.9), generate::refinement_instruction(1.0));
}

// ---------------------------------------------------------------- stages

TEST(RawStage, SeverityBecomesWordsInPrompt) {
    Harness h(default_rules());
    const auto out = h.gen.synthesize_raw_question(migraine_seed());
    EXPECT_TRUE(out.flags.empty());
    EXPECT_EQ(out.text, "I have a severe headache and some mild nausea that started three days ago. What could this be?");
    const auto prompts = h.prompts_for("raw");
    ASSERT_EQ(prompts.size(), 1u);
    EXPECT_NE(prompts[0].find("- headache; severity: severe; duration: 3 days"), std::string::npos);
    EXPECT_NE(prompts[0].find("- nausea; severity: mild"), std::string::npos);
    EXPECT_EQ(prompts[0].find("severity: 8"), std::string::npos);
}

TEST(RawStage, MissingSymptomReaskedOnceThenFlagged) {
    const json dropped{{"description", "I have a severe headache."}, {"question", "Why?"}};
    {
        Harness h(rules_with({{{"tag", "raw"}, {"response", dropped}, {"times", 1}}}));
        const auto out = h.gen.synthesize_raw_question(migraine_seed());
        EXPECT_TRUE(out.flags.empty());
        EXPECT_EQ(h.calls("raw"), 2u);
        const auto req = h.sg.backend->requests().back();
        ASSERT_EQ(req.messages.size(), 3u);
        EXPECT_NE(req.messages[2].content.find("missing symptom: nausea"), std::string::npos);
    }
    {
        Harness h(rules_with({{{"tag", "raw"}, {"response", dropped}}}));
        const auto out = h.gen.synthesize_raw_question(migraine_seed());
        EXPECT_EQ(h.calls("raw"), 2u);
        EXPECT_EQ(out.flags, (std::vector<std::string>{"guard:raw:missing symptom: nausea",
                                                        "guard:raw:severity word missing: nausea (mild)"}));
    }
}

TEST(TrapStage, SelfDiagnosisNamesDistractor) {
    Harness h(default_rules());
    const auto out = h.gen.apply_trap(kGoodQuestion, TrapKind::SelfDiagnosis, {"Sinusitis", {}}, migraine_seed());
    EXPECT_TRUE(out.flags.empty());
    EXPECT_EQ(out.text, kGoodQuestion + " I am fairly sure this is Sinusitis.");
    const auto prompt = h.prompts_for("trap").at(0);
    EXPECT_NE(prompt.find("Trap type: Self-Diagnosis"), std::string::npos);
    EXPECT_NE(prompt.find("Actual symptom list: headache, nausea"), std::string::npos);
}

TEST(TrapStage, SilentDistractorIsFlaggedForSelfDiagnosisOnly) {
    const json rule{{"tag", "trap"}, {"captures", {"Original question: "}}, {"response", {{"TrapQuestion", "{{1}}"}}}};
    Harness h(rules_with({rule}));
    const auto self = h.gen.apply_trap(kGoodQuestion, TrapKind::SelfDiagnosis, {"Sinusitis", {}}, migraine_seed());
    EXPECT_EQ(self.flags, std::vector<std::string>{"guard:trap:distractor not mentioned: Sinusitis"});
    const auto noise = h.gen.apply_trap(kGoodQuestion, TrapKind::ExternalNoise, {"Sinusitis", {}}, migraine_seed());
    EXPECT_TRUE(noise.flags.empty());
}

TEST(StyleStage, ExtractsStyleAndChecksLeaks) {
    Harness h(default_rules());
    const PersonaDescriptor p{"mason", "Mason, limited medical knowledge", std::nullopt};
    const auto out = h.gen.apply_style(kGoodQuestion, p, migraine_seed());
    EXPECT_TRUE(out.flags.empty());
    EXPECT_EQ(out.style, (PersonaStyle{Level::Low, Level::High, CommStyle::Direct}));
    EXPECT_NE(h.prompts_for("style").at(0).find(
                  R"(Patient style: {"clarity":"High","communication_style":"Direct","medical_knowledge":"Low"})"),
              std::string::npos);

    Harness leaky(rules_with({{{"tag", "style"},
                               {"captures", {"Original question: "}},
                               {"response", {{"PolishedPatientQuestion", "As a mason: {{1}}"}}}}}));
    const auto leaked = leaky.gen.apply_style(kGoodQuestion, p, migraine_seed());
    EXPECT_EQ(leaked.flags, std::vector<std::string>{"guard:style:persona leak: mason"});
}

TEST(StyleStage, UnreadablePersonaFallsBackToNeutral) {
    Harness h(rules_with({{{"tag", "persona_extract"}, {"response", "no idea"}}}));
    const auto out = h.gen.extract_persona({"p", "someone", std::nullopt});
    EXPECT_EQ(out.style, PersonaStyle{});
    EXPECT_EQ(out.flags, std::vector<std::string>{"persona-style-default"});
}

TEST(RumorStage, EmbedsRumorAndRequiresValidPair) {
    Harness h(default_rules());
    auto pair = bundle_for("").rumor;
    const auto out = h.gen.insert_rumor("I have a severe headache and mild nausea.", pair, migraine_seed());
    EXPECT_TRUE(out.flags.empty());
    EXPECT_TRUE(text::contains_ci(out.text, pair.rumor));
    pair.valid = false;
    EXPECT_THROW(h.gen.insert_rumor("q", pair, migraine_seed()), std::invalid_argument);
}

TEST(RumorStage, LeakedFactIsFlagged) {
    Harness h(rules_with({{{"tag", "rumor_insert"},
                           {"captures", {"Original question: ", "Claim to embed: "}},
                           {"response",
                            {{"RumoredQuestion",
                              "{{1}} I heard that {{2}} Cold water is not a recognised cause of headache."}}}}}));
    const auto out = h.gen.insert_rumor("I have a severe headache and mild nausea.", bundle_for("").rumor, migraine_seed());
    EXPECT_EQ(out.flags, std::vector<std::string>{"guard:rumor_insert:fact leaked"});
    EXPECT_EQ(h.calls("rumor_insert"), 2u);
}

TEST(RumorSelection, FirstValidPairWins) {
    Harness h(default_rules());
    json audit;
    const auto pair = h.gen.select_rumor("headache", &audit);
    ASSERT_TRUE(pair.has_value());
    EXPECT_TRUE(pair->valid);
    EXPECT_EQ(pair->rumor, "headache is always caused by drinking cold water.");
    EXPECT_EQ(audit.at("checked"), 2);
    for (const auto& r : h.sg.backend->requests()) {
        if (r.tag == "rumor_check") EXPECT_EQ(r.model_id, "judge");
        if (r.tag == "rumor_check") EXPECT_EQ(r.temperature, 0.0);
    }

    Harness none(rules_with({{{"tag", "rumor_check"}, {"response", {{"verdict", "Indeterminate"}}}}}));
    EXPECT_FALSE(none.gen.select_rumor("headache").has_value());
}

// ---------------------------------------------------------------- validate / refine

TEST(Validate, ParsesFiveDimensions) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(false)}}}));
    const auto r = h.gen.validate(bundle_for(kGoodQuestion));
    EXPECT_FALSE(r.pass());
    EXPECT_FALSE(r.challenge.pass);
    EXPECT_TRUE(r.rationality.pass);
    EXPECT_EQ(r.challenge.assessment, "the trap is too obvious");
    const auto req = h.sg.backend->requests().back();
    EXPECT_EQ(req.model_id, "judge");
    EXPECT_EQ(req.temperature, 0.0);
}

TEST(Validate, UnreadableVerdictFailsEverything) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", {{"challenge", "fine"}}}}}));
    const auto r = h.gen.validate(bundle_for(kGoodQuestion));
    for (auto d : ValidationReport::kDimensions) {
        EXPECT_FALSE(r.dimension(d).pass);
        EXPECT_EQ(r.dimension(d).assessment, "validator unreadable");
    }
    EXPECT_EQ(h.calls("verify"), 3u);
}

TEST(Refine, PreconditionsAndPrompt) {
    Harness h(default_rules());
    ValidationReport passing;
    for (auto d : ValidationReport::kDimensions) passing.dimension(d).pass = true;
    EXPECT_THROW(h.gen.refine(bundle_for(kGoodQuestion), passing, 0.3), std::invalid_argument);
    ValidationReport failing = passing;
    failing.challenge = {"too obvious", false};
    EXPECT_THROW(h.gen.refine(bundle_for(kGoodQuestion), failing, 1.5), std::invalid_argument);
    EXPECT_THROW(h.gen.refine(bundle_for(kGoodQuestion), failing, -0.1), std::invalid_argument);

    const auto out = h.gen.refine(bundle_for(kGoodQuestion), failing, 0.6);
    EXPECT_EQ(out.text, kGoodQuestion + " Please help.");
    EXPECT_EQ(out.explanation, "made the trap subtler");
    const auto prompt = h.prompts_for("optimize").at(0);
    EXPECT_NE(prompt.find("Edit intensity: 0.6\n"), std::string::npos);
    EXPECT_NE(prompt.find("Edit instruction: " + generate::refinement_instruction(0.6)), std::string::npos);
    EXPECT_NE(prompt.find("challenge: Fail - too obvious"), std::string::npos);
}

TEST(Refine, GuardBreakKeepsPreviousText) {
    Harness h(rules_with({{{"tag", "optimize"},
                           {"response", {{"gradient_explanation", "dropped it"}, {"refined_question", "A headache."}}}}}));
    ValidationReport failing;
    const auto out = h.gen.refine(bundle_for(kGoodQuestion), failing, 0.3);
    EXPECT_EQ(out.text, kGoodQuestion);
    EXPECT_EQ(out.flags,
              (std::vector<std::string>{"guard:optimize:missing symptom: nausea", "guard:optimize:rumor missing"}));
    EXPECT_EQ(h.calls("optimize"), 2u);
}

// ---------------------------------------------------------------- optimize loop

TEST(Optimize, AllPassStopsAfterOneIteration) {
    Harness h(default_rules());
    const auto r = h.gen.pgd_optimize(bundle_for(kGoodQuestion));
    EXPECT_TRUE(r.validated);
    ASSERT_EQ(r.iterations.size(), 1u);
    EXPECT_FALSE(r.iterations[0].refined_text.has_value());
    EXPECT_EQ(r.text, kGoodQuestion);
    EXPECT_EQ(h.calls("optimize"), 0u);
}

TEST(Optimize, FailFailPassUsesFirstTwoEtas) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(false)}, {"times", 2}}}));
    const auto r = h.gen.pgd_optimize(bundle_for(kGoodQuestion));
    EXPECT_TRUE(r.validated);
    ASSERT_EQ(r.iterations.size(), 3u);
    EXPECT_EQ(r.iterations[0].eta, 0.3);
    EXPECT_EQ(r.iterations[1].eta, 0.6);
    EXPECT_FALSE(r.iterations[2].eta.has_value());
    EXPECT_TRUE(r.iterations[2].report.pass());
    EXPECT_EQ(r.text, kGoodQuestion + " Please help. Please help.");
    EXPECT_TRUE(r.flags.empty());
}

TEST(Optimize, ExhaustionFlagsUnvalidated) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(false)}}}));
    const auto r = h.gen.pgd_optimize(bundle_for(kGoodQuestion));
    EXPECT_FALSE(r.validated);
    ASSERT_EQ(r.iterations.size(), 3u);
    EXPECT_EQ(r.iterations[0].eta, 0.3);
    EXPECT_EQ(r.iterations[1].eta, 0.6);
    EXPECT_EQ(r.iterations[2].eta, 0.9);
    EXPECT_EQ(r.text, kGoodQuestion + " Please help. Please help. Please help.");
    EXPECT_EQ(r.flags, std::vector<std::string>{std::string(kFlagUnvalidated)});
}

TEST(Optimize, TrapPersonaAndRumorHeldFixed) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(false)}}}));
    h.gen.pgd_optimize(bundle_for(kGoodQuestion));
    const auto prompts = h.prompts_for("verify");
    ASSERT_EQ(prompts.size(), 3u);
    auto line = [](const std::string& p, const std::string& label) {
        const auto at = p.find(label);
        return p.substr(at, p.find('\n', at) - at);
    };
    for (const char* label : {"Trap type: ", "Patient description: ", "Patient style: ", "Misleading knowledge: ",
                              "Distractor diagnosis: "}) {
        for (const auto& p : prompts) EXPECT_EQ(line(p, label), line(prompts[0], label)) << label;
    }
    EXPECT_NE(line(prompts[0], "Question under review: "), line(prompts[1], "Question under review: "));
}

// ---------------------------------------------------------------- end to end

TEST(GenerateSeed, BenchmarkModeBuildsFourQuestions) {
    Harness h(default_rules());
    json audit;
    std::vector<std::string> failures;
    const auto qs = h.gen.generate_seed(migraine_seed("case-7"), audit, failures);
    EXPECT_TRUE(failures.empty());
    ASSERT_EQ(qs.size(), 4u);
    std::set<std::string> ids;
    for (const auto& q : qs) {
        ids.insert(q.id);
        EXPECT_EQ(q.id, "case-7-" + std::string(trap_slug(q.trap)));
        EXPECT_TRUE(q.provenance.validated);
        EXPECT_TRUE(q.provenance.flags.empty()) << text::join(q.provenance.flags, ",");
        EXPECT_TRUE(text::contains_ci(q.text, q.rumor_pair.rumor));
        EXPECT_TRUE(q.rumor_pair.valid);
        EXPECT_TRUE(q.score_points.complete(3));
        EXPECT_NE(q.distractor_diagnosis, q.true_diagnosis);
        EXPECT_EQ(q.persona, (PersonaStyle{Level::Low, Level::High, CommStyle::Direct}));
        if (q.trap == TrapKind::SelfDiagnosis) EXPECT_TRUE(text::contains_ci(q.text, q.distractor_diagnosis));
        EXPECT_NO_THROW(validate(q));
    }
    EXPECT_EQ(ids.size(), 4u);
    EXPECT_EQ(audit.at("rumor").at("checked"), 2);
    // Seed-level work (raw question, differential, rumor pool) is done once.
    EXPECT_EQ(h.calls("raw"), 1u);
    EXPECT_EQ(h.calls("differential"), 1u);
    EXPECT_EQ(h.calls("rumor"), 1u);
}

TEST(GenerateSeed, ScorePointsUseFinalQuestion) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(false)}, {"times", 1}}}));
    auto cfg = test_config();
    json audit;
    std::vector<std::string> failures;
    const auto qs = h.gen.generate_seed(migraine_seed(), audit, failures);
    ASSERT_FALSE(qs.empty());
    const auto& first = qs.front();
    EXPECT_EQ(first.text.substr(first.text.size() - 12), "Please help.");
    const auto evidence_prompts = h.prompts_for("evidence");
    EXPECT_NE(evidence_prompts.at(0).find("Patient question: " + first.text), std::string::npos);
}

std::vector<SeedCase> many_seeds(int n) {
    std::vector<SeedCase> out;
    for (int i = 0; i < n; ++i) out.push_back(migraine_seed("seed-" + std::to_string(i)));
    return out;
}

TEST(GenerateBenchmark, EightHundredSeedsGiveThirtyTwoHundredQuestions) {
    auto cfg = test_config();
    cfg.workers = 4;
    Harness h(default_rules(), cfg);
    const auto result = h.gen.generate_benchmark(many_seeds(800));
    ASSERT_EQ(result.questions.size(), 3200u);
    for (auto t : kAllTraps) EXPECT_EQ(result.manifest.at("questions_per_trap").at(std::string(trap_slug(t))), 800);
    EXPECT_EQ(result.manifest.at("seed_failures").size(), 0u);
    EXPECT_EQ(result.manifest.at("calls_by_stage").at("raw"), 800);
    EXPECT_EQ(result.manifest.at("calls_by_stage").at("verify"), 3200);
    for (size_t i = 0; i < result.questions.size(); ++i) {
        EXPECT_EQ(result.questions[i].seed_id, "seed-" + std::to_string(i / 4));
    }
}

TEST(GenerateBenchmark, OutputIndependentOfWorkerCount) {
    auto cfg = test_config();
    cfg.mode = GenMode::Challenge;
    cfg.persona_pool.push_back({"p2", "A retired teacher", std::nullopt});
    cfg.rng_seed = 99;
    std::string outputs[2];
    std::string manifests[2];
    for (int run = 0; run < 2; ++run) {
        auto c = cfg;
        c.workers = run == 0 ? 1 : 6;
        Harness h(default_rules(), c);
        const auto r = h.gen.generate_benchmark(many_seeds(60));
        outputs[run] = serialize_dataset(r.questions);
        manifests[run] = r.manifest.dump();
    }
    EXPECT_EQ(outputs[0], outputs[1]);
    EXPECT_EQ(manifests[0], manifests[1]);
}

TEST(GenerateBenchmark, ChallengeModeOneQuestionPerSeedRoughlyUniform) {
    auto cfg = test_config();
    cfg.mode = GenMode::Challenge;
    Harness h(default_rules(), cfg);
    const auto r = h.gen.generate_benchmark(many_seeds(400));
    ASSERT_EQ(r.questions.size(), 400u);
    std::vector<int> counts(4, 0);
    for (const auto& q : r.questions) ++counts[static_cast<size_t>(q.trap)];
    EXPECT_LT(chi_square(counts), 16.266);
}

TEST(GenerateBenchmark, FailingSeedIsRecordedAndOthersContinue) {
    auto bad = migraine_seed("bad");
    bad.medical_entity = "nausea";
    Harness h(rules_with({{{"tag", "rumor_check"}, {"contains", "nausea"}, {"response", {{"verdict", "Invalid"}}}}}));
    const auto r = h.gen.generate_benchmark({migraine_seed("good-1"), bad, migraine_seed("good-2")});
    EXPECT_EQ(r.questions.size(), 8u);
    ASSERT_EQ(r.manifest.at("seed_failures").size(), 1u);
    EXPECT_EQ(r.manifest.at("seed_failures")[0].at("seed_id"), "bad");
    EXPECT_NE(r.manifest.at("seed_failures")[0].at("error").get<std::string>().find("no valid rumor-fact pair"),
              std::string::npos);
}

TEST(GenerateBenchmark, UnvalidatedQuestionsKeptAndFlagged) {
    Harness h(rules_with({{{"tag", "verify"}, {"response", verdicts(true, false)}}}));
    const auto r = h.gen.generate_benchmark({migraine_seed()});
    ASSERT_EQ(r.questions.size(), 4u);
    for (const auto& q : r.questions) {
        EXPECT_TRUE(q.flagged());
        EXPECT_EQ(q.provenance.iterations.size(), 3u);
    }
    EXPECT_EQ(r.manifest.at("unvalidated"), 4);
    EXPECT_EQ(r.manifest.at("flags").size(), 4u);
}

}  // namespace
}  // namespace medtrap
