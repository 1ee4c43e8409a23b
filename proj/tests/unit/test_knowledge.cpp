#include <gtest/gtest.h>

#include <fstream>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include <set>
#include "medtrap/knowledge/deriver.hpp"
#include "test_support.hpp"

using namespace medtrap;
using namespace medtrap::knowledge;
using nlohmann::json;

namespace {

struct Fixture {
    explicit Fixture(const json& rules) : sg(rules), deriver(*sg.gw, tsupport::catalog(), kb, {"gen", 0.7}, {"judge", 0.0}) {}
    tsupport::ScriptedGateway sg;
    KnowledgeBase kb;
    KnowledgeDeriver deriver;
};

json differential_reply(const std::string& root, const std::vector<std::string>& names) {
    json sim = json::array();
    for (const auto& n : names) sim.push_back({{"name", n}, {"symptoms", {"s1", "s2"}}});
    return {{"root_diagnosis", {{"name", root}, {"symptoms", {"palpitations"}}}}, {"similar_diagnoses", sim}};
}

}  // namespace

TEST(KnowledgeBase, ExactThenFuzzyThenEmpty) {
    KnowledgeBase kb;
    kb.add("iron_deficiency_anemia", "Iron article");
    kb.add("anemia", "General anemia");
    kb.add("Pheochromocytoma", "Adrenal tumour article");
    EXPECT_EQ(kb.lookup("  Iron   Deficiency ANEMIA "), "Iron article");
    EXPECT_EQ(kb.lookup("anemia"), "General anemia");
    EXPECT_EQ(kb.lookup("severe iron deficiency anemia in pregnancy"), "Iron article");
    EXPECT_EQ(kb.lookup("pheochromo"), "Adrenal tumour article");
    EXPECT_EQ(kb.lookup("migraine"), "");
    EXPECT_EQ(kb.lookup(""), "");
}

TEST(KnowledgeBase, LoadsDirectoryAndRejectsMissing) {
    tsupport::TempDir dir("kb");
    std::ofstream(dir.path / "acute_laryngitis.txt") << "Hoarseness.";
    std::filesystem::create_directories(dir.path / "sub");
    std::ofstream(dir.path / "sub" / "gastritis.md") << "Stomach.";
    const auto kb = KnowledgeBase::load(dir.path);
    EXPECT_EQ(kb.size(), 2u);
    EXPECT_EQ(kb.lookup("Acute Laryngitis"), "Hoarseness.");
    EXPECT_EQ(kb.lookup("gastritis"), "Stomach.");
    EXPECT_THROW(KnowledgeBase::load(dir.path / "missing"), std::runtime_error);
}

TEST(Differential, PheochromocytomaIncludesAdrenalAdenoma) {
    Fixture f(json::array({{{"tag", "differential"},
                            {"response", differential_reply("Pheochromocytoma", {"Adrenal adenoma", "Hyperthyroidism",
                                                                                 "Essential hypertension"})}}}));
    f.kb.add("pheochromocytoma", "Catecholamine-secreting tumour of the adrenal medulla.");
    const auto set = f.deriver.differential_diagnoses("Pheochromocytoma", 3);
    ASSERT_EQ(set.similar.size(), 3u);
    EXPECT_EQ(set.similar[0].name, "Adrenal adenoma");
    EXPECT_TRUE(set.flags.empty());
    EXPECT_EQ(set.root.symptoms, std::vector<std::string>{"palpitations"});
}

TEST(Differential, KnowledgeContextInjectedIntoPrompt) {
    Fixture f(json::array({{{"tag", "differential"},
                            {"contains", "Catecholamine-secreting"},
                            {"response", differential_reply("P", {"A"})}}}));
    f.kb.add("pheochromocytoma", "Catecholamine-secreting tumour.");
    EXPECT_NO_THROW(f.deriver.differential_diagnoses("Pheochromocytoma", 1));
}

TEST(Differential, RootAmongSimilarFilteredAndFlagged) {
    Fixture f(json::array({{{"tag", "differential"},
                            {"response", differential_reply("Gastritis", {"gastritis", "Peptic ulcer"})}}}));
    const auto set = f.deriver.differential_diagnoses("Gastritis", 2);
    ASSERT_EQ(set.similar.size(), 1u);
    EXPECT_EQ(set.similar[0].name, "Peptic ulcer");
    EXPECT_NE(std::find(set.flags.begin(), set.flags.end(), kFlagRootInDifferential), set.flags.end());
    EXPECT_NE(std::find(set.flags.begin(), set.flags.end(), kFlagPartialDifferential), set.flags.end());
    EXPECT_EQ(f.sg.backend->invocations(), 2u);  // one re-ask
}

TEST(Differential, ReAskCanFillTheSet) {
    Fixture f(json::array({{{"tag", "differential"}, {"contains", "were usable"},
                            {"response", differential_reply("G", {"Peptic ulcer", "Gastric cancer"})}},
                           {{"tag", "differential"}, {"response", differential_reply("G", {"Peptic ulcer"})}}}));
    const auto set = f.deriver.differential_diagnoses("Gastritis", 2);
    ASSERT_EQ(set.similar.size(), 2u);
    EXPECT_EQ(set.similar[1].name, "Gastric cancer");
    EXPECT_TRUE(set.flags.empty());
}

TEST(Differential, ParentChildSuspectKeptForReview) {
    Fixture f(json::array({{{"tag", "differential"},
                            {"response", differential_reply("Acute laryngitis", {"Laryngitis", "Epiglottitis"})}}}));
    const auto set = f.deriver.differential_diagnoses("Acute laryngitis", 2);
    EXPECT_EQ(set.similar.size(), 2u);
    EXPECT_EQ(set.suspect_hierarchy, std::vector<std::string>{"Laryngitis"});
}

TEST(Differential, LesionSiteConfusionAcceptedAsIs) {
    Fixture f(json::array({{{"tag", "differential"},
                            {"response", differential_reply("Seborrheic dermatitis", {"Scalp/facial psoriasis"})}}}));
    const auto set = f.deriver.differential_diagnoses("Seborrheic dermatitis", 1);
    ASSERT_EQ(set.similar.size(), 1u);
    EXPECT_EQ(set.similar[0].name, "Scalp/facial psoriasis");
    EXPECT_TRUE(set.suspect_hierarchy.empty());
}

// Never returns the root, whatever the generator says.
TEST(DifferentialProperty, RootNeverReturned) {
    const std::vector<std::string> variants{"Migraine", "migraine", " MIGRAINE ", "Migraine\t"};
    for (const auto& v : variants) {
        Fixture f(json::array(
            {{{"tag", "differential"}, {"response", differential_reply("Migraine", {v, "Tension headache", v})}}}));
        const auto set = f.deriver.differential_diagnoses("Migraine", 2);
        for (const auto& s : set.similar) EXPECT_NE(text::normalize(s.name), "migraine");
    }
    Fixture f(json::array());
    EXPECT_THROW(f.deriver.differential_diagnoses("X", 0), std::invalid_argument);
}

TEST(Rumor, DizzinessExampleFivePairs) {
    const json reply = json::parse(medtrap::read_file(tsupport::fixture_path("rumor_dizziness.json")));
    Fixture f(json::array({{{"tag", "rumor"}, {"response", reply}}}));
    const auto set = f.deriver.rumor_fact_pairs("dizziness", 5);
    ASSERT_EQ(set.pairs.size(), 5u);
    EXPECT_TRUE(set.flags.empty());
    const bool has_honey = std::any_of(set.pairs.begin(), set.pairs.end(), [](const RumorFactPair& p) {
        return p.rumor.find("drinking 500ml of pure honey water can instantly stabilize the vestibular nerve") !=
               std::string::npos;
    });
    EXPECT_TRUE(has_honey);
    for (const auto& p : set.pairs) {
        EXPECT_FALSE(p.valid);
        EXPECT_EQ(p.entity, "dizziness");
    }
}

TEST(Rumor, SinglePairAndShortfall) {
    json seven = json::array();
    for (int i = 0; i < 7; ++i) {
        seven.push_back({{"incorrect_statement", "rumor " + std::to_string(i)},
                         {"correct_statement", "fact " + std::to_string(i)}});
    }
    Fixture f(json::array({{{"tag", "rumor"}, {"contains", "Write 1 pairs"},
                            {"response", {{"statement_pairs", {seven[0]}}}}},
                           {{"tag", "rumor"}, {"response", {{"statement_pairs", seven}}}}}));
    const auto one = f.deriver.rumor_fact_pairs("cough", 1);
    EXPECT_EQ(one.pairs.size(), 1u);
    EXPECT_TRUE(one.flags.empty());
    const auto ten = f.deriver.rumor_fact_pairs("cough", 10);
    EXPECT_EQ(ten.pairs.size(), 7u);
    EXPECT_EQ(ten.flags, std::vector<std::string>{std::string(kFlagRumorShortfall)});
    EXPECT_THROW(f.deriver.rumor_fact_pairs("cough", 11), std::invalid_argument);
    EXPECT_THROW(f.deriver.rumor_fact_pairs("cough", 0), std::invalid_argument);
}

TEST(Rumor, MalformedJsonAfterReAsksPropagates) {
    Fixture f(json::array({{{"tag", "rumor"}, {"response", "no json here"}}}));
    EXPECT_THROW(f.deriver.rumor_fact_pairs("cough", 2), gateway::JsonShapeFailure);
}

TEST(Validity, HighBloodPressureBonesIsValid) {
    Fixture f(json::array({{{"tag", "rumor_check"},
                            {"contains", "High BP affects the bones"},
                            {"response", {{"reason", "plausible but false"}, {"verdict", "Valid"}}}}}));
    EXPECT_TRUE(f.deriver.validity_check({"high blood pressure", "High BP affects the bones",
                                          "High BP affects the heart", false}));
}

TEST(Validity, IdenticalRumorAndFactNeedsNoCall) {
    Fixture f(json::array());
    EXPECT_FALSE(f.deriver.validity_check({"x", "Salt is harmless.", "salt is  harmless", false}));
    EXPECT_EQ(f.sg.backend->invocations(), 0u);
}

TEST(Validity, IndeterminateAndUnreadableAreInvalid) {
    Fixture f(json::array({{{"tag", "rumor_check"}, {"contains", "Rumor: A"},
                            {"response", {{"reason", "?"}, {"verdict", "Indeterminate"}}}},
                           {{"tag", "rumor_check"}, {"response", "I am not sure"}}}));
    EXPECT_FALSE(f.deriver.validity_check({"e", "A", "B", false}));
    EXPECT_FALSE(f.deriver.validity_check({"e", "C", "D", false}));
}

TEST(Validity, UsesJudgeAtTemperatureZero) {
    Fixture f(json::array({{{"tag", "rumor_check"}, {"model", "judge"}, {"response", {{"verdict", "Valid"}}}}}));
    EXPECT_TRUE(f.deriver.validity_check({"e", "A", "B", false}));
}

TEST(ScorePoints, ThreeEvidenceItems) {
    Fixture f(json::array({{{"tag", "evidence"}, {"response", {{"diagnosis_evidences", {"pallor", "fatigue", "low ferritin"}}}}}}));
    const auto r = f.deriver.derive_score_points("iron deficiency anemia", "q", Criterion::Evidence, 3);
    EXPECT_EQ(r.points, (std::vector<std::string>{"pallor", "fatigue", "low ferritin"}));
    EXPECT_TRUE(r.flags.empty());
}

TEST(ScorePoints, FiveItemsTruncatedInOrder) {
    Fixture f(json::array({{{"tag", "treatment"}, {"response", {{"treatment_suggestions", {"a", "b", "c", "d", "e"}}}}}}));
    const auto r = f.deriver.derive_score_points("d", "q", Criterion::Treatment, 3);
    EXPECT_EQ(r.points, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(f.sg.backend->invocations(), 1u);
}

TEST(ScorePoints, IronDeficiencyLifestyleIncludesVitaminC) {
    Fixture f(json::array({{{"tag", "lifestyle"},
                            {"contains", "iron deficiency anemia"},
                            {"response",
                             {{"lifestyle_suggestions",
                               {"eat more iron-rich foods", "avoid tea and coffee with meals", "supplement vitamin C"}}}}}}));
    const auto r = f.deriver.derive_score_points("iron deficiency anemia", "q", Criterion::Lifestyle, 3);
    EXPECT_NE(std::find(r.points.begin(), r.points.end(), "supplement vitamin C"), r.points.end());
}

TEST(ScorePoints, DuplicatesTriggerReAskThenShortfall) {
    Fixture f(json::array({{{"tag", "evidence"}, {"contains", "repeated each other"},
                            {"response", {{"diagnosis_evidences", {"Pallor", "fatigue"}}}}},
                           {{"tag", "evidence"}, {"response", {{"diagnosis_evidences", {"pallor", " PALLOR ", "fatigue"}}}}}}));
    const auto r = f.deriver.derive_score_points("d", "q", Criterion::Evidence, 3);
    EXPECT_EQ(r.points, (std::vector<std::string>{"pallor", "fatigue"}));
    EXPECT_EQ(r.flags, std::vector<std::string>{"scorepoint-shortfall:evidence"});
    EXPECT_EQ(f.sg.backend->invocations(), 2u);

    Fixture g(json::array({{{"tag", "evidence"}, {"contains", "repeated each other"},
                            {"response", {{"diagnosis_evidences", {"koilonychia"}}}}},
                           {{"tag", "evidence"}, {"response", {{"diagnosis_evidences", {"pallor", "Pallor", "fatigue"}}}}}}));
    const auto filled = g.deriver.derive_score_points("d", "q", Criterion::Evidence, 3);
    EXPECT_EQ(filled.points, (std::vector<std::string>{"pallor", "fatigue", "koilonychia"}));
    EXPECT_TRUE(filled.flags.empty());
}

// On success: exactly k points, pairwise distinct after normalization.
TEST(ScorePointsProperty, LengthAndDistinctness) {
    std::mt19937 gen(5);
    const std::vector<std::string> pool{"a", "A", " a ", "b", "c", "C ", "d", "e", "f"};
    for (int trial = 0; trial < 50; ++trial) {
        json items = json::array();
        const int len = 1 + static_cast<int>(gen() % 8);
        for (int i = 0; i < len; ++i) items.push_back(pool[gen() % pool.size()]);
        Fixture f(json::array({{{"tag", "lifestyle"}, {"response", {{"lifestyle_suggestions", items}}}}}));
        const int k = 1 + static_cast<int>(gen() % 4);
        const auto r = f.deriver.derive_score_points("d", "q", Criterion::Lifestyle, k);
        std::set<std::string> norm;
        for (const auto& p : r.points) norm.insert(text::normalize(p));
        EXPECT_EQ(norm.size(), r.points.size());
        if (r.flags.empty()) EXPECT_EQ(static_cast<int>(r.points.size()), k);
        else EXPECT_LT(static_cast<int>(r.points.size()), k);
    }
}
