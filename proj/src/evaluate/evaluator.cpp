/// @file evaluator.cpp

#include "medtrap/evaluate/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "medtrap/core/text.hpp"
#include "medtrap/gateway/ask.hpp"

namespace medtrap::evaluate {

using gateway::FieldKind;
using gateway::JsonShape;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<Criterion, std::string_view>, 3> kHelpKeys{{
    {Criterion::Evidence, "diagnosis_evidences_score"},
    {Criterion::Treatment, "treatment_suggestions_score"},
    {Criterion::Lifestyle, "lifestyle_suggestions_score"},
}};
constexpr std::string_view kAccKey = "real_diagnosis_score";

/// Rubric score from a number or a one-element array; nullopt when off-rubric.
std::optional<int> rubric_score(const json& obj) {
    if (!obj.is_object()) return std::nullopt;
    const auto it = obj.find("score");
    if (it == obj.end()) return std::nullopt;
    json v = *it;
    if (v.is_array()) {
        if (v.size() != 1) return std::nullopt;
        v = v[0];
    }
    if (!v.is_number()) return std::nullopt;
    const double d = v.get<double>();
    for (int allowed : {0, 50, 100}) {
        if (d == allowed) return allowed;
    }
    return std::nullopt;
}

std::string reason_of(const json& obj) {
    if (!obj.is_object()) return {};
    const auto it = obj.find("reason");
    return (it != obj.end() && it->is_string()) ? it->get<std::string>() : std::string{};
}

JsonShape help_shape() {
    JsonShape shape;
    shape.require(std::string(kAccKey), FieldKind::Object);
    for (const auto& [c, key] : kHelpKeys) shape.require(std::string(key), FieldKind::Object);
    shape.check("rubric", [](const json& j) -> std::optional<std::string> {
        std::vector<std::string_view> keys{kAccKey};
        for (const auto& [c, key] : kHelpKeys) keys.push_back(key);
        for (auto key : keys) {
            if (!rubric_score(j.at(std::string(key)))) return std::string(key) + ".score must be 0, 50 or 100";
        }
        const auto& acc = j.at(std::string(kAccKey));
        if (const auto d = acc.find("diagnosis_in_response"); d != acc.end() && !d->is_array()) {
            return std::string("diagnosis_in_response must be an array of strings");
        }
        return std::nullopt;
    });
    return shape;
}

std::optional<Stance> parse_stance(const std::string& s) {
    const auto n = text::strip_sentence(text::normalize(s));
    if (n == "supports the statement" || n == "supports") return Stance::Supports;
    if (n == "opposes the statement" || n == "opposes") return Stance::Opposes;
    if (n == "cannot determine" || n == "undetermined") return Stance::Undetermined;
    return std::nullopt;
}

std::string bullet_join(const std::vector<std::string>& items) { return text::join(items, "; "); }

std::string missing_label(const std::string& question_id) { return "<missing:" + question_id + ">"; }

}  // namespace

json to_json(const ChallengeRecord& r) {
    return json{{"question_id", r.question_id},
                {"model_id", r.model_id},
                {"predictions", r.predictions},
                {"labels", r.labels},
                {"top1", r.hits.top1},
                {"top3", r.hits.top3},
                {"top5", r.hits.top5},
                {"flags", r.flags}};
}

json to_json(const ChallengeCard& c) {
    return json{{"model_id", c.model_id}, {"top1", c.top1},   {"top3", c.top3},
                {"top5", c.top5},         {"score", c.score}, {"questions", c.questions}};
}

Evaluator::Evaluator(gateway::Gateway& gw, const PromptCatalog& prompts, EvalConfig cfg)
    : gw_(gw), prompts_(prompts), cfg_(std::move(cfg)) {
    cfg_.validate();
}

template <typename Fn>
void Evaluator::parallel_for(std::size_t n, Fn&& fn) const {
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg_.workers), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mu;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

ModelAnswer Evaluator::collect_answer(const std::string& model_id, const BenchQuestion& q, bool challenge) const {
    ModelAnswer a;
    a.question_id = q.id;
    a.model_id = model_id;
    gateway::CallSettings settings{model_id, 0.0, cfg_.answer_max_tokens, cfg_.judge.json_attempts};
    try {
        if (!gw_.has_backend(model_id)) throw gateway::UnknownModelError("no backend registered for model '" + model_id + "'");
        if (challenge) {
            const auto prompt = prompts_.render(
                "challenge_infer", {{"max_predict", std::to_string(cfg_.max_predict)},
                                    {"example_description", cfg_.challenge_example_description},
                                    {"example_diagnosis", json(cfg_.challenge_example_diagnosis).dump()},
                                    {"description", q.text}});
            const auto reply = gw_.complete_json(gateway::single_turn(settings, "challenge_infer", prompt),
                                                 JsonShape().require("diagnoses", FieldKind::StringArray),
                                                 settings.json_attempts);
            for (const auto& d : reply.at("diagnoses")) {
                auto name = text::trim(d.get<std::string>());
                if (!name.empty()) a.ranked_diagnoses.push_back(std::move(name));
            }
            if (static_cast<int>(a.ranked_diagnoses.size()) > cfg_.max_predict) {
                a.ranked_diagnoses.resize(static_cast<std::size_t>(cfg_.max_predict));
            }
            if (a.ranked_diagnoses.empty()) throw std::runtime_error("empty diagnosis list");
            a.text = text::join(a.ranked_diagnoses, "\n");
        } else {
            const auto prompt = prompts_.render(
                "answer", {{"word_cap", std::to_string(cfg_.answer_word_cap)}, {"question", q.text}});
            const auto resp = gw_.complete(gateway::single_turn(settings, "answer", prompt));
            if (resp.finish_reason == gateway::FinishReason::Error) throw std::runtime_error("backend reported an error");
            a.text = text::trim(resp.text);
            if (a.text.empty()) throw std::runtime_error("empty reply");
        }
    } catch (const std::exception& e) {
        a.text.clear();
        a.ranked_diagnoses.clear();
        a.missing = true;
        a.error = e.what();
    }
    return a;
}

JudgedHelp Evaluator::judge_help_and_acc(const ModelAnswer& answer, const BenchQuestion& q) const {
    for (auto c : kAllCriteria) {
        if (q.score_points.at(c).empty()) {
            throw std::invalid_argument("judge_help_and_acc: question " + q.id + " has no " +
                                        std::string(to_string(c)) + " score-points");
        }
    }
    JudgedHelp out;
    if (answer.missing) {
        out.flags.emplace_back(kFlagMissingAnswer);
        return out;
    }
    const auto prompt = prompts_.render("help", {{"question", q.text},
                                                 {"response", answer.text},
                                                 {"real_diagnosis", q.true_diagnosis},
                                                 {"diagnosis_evidences", bullet_join(q.score_points.evidence)},
                                                 {"treatment_suggestions", bullet_join(q.score_points.treatment)},
                                                 {"lifestyle_suggestions", bullet_join(q.score_points.lifestyle)}});
    try {
        const auto reply =
            gw_.complete_json(gateway::single_turn(cfg_.judge, "help", prompt), help_shape(), cfg_.judge.json_attempts);
        const auto& acc = reply.at(std::string(kAccKey));
        out.acc_sub = *rubric_score(acc);
        out.rationales.push_back(reason_of(acc));
        if (const auto d = acc.find("diagnosis_in_response"); d != acc.end()) {
            for (const auto& e : *d) {
                if (e.is_string() && !text::trim(e.get<std::string>()).empty()) {
                    out.diagnoses.push_back(text::trim(e.get<std::string>()));
                }
            }
        }
        for (const auto& [c, key] : kHelpKeys) {
            const auto& obj = reply.at(std::string(key));
            out.help.at(c) = *rubric_score(obj);
            out.rationales.push_back(reason_of(obj));
        }
    } catch (const gateway::JsonShapeFailure&) {
        out = JudgedHelp{};
        out.flags.emplace_back(kFlagHelpUnreadable);
    }
    return out;
}

StanceVerdict Evaluator::classify_stance_detailed(const std::string& statement, const std::string& answer_text) const {
    if (text::trim(statement).empty() || text::trim(answer_text).empty()) {
        throw std::invalid_argument("classify_stance: statement and response must be non-empty");
    }
    const auto prompt = prompts_.render("veracity", {{"statement", statement}, {"response", answer_text}});
    const auto shape = JsonShape().require("classification", FieldKind::String).check("category", [](const json& j) {
        return parse_stance(j.at("classification").get<std::string>())
                   ? std::optional<std::string>()
                   : std::optional<std::string>(
                         "classification must be \"Supports the statement\", \"Opposes the statement\" or \"Cannot determine\"");
    });
    try {
        const auto reply =
            gw_.complete_json(gateway::single_turn(cfg_.judge, "veracity", prompt), shape, cfg_.judge.json_attempts);
        return {*parse_stance(reply.at("classification").get<std::string>()), reply.value("reason", std::string{}), true};
    } catch (const gateway::JsonShapeFailure&) {
        return {Stance::Undetermined, {}, false};
    }
}

Stance Evaluator::classify_stance(const std::string& statement, const std::string& answer_text) const {
    return classify_stance_detailed(statement, answer_text).stance;
}

VeracityResult Evaluator::veracity(const ModelAnswer& answer, const RumorFactPair& pair) const {
    if (!pair.valid) throw std::invalid_argument("veracity: rumor-fact pair has not passed the validity check");
    VeracityResult out;
    if (answer.missing) return out;
    const auto rumor = classify_stance_detailed(pair.rumor, answer.text);
    const auto fact = classify_stance_detailed(pair.fact, answer.text);
    out.rumor_stance = rumor.stance;
    out.fact_stance = fact.stance;
    out.rectified = rectifies(rumor.stance, fact.stance);
    out.rationales = {rumor.reason, fact.reason};
    if (!rumor.readable) out.flags.emplace_back("stance-unreadable:rumor");
    if (!fact.readable) out.flags.emplace_back("stance-unreadable:fact");
    return out;
}

bool Evaluator::veracity_indicator(const ModelAnswer& answer, const RumorFactPair& pair) const {
    return veracity(answer, pair).rectified;
}

NormalizedNames Evaluator::normalize_diagnoses(const std::vector<std::string>& raw) const {
    if (raw.empty()) throw std::invalid_argument("normalize_diagnoses: empty input");
    std::string lines;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        lines += "raw_diagnosis_" + std::to_string(i + 1) + ": " + raw[i] + "\n";
    }
    const auto prompt = prompts_.render("cons", {{"diagnoses", lines}});
    JsonShape shape;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        shape.require("diagnosis_" + std::to_string(i + 1), FieldKind::NonEmptyString);
    }
    NormalizedNames out;
    try {
        const auto reply =
            gw_.complete_json(gateway::single_turn(cfg_.judge, "cons", prompt), shape, cfg_.judge.json_attempts);
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out.names.push_back(text::trim(reply.at("diagnosis_" + std::to_string(i + 1)).get<std::string>()));
        }
    } catch (const gateway::JsonShapeFailure&) {
        out.names.clear();
        for (const auto& r : raw) out.names.push_back(text::trim(r));
        out.flags.emplace_back(kFlagConsUnreadable);
    }
    std::map<std::string, std::string> first_canon;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto [it, inserted] = first_canon.emplace(text::normalize(raw[i]), out.names[i]);
        if (!inserted) out.names[i] = it->second;
    }
    return out;
}

EvalRecord Evaluator::evaluate_answer(const ModelAnswer& answer, const BenchQuestion& q) const {
    EvalRecord r;
    r.question_id = q.id;
    r.model_id = answer.model_id;
    r.seed_id = q.seed_id;
    const auto help = judge_help_and_acc(answer, q);
    r.acc_sub = help.acc_sub;
    r.help_sub = help.help;
    r.primary_diagnosis = help.primary_diagnosis();
    r.judge_rationales = help.rationales;
    r.flags = help.flags;
    const auto ver = veracity(answer, q.rumor_pair);
    r.rumor_stance = ver.rumor_stance;
    r.fact_stance = ver.fact_stance;
    r.ver_rectified = ver.rectified;
    r.judge_rationales.insert(r.judge_rationales.end(), ver.rationales.begin(), ver.rationales.end());
    r.flags.insert(r.flags.end(), ver.flags.begin(), ver.flags.end());
    return r;
}

std::vector<const BenchQuestion*> Evaluator::scored_questions(const std::vector<BenchQuestion>& questions,
                                                              const std::vector<ModelAnswer>& answers) const {
    std::map<std::string, const BenchQuestion*> by_id;
    for (const auto& q : questions) {
        if (!by_id.emplace(q.id, &q).second) throw ValidationError("questions: duplicate id " + q.id);
    }
    std::set<std::string> orphans;
    for (const auto& a : answers) {
        if (!by_id.count(a.question_id)) orphans.insert(a.question_id);
    }
    if (!orphans.empty()) {
        throw ValidationError("answers: unknown question ids: " +
                              text::join(std::vector<std::string>(orphans.begin(), orphans.end()), ", "));
    }
    std::vector<const BenchQuestion*> out;
    for (const auto& [id, q] : by_id) {
        if (q->flagged() && !cfg_.include_flagged) continue;
        out.push_back(q);
    }
    return out;
}

EvaluationResult Evaluator::evaluate(const std::vector<BenchQuestion>& questions,
                                     const std::vector<ModelAnswer>& answers) const {
    const auto scored = scored_questions(questions, answers);
    std::map<std::pair<std::string, std::string>, const ModelAnswer*> answer_of;
    std::set<std::string> models;
    for (const auto& a : answers) {
        models.insert(a.model_id);
        answer_of[{a.model_id, a.question_id}] = &a;
    }

    struct Job {
        const BenchQuestion* q;
        ModelAnswer answer;
    };
    std::vector<Job> jobs;
    for (const auto& m : models) {
        for (const auto* q : scored) {
            const auto it = answer_of.find({m, q->id});
            if (it != answer_of.end()) {
                jobs.push_back({q, *it->second});
            } else {
                ModelAnswer missing;
                missing.question_id = q->id;
                missing.model_id = m;
                missing.missing = true;
                missing.error = "no answer recorded";
                jobs.push_back({q, std::move(missing)});
            }
        }
    }

    EvaluationResult result;
    result.records.resize(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) { result.records[i] = evaluate_answer(jobs[i].answer, *jobs[i].q); });

    // Prediction groups: one per (model, seed), labels in question-id order.
    struct GroupInput {
        std::string model;
        std::string seed;
        std::vector<std::size_t> records;
    };
    std::map<std::pair<std::string, std::string>, GroupInput> grouped;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.records[i];
        auto& g = grouped[{r.model_id, r.seed_id}];
        g.model = r.model_id;
        g.seed = r.seed_id;
        g.records.push_back(i);
    }
    std::vector<GroupInput> group_list;
    for (auto& [key, g] : grouped) group_list.push_back(std::move(g));
    result.groups.resize(group_list.size());
    std::vector<std::vector<std::string>> group_flags(group_list.size());
    parallel_for(group_list.size(), [&](std::size_t gi) {
        const auto& g = group_list[gi];
        std::vector<std::string> labels(g.records.size());
        std::vector<std::string> raw;
        std::vector<std::size_t> raw_slot;
        for (std::size_t k = 0; k < g.records.size(); ++k) {
            const auto& r = result.records[g.records[k]];
            if (r.primary_diagnosis.empty()) {
                labels[k] = missing_label(r.question_id);
            } else {
                raw.push_back(r.primary_diagnosis);
                raw_slot.push_back(k);
            }
        }
        if (!raw.empty()) {
            const auto canon = normalize_diagnoses(raw);
            for (std::size_t j = 0; j < raw.size(); ++j) labels[raw_slot[j]] = text::normalize(canon.names[j]);
            group_flags[gi] = canon.flags;
        }
        PredictionGroup pg;
        pg.seed_id = g.seed;
        pg.model_id = g.model;
        pg.normalized_diagnoses = labels;
        pg.entropy = entropy_bits(labels);
        pg.score = consistency_score(labels);
        result.groups[gi] = std::move(pg);
    });
    for (std::size_t gi = 0; gi < group_list.size(); ++gi) {
        for (const auto& f : group_flags[gi]) {
            for (auto idx : group_list[gi].records) result.records[idx].flags.push_back(f);
        }
    }

    for (const auto& m : models) {
        std::vector<EvalRecord> recs;
        std::vector<PredictionGroup> groups;
        for (const auto& r : result.records) {
            if (r.model_id == m) recs.push_back(r);
        }
        for (const auto& g : result.groups) {
            if (g.model_id == m) groups.push_back(g);
        }
        if (recs.empty()) continue;
        result.scorecards.push_back(aggregate(std::move(recs), std::move(groups), cfg_.weights));
    }
    return result;
}

std::vector<bool> Evaluator::judge_challenge(const std::string& truth, const std::vector<std::string>& predictions,
                                             std::vector<std::string>* flags) const {
    std::vector<bool> none(predictions.size(), false);
    if (predictions.empty()) return none;
    const auto prompt =
        prompts_.render("challenge_judge", {{"answer", truth}, {"prediction", json(predictions).dump()}});
    const auto n = predictions.size();
    const auto shape = JsonShape().require("labels", FieldKind::Array).check("labels", [n](const json& j) {
        const auto& l = j.at("labels");
        if (l.empty()) return std::optional<std::string>();
        if (l.size() != n) return std::optional<std::string>("labels must hold one boolean per prediction");
        for (const auto& e : l) {
            if (!e.is_boolean()) return std::optional<std::string>("labels must be booleans");
        }
        return std::optional<std::string>();
    });
    try {
        const auto reply = gw_.complete_json(gateway::single_turn(cfg_.judge, "challenge_judge", prompt), shape,
                                             cfg_.judge.json_attempts);
        const auto& l = reply.at("labels");
        if (l.empty()) return none;
        std::vector<bool> out;
        for (const auto& e : l) out.push_back(e.get<bool>());
        return out;
    } catch (const gateway::JsonShapeFailure&) {
        if (flags) flags->emplace_back(kFlagChallengeUnreadable);
        return none;
    }
}

ChallengeResult Evaluator::challenge_accuracy(const std::vector<BenchQuestion>& questions,
                                              const std::vector<ModelAnswer>& answers) const {
    const auto scored = scored_questions(questions, answers);
    std::map<std::pair<std::string, std::string>, const ModelAnswer*> answer_of;
    std::set<std::string> models;
    for (const auto& a : answers) {
        models.insert(a.model_id);
        answer_of[{a.model_id, a.question_id}] = &a;
    }
    ChallengeResult result;
    for (const auto& m : models) {
        for (const auto* q : scored) {
            ChallengeRecord r;
            r.question_id = q->id;
            r.model_id = m;
            const auto it = answer_of.find({m, q->id});
            if (it != answer_of.end() && !it->second->missing) r.predictions = it->second->ranked_diagnoses;
            if (r.predictions.empty()) r.flags.emplace_back(kFlagMissingAnswer);
            result.records.push_back(std::move(r));
        }
    }
    parallel_for(result.records.size(), [&](std::size_t i) {
        auto& r = result.records[i];
        const auto* q = *std::find_if(scored.begin(), scored.end(),
                                      [&](const BenchQuestion* b) { return b->id == r.question_id; });
        r.labels = judge_challenge(q->true_diagnosis, r.predictions, &r.flags);
        r.hits = topk_hits(r.labels);
    });
    for (const auto& m : models) {
        std::vector<TopKHits> hits;
        for (const auto& r : result.records) {
            if (r.model_id == m) hits.push_back(r.hits);
        }
        if (hits.empty()) continue;
        ChallengeCard c;
        c.model_id = m;
        c.questions = hits.size();
        const auto n = static_cast<double>(hits.size());
        for (const auto& h : hits) {
            c.top1 += h.top1;
            c.top3 += h.top3;
            c.top5 += h.top5;
        }
        c.top1 = 100.0 * c.top1 / n;
        c.top3 = 100.0 * c.top3 / n;
        c.top5 = 100.0 * c.top5 / n;
        c.score = challenge_score(hits);
        result.cards.push_back(c);
    }
    return result;
}

}  // namespace medtrap::evaluate
