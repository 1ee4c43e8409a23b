/// @file generator.cpp

#include "medtrap/generate/generator.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"

namespace medtrap::generate {

using gateway::FieldKind;
using gateway::JsonShape;
using nlohmann::json;

namespace {

using Problems = std::vector<std::string>;

void append(Problems& dst, const Problems& src) { dst.insert(dst.end(), src.begin(), src.end()); }

void add_unique(std::vector<std::string>& flags, const std::string& flag) {
    if (std::find(flags.begin(), flags.end(), flag) == flags.end()) flags.push_back(flag);
}

std::string style_json(const PersonaStyle& s) { return json(s).dump(); }

std::string joined_or_none(const std::vector<std::string>& items) {
    return items.empty() ? "(none)" : text::join(items, ", ");
}

std::vector<std::string> symptom_names(const SeedCase& seed) {
    std::vector<std::string> out;
    for (const auto& s : seed.symptoms) out.push_back(s.name);
    return out;
}

JsonShape single_field(const std::string& key) { return JsonShape().require(key, FieldKind::NonEmptyString); }

std::function<std::string(const json&)> field(const std::string& key) {
    return [key](const json& j) { return text::trim(j.at(key).get<std::string>()); };
}

std::optional<bool> parse_verdict(const json& dim) {
    if (!dim.is_object()) return std::nullopt;
    const auto it = dim.find("verify_result");
    if (it == dim.end() || !it->is_string()) return std::nullopt;
    const auto v = text::normalize(it->get<std::string>());
    if (v == "pass") return true;
    if (v == "fail") return false;
    return std::nullopt;
}

JsonShape verify_shape() {
    JsonShape shape;
    for (auto name : ValidationReport::kDimensions) shape.require(std::string(name), FieldKind::Object);
    shape.check("verdicts", [](const json& j) -> std::optional<std::string> {
        for (auto name : ValidationReport::kDimensions) {
            if (!parse_verdict(j.at(std::string(name)))) {
                return std::string(name) + ".verify_result must be \"Pass\" or \"Fail\"";
            }
        }
        return std::nullopt;
    });
    return shape;
}

JsonShape persona_shape() {
    return JsonShape()
        .require("medical_knowledge", FieldKind::String)
        .require("clarity", FieldKind::String)
        .require("communication_style", FieldKind::String)
        .check("levels", [](const json& j) -> std::optional<std::string> {
            if (!parse_level(j.at("medical_knowledge").get<std::string>())) return "medical_knowledge must be Low, Medium or High";
            if (!parse_level(j.at("clarity").get<std::string>())) return "clarity must be Low, Medium or High";
            if (!parse_comm_style(j.at("communication_style").get<std::string>())) {
                return "communication_style must be Indirect, Neutral or Direct";
            }
            return std::nullopt;
        });
}

}  // namespace

std::vector<TrapDraw> sample_trap_and_distractor(const std::vector<TrapKind>& traps, GenMode mode,
                                                 std::size_t differential_size, Rng& rng) {
    if (traps.empty()) throw std::invalid_argument("sample_trap_and_distractor: empty trap set");
    if (differential_size == 0) throw std::invalid_argument("sample_trap_and_distractor: empty differential");
    std::vector<TrapDraw> out;
    if (mode == GenMode::Benchmark) {
        for (auto t : traps) out.push_back({t, rng.uniform_index(differential_size)});
    } else {
        const auto t = traps[rng.uniform_index(traps.size())];
        out.push_back({t, rng.uniform_index(differential_size)});
    }
    return out;
}

std::string refinement_instruction(double eta) {
    if (eta <= 0.3 + 1e-9) {
        return "Make the smallest edits that fix the failed aspects and leave every other sentence as it is.";
    }
    if (eta <= 0.6 + 1e-9) {
        return "Rewrite the sentences involved in the failed aspects; keep the overall structure of the question.";
    }
    return "Restructure the question as needed, as long as the trap, the patient style and the misleading knowledge "
           "remain.";
}

std::string format_eta(double eta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eta);
    return buf;
}

Generator::Generator(gateway::Gateway& gw, const PromptCatalog& prompts, const knowledge::KnowledgeBase& kb,
                     GenConfig cfg)
    : gw_(gw), prompts_(prompts), cfg_(std::move(cfg)), deriver_(gw, prompts, kb, cfg_.generator, cfg_.judge) {
    cfg_.validate();
}

SymptomLexicon Generator::lexicon() const {
    SymptomLexicon lex;
    for (const auto& [k, v] : cfg_.symptom_synonyms) lex.synonyms[text::normalize(k)] = v;
    lex.heldout = cfg_.heldout_symptoms;
    return lex;
}

std::string Generator::symptom_list(const SeedCase& seed) const {
    std::string out;
    for (const auto& s : seed.symptoms) {
        out += "- " + s.name;
        if (s.severity) out += "; severity: " + prompts_.severity().word_for(*s.severity);
        if (s.duration) out += "; duration: " + *s.duration;
        if (s.frequency) out += "; frequency: " + *s.frequency;
        if (s.triggers) out += "; triggers: " + *s.triggers;
        out += "\n";
    }
    return out;
}

StageText Generator::guarded_stage(const std::string& tag, const std::string& prompt, const JsonShape& shape,
                                   const std::function<std::string(const json&)>& extract,
                                   const std::function<Problems(const std::string&)>& guard) const {
    const auto& gen = cfg_.generator;
    const auto first = gw_.complete_json(gateway::single_turn(gen, tag, prompt), shape, gen.json_attempts);
    StageText out{extract(first), {}};
    auto problems = guard(out.text);
    if (problems.empty()) return out;

    const auto note = "Your reply has these problems: " + text::join(problems, "; ") +
                      ". Fix them and reply again in the same JSON format.";
    try {
        const auto second = gw_.complete_json(gateway::follow_up(gen, tag, prompt, first.dump(), note), shape,
                                              gen.json_attempts);
        auto retry_text = extract(second);
        auto retry_problems = guard(retry_text);
        if (retry_problems.empty()) return {std::move(retry_text), {}};
        out.text = std::move(retry_text);
        problems = std::move(retry_problems);
    } catch (const gateway::JsonShapeFailure&) {
    }
    for (const auto& p : problems) out.flags.push_back("guard:" + tag + ":" + p);
    return out;
}

StageText Generator::synthesize_raw_question(const SeedCase& seed) const {
    const auto prompt =
        prompts_.render("raw", {{"pronoun_tone", cfg_.pronoun_tone}, {"symptoms", symptom_list(seed)}});
    const auto shape =
        JsonShape().require("description", FieldKind::NonEmptyString).require("question", FieldKind::String);
    const auto lex = lexicon();
    return guarded_stage(
        "raw", prompt, shape,
        [](const json& j) {
            const auto description = text::trim(j.at("description").get<std::string>());
            const auto question = text::trim(j.at("question").get<std::string>());
            return question.empty() ? description : description + " " + question;
        },
        [&](const std::string& t) {
            auto p = check_symptoms(t, seed, lex);
            append(p, check_severity(t, seed, prompts_.severity()));
            return p;
        });
}

StageText Generator::apply_trap(const std::string& question, TrapKind trap,
                                const knowledge::DiagnosisProfile& distractor, const SeedCase& seed) const {
    const auto& tt = prompts_.trap(trap);
    const auto prompt = prompts_.render("trap", {{"raw_question", question},
                                                 {"org_symptoms_lst", text::join(symptom_names(seed), ", ")},
                                                 {"refer_diagnosis", seed.true_diagnosis},
                                                 {"trap_type_name", tt.name},
                                                 {"trap_desc", tt.description},
                                                 {"distractor_diagnosis", distractor.name},
                                                 {"trap_task_description", tt.task}});
    const auto lex = lexicon();
    return guarded_stage("trap", prompt, single_field("TrapQuestion"), field("TrapQuestion"),
                         [&](const std::string& t) {
                             auto p = check_symptoms(t, seed, lex);
                             if (trap == TrapKind::SelfDiagnosis) append(p, check_distractor(t, distractor.name));
                             return p;
                         });
}

ExtractedStyle Generator::extract_persona(const PersonaDescriptor& persona) const {
    const auto prompt = prompts_.render("persona_extract", {{"persona", persona.description}});
    auto settings = cfg_.generator;
    settings.temperature = 0.0;
    try {
        const auto reply = gw_.complete_json(gateway::single_turn(settings, "persona_extract", prompt),
                                             persona_shape(), settings.json_attempts);
        return {PersonaStyle{*parse_level(reply.at("medical_knowledge").get<std::string>()),
                             *parse_level(reply.at("clarity").get<std::string>()),
                             *parse_comm_style(reply.at("communication_style").get<std::string>())},
                {}};
    } catch (const gateway::JsonShapeFailure&) {
        return {PersonaStyle{}, {"persona-style-default"}};
    }
}

StyledText Generator::apply_style(const std::string& question, const PersonaDescriptor& persona,
                                  const SeedCase& seed) const {
    auto extracted = extract_persona(persona);
    const auto prompt =
        prompts_.render("style", {{"raw_question", question}, {"patient_style", style_json(extracted.style)}});
    const auto lex = lexicon();
    const auto leak_terms = persona.leak_terms();
    auto stage = guarded_stage("style", prompt, single_field("PolishedPatientQuestion"),
                               field("PolishedPatientQuestion"), [&](const std::string& t) {
                                   auto p = check_symptoms(t, seed, lex);
                                   append(p, check_persona_leak(t, leak_terms));
                                   return p;
                               });
    StyledText out{std::move(stage.text), extracted.style, std::move(extracted.flags)};
    append(out.flags, stage.flags);
    return out;
}

StageText Generator::insert_rumor(const std::string& question, const RumorFactPair& pair, const SeedCase& seed) const {
    if (!pair.valid) throw std::invalid_argument("insert_rumor: rumor-fact pair has not passed the validity check");
    const auto prompt =
        prompts_.render("rumor_insert", {{"raw_question", question}, {"misleading_knowledge", pair.rumor}});
    const auto lex = lexicon();
    return guarded_stage("rumor_insert", prompt, single_field("RumoredQuestion"), field("RumoredQuestion"),
                         [&](const std::string& t) {
                             auto p = check_symptoms(t, seed, lex);
                             append(p, check_rumor(t, pair));
                             return p;
                         });
}

ValidationReport Generator::validate(const CandidateBundle& b) const {
    const auto prompt = prompts_.render("verify", {{"question", b.question},
                                                   {"refer_diagnosis", b.seed.true_diagnosis},
                                                   {"org_symptoms_lst", text::join(symptom_names(b.seed), ", ")},
                                                   {"distractor_diagnosis", b.distractor.name},
                                                   {"trap_type_name", prompts_.trap(b.trap).name},
                                                   {"selected_symptoms", joined_or_none(b.distractor.symptoms)},
                                                   {"patient_desc", b.persona.description},
                                                   {"patient_style", style_json(b.style)},
                                                   {"misleading_knowledge", b.rumor.rumor}});
    ValidationReport report;
    try {
        const auto reply = gw_.complete_json(gateway::single_turn(cfg_.judge, "verify", prompt), verify_shape(),
                                             cfg_.judge.json_attempts);
        for (auto name : ValidationReport::kDimensions) {
            const auto& dim = reply.at(std::string(name));
            auto& v = report.dimension(name);
            v.pass = *parse_verdict(dim);
            const auto a = dim.find("assessment");
            v.assessment = (a != dim.end() && a->is_string()) ? a->get<std::string>() : std::string{};
        }
    } catch (const gateway::JsonShapeFailure&) {
        for (auto name : ValidationReport::kDimensions) report.dimension(name) = {"validator unreadable", false};
    }
    return report;
}

RefineOutcome Generator::refine(const CandidateBundle& b, const ValidationReport& report, double eta) const {
    if (report.pass()) throw std::invalid_argument("refine: the report already passes");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("refine: eta must be in [0,1]");
    const auto prompt = prompts_.render("optimize", {{"raw_question", b.question},
                                                     {"refer_diagnosis", b.seed.true_diagnosis},
                                                     {"org_symptoms_lst", text::join(symptom_names(b.seed), ", ")},
                                                     {"distractor_diagnosis", b.distractor.name},
                                                     {"selected_symptoms", joined_or_none(b.distractor.symptoms)},
                                                     {"patient_desc", b.persona.description},
                                                     {"patient_style", style_json(b.style)},
                                                     {"trap_question", b.trapped_question},
                                                     {"misleading_knowledge", b.rumor.rumor},
                                                     {"eta_value", format_eta(eta)},
                                                     {"refinement_instruction", refinement_instruction(eta)},
                                                     {"reason", report.failure_summary()}});
    const auto shape = single_field("refined_question");
    const auto lex = lexicon();
    const auto guard = [&](const std::string& t) {
        auto p = check_symptoms(t, b.seed, lex);
        append(p, check_rumor(t, b.rumor));
        return p;
    };
    const auto& gen = cfg_.generator;
    auto explanation_of = [](const json& j) {
        const auto it = j.find("gradient_explanation");
        return (it != j.end() && it->is_string()) ? it->get<std::string>() : std::string{};
    };

    json first;
    try {
        first = gw_.complete_json(gateway::single_turn(gen, "optimize", prompt), shape, gen.json_attempts);
    } catch (const gateway::JsonShapeFailure&) {
        return {b.question, {}, {"refine-unreadable"}};
    }
    auto candidate = text::trim(first.at("refined_question").get<std::string>());
    auto problems = guard(candidate);
    if (problems.empty()) return {candidate, explanation_of(first), {}};

    const auto note = "Your revision has these problems: " + text::join(problems, "; ") +
                      ". Fix them and reply again in the same JSON format.";
    try {
        const auto second =
            gw_.complete_json(gateway::follow_up(gen, "optimize", prompt, first.dump(), note), shape, gen.json_attempts);
        candidate = text::trim(second.at("refined_question").get<std::string>());
        auto retry = guard(candidate);
        if (retry.empty()) return {candidate, explanation_of(second), {}};
        problems = std::move(retry);
    } catch (const gateway::JsonShapeFailure&) {
    }
    RefineOutcome kept{b.question, explanation_of(first), {}};
    for (const auto& p : problems) kept.flags.push_back("guard:optimize:" + p);
    return kept;
}

OptimizeResult Generator::pgd_optimize(const CandidateBundle& bundle) const {
    OptimizeResult out;
    auto current = bundle;
    for (int t = 0; t < cfg_.max_refine_iterations; ++t) {
        auto report = validate(current);
        if (report.pass()) {
            out.iterations.push_back({std::move(report), std::nullopt, std::nullopt});
            out.validated = true;
            break;
        }
        const double eta = cfg_.eta_schedule[static_cast<size_t>(t)];
        auto refined = refine(current, report, eta);
        for (const auto& f : refined.flags) add_unique(out.flags, f);
        out.iterations.push_back({std::move(report), refined.text, eta});
        current.question = std::move(refined.text);
    }
    out.text = current.question;
    if (!out.validated) add_unique(out.flags, std::string(kFlagUnvalidated));
    return out;
}

std::optional<RumorFactPair> Generator::select_rumor(const std::string& entity, json* audit) const {
    auto set = deriver_.rumor_fact_pairs(entity, cfg_.rumor_pool_size);
    int checked = 0;
    std::optional<RumorFactPair> chosen;
    for (auto& pair : set.pairs) {
        ++checked;
        if (deriver_.validity_check(pair)) {
            pair.valid = true;
            chosen = pair;
            break;
        }
    }
    if (audit) {
        *audit = json{{"candidates", set.pairs.size()}, {"checked", checked}, {"flags", set.flags}};
        if (chosen) (*audit)["selected"] = chosen->rumor;
    }
    return chosen;
}

std::vector<BenchQuestion> Generator::generate_seed(const SeedCase& seed, json& audit,
                                                    std::vector<std::string>& failures) const {
    auto rng = Rng::derive(cfg_.rng_seed, seed.id);
    const auto raw = synthesize_raw_question(seed);

    const auto diff = deriver_.differential_diagnoses(seed.true_diagnosis, cfg_.differential_count);
    json similar = json::array();
    for (const auto& d : diff.similar) similar.push_back(d.name);
    audit["differential"] = {{"similar", similar}, {"flags", diff.flags}, {"suspect_hierarchy", diff.suspect_hierarchy}};
    if (diff.similar.empty()) throw std::runtime_error("no usable differential diagnoses");

    json rumor_audit;
    const auto rumor = select_rumor(seed.medical_entity, &rumor_audit);
    audit["rumor"] = rumor_audit;
    if (!rumor) throw std::runtime_error("no valid rumor-fact pair for '" + seed.medical_entity + "'");

    const auto draws = sample_trap_and_distractor(cfg_.traps, cfg_.mode, diff.similar.size(), rng);
    const auto personas = cfg_.personas();
    std::vector<std::size_t> persona_index;
    for (size_t i = 0; i < draws.size(); ++i) persona_index.push_back(rng.uniform_index(personas.size()));

    std::vector<std::string> seed_flags = raw.flags;
    for (const auto& f : diff.flags) add_unique(seed_flags, f);
    for (const auto& f : rumor_audit.at("flags")) add_unique(seed_flags, f.get<std::string>());

    std::vector<BenchQuestion> out;
    for (size_t i = 0; i < draws.size(); ++i) {
        const auto& draw = draws[i];
        const auto& distractor = diff.similar[draw.distractor_index];
        const auto& persona = personas[persona_index[i]];
        const auto id = seed.id + "-" + std::string(trap_slug(draw.trap));
        try {
            PipelineTrace trace;
            trace.flags = seed_flags;
            trace.raw_text = raw.text;
            const auto trapped = apply_trap(raw.text, draw.trap, distractor, seed);
            trace.trapped_text = trapped.text;
            const auto styled = apply_style(trapped.text, persona, seed);
            trace.styled_text = styled.text;
            const auto rumored = insert_rumor(styled.text, *rumor, seed);
            trace.rumored_text = rumored.text;
            for (const auto* flags : {&trapped.flags, &styled.flags, &rumored.flags}) {
                for (const auto& f : *flags) add_unique(trace.flags, f);
            }

            CandidateBundle bundle{seed, rumored.text, trapped.text, draw.trap, distractor, persona, styled.style, *rumor};
            auto opt = pgd_optimize(bundle);
            trace.iterations = std::move(opt.iterations);
            trace.validated = opt.validated;
            for (const auto& f : opt.flags) add_unique(trace.flags, f);

            ScorePoints points;
            for (auto c : kAllCriteria) {
                auto list = deriver_.derive_score_points(seed.true_diagnosis, opt.text, c, cfg_.scorepoint_count);
                points.at(c) = std::move(list.points);
                for (const auto& f : list.flags) add_unique(trace.flags, f);
            }

            BenchQuestion q;
            q.id = id;
            q.seed_id = seed.id;
            q.text = opt.text;
            q.true_diagnosis = seed.true_diagnosis;
            q.distractor_diagnosis = distractor.name;
            q.trap = draw.trap;
            q.persona = styled.style;
            q.rumor_pair = *rumor;
            q.score_points = std::move(points);
            q.provenance = std::move(trace);
            medtrap::validate(q);
            out.push_back(std::move(q));
        } catch (const std::exception& e) {
            failures.push_back(id + ": " + e.what());
        }
    }
    return out;
}

GenerationResult Generator::generate_benchmark(const std::vector<SeedCase>& seeds) const {
    struct Outcome {
        std::vector<BenchQuestion> questions;
        json audit = json::object();
        std::vector<std::string> failures;
        std::optional<std::string> error;
    };
    std::vector<Outcome> outcomes(seeds.size());
    const auto before = gw_.stats();

    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < seeds.size(); i = next++) {
            auto& o = outcomes[i];
            try {
                o.questions = generate_seed(seeds[i], o.audit, o.failures);
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    const auto n_threads = std::min<size_t>(static_cast<size_t>(cfg_.workers), std::max<size_t>(seeds.size(), 1));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    const auto after = gw_.stats();

    GenerationResult result;
    json flags = json::object();
    json seed_failures = json::array();
    json question_failures = json::array();
    json audits = json::object();
    size_t validated = 0;
    for (size_t i = 0; i < seeds.size(); ++i) {
        auto& o = outcomes[i];
        audits[seeds[i].id] = o.audit;
        if (o.error) seed_failures.push_back({{"seed_id", seeds[i].id}, {"error", *o.error}});
        for (const auto& f : o.failures) question_failures.push_back(f);
        for (auto& q : o.questions) {
            if (!q.provenance.flags.empty()) flags[q.id] = q.provenance.flags;
            if (q.provenance.validated) ++validated;
            result.questions.push_back(std::move(q));
        }
    }
    json calls = json::object();
    for (const auto& [tag, n] : after.requests_by_tag) {
        const auto it = before.requests_by_tag.find(tag);
        const auto prior = it == before.requests_by_tag.end() ? 0 : it->second;
        if (n > prior) calls[tag] = n - prior;
    }
    json per_trap = json::object();
    for (const auto& q : result.questions) {
        auto& slot = per_trap[std::string(trap_slug(q.trap))];
        slot = slot.is_null() ? 1 : slot.get<int>() + 1;
    }
    result.manifest = json{{"schema_version", std::string(kSchemaVersion)},
                           {"config", to_json(cfg_)},
                           {"config_digest", config_digest(cfg_)},
                           {"rng_seed", cfg_.rng_seed},
                           {"prompt_digest", prompts_.digest()},
                           {"language", prompts_.language()},
                           {"seeds", seeds.size()},
                           {"questions", result.questions.size()},
                           {"validated", validated},
                           {"unvalidated", result.questions.size() - validated},
                           {"questions_per_trap", per_trap},
                           {"calls_by_stage", calls},
                           {"flags", flags},
                           {"seed_failures", seed_failures},
                           {"question_failures", question_failures},
                           {"seed_audit", audits}};
    return result;
}

}  // namespace medtrap::generate
