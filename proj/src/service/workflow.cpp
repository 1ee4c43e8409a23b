/// @file workflow.cpp

#include "medtrap/service/workflow.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "medtrap/analytics/agreement.hpp"
#include "medtrap/analytics/bleu.hpp"
#include "medtrap/analytics/delta.hpp"
#include "medtrap/analytics/diversity.hpp"
#include "medtrap/analytics/significance.hpp"
#include "medtrap/core/digest.hpp"
#include "medtrap/core/seed.hpp"
#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include "medtrap/evaluate/evaluator.hpp"
#include "medtrap/evaluate/metrics.hpp"
#include "medtrap/generate/generator.hpp"
#include "medtrap/knowledge/knowledge_base.hpp"

namespace medtrap::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json input_ref(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw ValidationError("input not found: " + p.string());
    return json{{"file", p.filename().string()}, {"sha256", file_digest(p)}};
}

std::vector<BenchQuestion> load_questions(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw ValidationError("questions: file not found: " + p.string());
    return parse_dataset(read_file(p));
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

json run_config_ref(const RunConfig& cfg) {
    const auto rc = to_json(cfg);
    json ref{{"run_config", rc}, {"run_config_digest", sha256_hex(rc.dump())}};
    if (cfg.scripted_fixtures) ref["fixtures_digest"] = file_digest(*cfg.scripted_fixtures);
    return ref;
}

// Runs fn(i) for i in [0, n) across `workers` threads; the first exception
// is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto threads = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto loop = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(loop);
    loop();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

GenerateSummary run_generate(const RunConfig& cfg, gateway::Gateway& gw, const GenerateOptions& opts) {
    auto gen_cfg = cfg.gen;
    if (opts.traps) gen_cfg.traps = *opts.traps;
    if (opts.rng_seed) gen_cfg.rng_seed = *opts.rng_seed;
    const auto seeds = load_seeds(opts.seeds);
    const auto prompts = PromptCatalog::load(cfg.prompt_dir, cfg.language);
    const auto kb = knowledge::KnowledgeBase::load(cfg.knowledge_dir);
    const generate::Generator gen(gw, prompts, kb, gen_cfg);
    auto result = gen.generate_benchmark(seeds);

    auto& m = result.manifest;
    m["inputs"] = {{"seeds", input_ref(opts.seeds)},
                   {"knowledge_digest", directory_digest(cfg.knowledge_dir)},
                   {"prompt_digest", prompts.digest()}};
    m.update(run_config_ref(cfg));

    fs::create_directories(opts.out_dir);
    GenerateSummary s;
    s.questions_path = opts.out_dir / "questions.jsonl";
    s.manifest_path = opts.out_dir / "manifest.json";
    write_file_atomic(s.questions_path, serialize_dataset(result.questions));
    write_file_atomic(s.manifest_path, dump_pretty(m));
    s.seeds = seeds.size();
    s.questions = result.questions.size();
    s.unvalidated = m.at("unvalidated").get<std::size_t>();
    s.seed_failures = m.at("seed_failures").size();
    return s;
}

AnswerSummary run_answer(const RunConfig& cfg, gateway::Gateway& gw, const AnswerOptions& opts) {
    if (opts.model_id.empty()) throw ValidationError("answer: model id must be non-empty");
    if (!gw.has_backend(opts.model_id)) throw ValidationError("answer: no backend for model '" + opts.model_id + "'");
    const auto questions = load_questions(opts.questions);
    const auto prompts = PromptCatalog::load(cfg.prompt_dir, cfg.language);
    const evaluate::Evaluator ev(gw, prompts, cfg.eval);

    // Answers from an earlier, possibly interrupted, run. A torn final line is
    // ignored; other answers for other models are preserved.
    std::map<std::string, ModelAnswer> done;
    std::vector<ModelAnswer> others;
    bool torn_tail = false;
    if (fs::exists(opts.out)) {
        const auto existing = read_file(opts.out);
        torn_tail = !existing.empty() && existing.back() != '\n';
        for (const auto& line : text::split(existing, '\n')) {
            if (text::trim(line).empty()) continue;
            const auto j = json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            auto a = j.get<ModelAnswer>();
            if (a.model_id != opts.model_id) {
                others.push_back(std::move(a));
            } else if (!a.missing && (!opts.challenge || !a.ranked_diagnoses.empty())) {
                done[a.question_id] = std::move(a);
            }
        }
    }

    AnswerSummary s;
    std::vector<const BenchQuestion*> todo;
    for (const auto& q : questions) {
        if (q.flagged() && !opts.include_flagged) {
            ++s.skipped_flagged;
        } else if (done.count(q.id)) {
            ++s.resumed;
        } else {
            todo.push_back(&q);
        }
    }

    if (!opts.out.parent_path().empty()) fs::create_directories(opts.out.parent_path());
    std::mutex mu;
    std::ofstream log(opts.out, std::ios::binary | std::ios::app);
    if (!log) throw std::runtime_error("answer: cannot write " + opts.out.string());
    if (torn_tail) log << "\n";
    std::vector<ModelAnswer> fresh(todo.size());
    parallel_for(todo.size(), cfg.eval.workers, [&](std::size_t i) {
        fresh[i] = ev.collect_answer(opts.model_id, *todo[i], opts.challenge);
        std::lock_guard lock(mu);
        log << to_jsonl_line(fresh[i]);
        log.flush();
    });
    log.close();

    for (auto& a : fresh) {
        if (a.missing) ++s.failed;
        ++s.answered;
        done[a.question_id] = std::move(a);
    }
    std::vector<ModelAnswer> ordered = std::move(others);
    for (const auto& q : questions) {
        if (const auto it = done.find(q.id); it != done.end()) ordered.push_back(it->second);
    }
    write_file_atomic(opts.out, to_jsonl<ModelAnswer>(ordered));
    return s;
}

json run_evaluate(const RunConfig& cfg, gateway::Gateway& gw, const EvaluateOptions& opts) {
    const auto questions = load_questions(opts.questions);
    if (!fs::is_regular_file(opts.answers)) throw ValidationError("answers: file not found: " + opts.answers.string());
    const auto answers = parse_jsonl_as<ModelAnswer>(read_file(opts.answers));
    const auto prompts = PromptCatalog::load(cfg.prompt_dir, cfg.language);
    const evaluate::Evaluator ev(gw, prompts, cfg.eval);
    fs::create_directories(opts.out_dir);

    json doc{{"schema_version", std::string(kSchemaVersion)},
             {"inputs", {{"questions", input_ref(opts.questions)}, {"answers", input_ref(opts.answers)}}},
             {"evaluation", evaluate::to_json(cfg.eval)},
             {"prompt_digest", prompts.digest()}};
    if (opts.challenge) {
        const auto r = ev.challenge_accuracy(questions, answers);
        std::string lines;
        for (const auto& rec : r.records) {
            auto j = evaluate::to_json(rec);
            j["schema_version"] = std::string(kSchemaVersion);
            lines += j.dump() + "\n";
        }
        json cards = json::array();
        for (const auto& c : r.cards) cards.push_back(evaluate::to_json(c));
        doc["challenge_cards"] = cards;
        write_file_atomic(opts.out_dir / "challenge_records.jsonl", lines);
        write_file_atomic(opts.out_dir / "challenge_cards.json", dump_pretty(doc));
        return doc;
    }
    const auto r = ev.evaluate(questions, answers);
    doc["scorecards"] = r.scorecards;
    write_file_atomic(opts.out_dir / "eval_records.jsonl", to_jsonl<EvalRecord>(r.records));
    write_file_atomic(opts.out_dir / "prediction_groups.jsonl", to_jsonl<PredictionGroup>(r.groups));
    write_file_atomic(opts.out_dir / "scorecards.json", dump_pretty(doc));
    return doc;
}

std::optional<SignificanceMetric> parse_significance_metric(const std::string& s) {
    if (s == "acc") return SignificanceMetric::Acc;
    if (s == "ver") return SignificanceMetric::Ver;
    if (s == "help") return SignificanceMetric::Help;
    return std::nullopt;
}

std::vector<std::pair<std::string, std::vector<std::string>>> read_text_groups(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ValidationError("groups: file not found: " + path.string());
    std::map<std::string, std::vector<std::string>> by_seed;
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::size_t line_no = 0;
    for (const auto& j : parse_jsonl(read_file(path))) {
        ++line_no;
        if (j.contains("texts")) {
            out.emplace_back(j.value("group", "group-" + std::to_string(line_no)),
                             j.at("texts").get<std::vector<std::string>>());
        } else if (j.contains("seed_id") && j.contains("text")) {
            by_seed[j.at("seed_id").get<std::string>()].push_back(j.at("text").get<std::string>());
        } else {
            throw ValidationError("groups: line " + std::to_string(line_no) + " has neither texts nor seed_id/text");
        }
    }
    for (auto& [seed, texts] : by_seed) out.emplace_back(seed, std::move(texts));
    return out;
}

json run_analyze(const AnalyzeOptions& opts, const RunConfig* cfg, gateway::Gateway* gw) {
    json report{{"schema_version", std::string(kSchemaVersion)}};

    if (!opts.deltas.empty()) {
        json rows = json::array();
        for (const auto& [s, d] : opts.deltas) {
            rows.push_back({{"static", s},
                            {"dynamic", d},
                            {"relative_delta", analytics::relative_delta(s, d)},
                            {"relative_delta_exact", analytics::relative_delta_exact(s, d)}});
        }
        report["delta"] = rows;
    }

    if (opts.self_bleu) {
        json groups = json::array();
        double sum = 0.0;
        std::size_t scored = 0;
        for (const auto& [name, texts] : read_text_groups(*opts.self_bleu)) {
            if (texts.size() < 2) {
                groups.push_back({{"group", name}, {"size", texts.size()}, {"skipped", "fewer than two texts"}});
                continue;
            }
            const double sb = analytics::self_bleu(texts);
            groups.push_back({{"group", name}, {"size", texts.size()}, {"self_bleu", sb}, {"diversity", 1.0 - sb}});
            sum += 1.0 - sb;
            ++scored;
        }
        report["self_bleu"] = {{"input", input_ref(*opts.self_bleu)},
                               {"groups", groups},
                               {"mean_diversity", scored ? json(sum / static_cast<double>(scored)) : json(nullptr)}};
    }

    if (opts.ac1) {
        auto m = analytics::read_rating_csv(*opts.ac1, opts.ac1_task_kind);
        if (!opts.ac1_categories.empty()) {
            m.categories = opts.ac1_categories;
            m.validate();
        }
        const auto t = analytics::gwet_ac1_terms(m);
        report["ac1"] = {{"input", input_ref(*opts.ac1)},
                         {"task_kind", opts.ac1_task_kind ? json(*opts.ac1_task_kind) : json(nullptr)},
                         {"items", m.items.size()},
                         {"raters", m.raters.size()},
                         {"categories", m.category_set()},
                         {"pa", t.pa},
                         {"pe", t.pe},
                         {"ac1", t.ac1}};
    }

    if (opts.significance) {
        const auto& req = *opts.significance;
        if (!fs::is_regular_file(req.records)) throw ValidationError("records: file not found: " + req.records.string());
        const auto weights = cfg ? cfg->eval.weights : evaluate::EvalConfig{}.weights;
        std::map<std::string, double> a, b;
        for (const auto& r : parse_jsonl_as<EvalRecord>(read_file(req.records))) {
            double v = 0.0;
            switch (req.metric) {
                case SignificanceMetric::Acc: v = r.acc_sub == 100 ? 1.0 : 0.0; break;
                case SignificanceMetric::Ver: v = r.ver_rectified ? 1.0 : 0.0; break;
                case SignificanceMetric::Help: v = evaluate::help_value(r.help_sub, weights) / 100.0; break;
            }
            if (r.model_id == req.model_a) a[r.question_id] = v;
            if (r.model_id == req.model_b) b[r.question_id] = v;
        }
        std::vector<double> va, vb;
        for (const auto& [qid, v] : a) {
            if (const auto it = b.find(qid); it != b.end()) {
                va.push_back(v);
                vb.push_back(it->second);
            }
        }
        if (va.empty()) {
            throw ValidationError("significance: no question scored for both " + req.model_a + " and " + req.model_b);
        }
        const auto r = analytics::bootstrap_significance(va, vb, req.fraction, req.runs, opts.rng_seed);
        const char* metric = req.metric == SignificanceMetric::Acc ? "acc"
                             : req.metric == SignificanceMetric::Ver ? "ver"
                                                                     : "help";
        report["significance"] = {{"input", input_ref(req.records)},
                                  {"metric", metric},
                                  {"model_a", req.model_a},
                                  {"model_b", req.model_b},
                                  {"paired_items", va.size()},
                                  {"fraction", req.fraction},
                                  {"runs", req.runs},
                                  {"subset_size", r.subset_size},
                                  {"rng_seed", opts.rng_seed},
                                  {"mean_a", r.mean_a},
                                  {"mean_b", r.mean_b},
                                  {"t", std::isfinite(r.t) ? json(r.t) : json(r.t > 0 ? "inf" : "-inf")},
                                  {"p", r.p}};
    }

    if (opts.expression || opts.diagnoses) {
        if (!cfg || !gw) throw ValidationError("analyze: --expression and --diagnoses need --config");
        const auto prompts = PromptCatalog::load(cfg->prompt_dir, cfg->language);
        const analytics::StyleAnalyzer an(*gw, prompts, cfg->eval.judge);
        auto texts_of = [](const fs::path& p) {
            std::vector<std::string> t;
            for (const auto& q : load_questions(p)) t.push_back(q.text);
            return t;
        };
        if (opts.expression) {
            const auto [dist, flags] = an.style_distribution(texts_of(*opts.expression));
            json hist = json::object();
            const char* dims[] = {"medical_knowledge", "clarity", "communication_style"};
            for (std::size_t d = 0; d < 3; ++d) hist[dims[d]] = dist.counts[d];
            report["expression_diversity"] = {
                {"input", input_ref(*opts.expression)},
                {"texts", dist.total},
                {"histograms", hist},
                {"diversity", dist.total ? json(analytics::expression_diversity(dist)) : json(nullptr)},
                {"flags", flags}};
        }
        if (opts.diagnoses) {
            const auto d = an.diagnosis_diversity(texts_of(*opts.diagnoses));
            report["diagnosis_diversity"] = {{"input", input_ref(*opts.diagnoses)},
                                             {"unique", d.unique},
                                             {"diagnoses", d.diagnoses},
                                             {"flags", d.flags}};
        }
    }
    if (report.size() == 1) throw ValidationError("analyze: no statistic requested");
    return report;
}

}  // namespace medtrap::service
