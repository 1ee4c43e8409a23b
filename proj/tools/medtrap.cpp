/// @file medtrap.cpp
/// @brief Command-line entry point: generate | answer | evaluate | analyze | annotate.

#include <csignal>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include "medtrap/core/types.hpp"
#include "medtrap/service/annotation.hpp"
#include "medtrap/service/annotation_server.hpp"
#include "medtrap/service/run_config.hpp"
#include "medtrap/service/workflow.hpp"

namespace fs = std::filesystem;
using namespace medtrap;
using namespace medtrap::service;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string backend;
};

std::optional<fs::path> scripted_override(const Globals& g) {
    if (g.backend.empty()) return std::nullopt;
    constexpr std::string_view prefix = "scripted:";
    if (g.backend.rfind(prefix, 0) != 0) {
        throw ValidationError("--backend: expected scripted:<fixtures>, got '" + g.backend + "'");
    }
    return fs::path(g.backend.substr(prefix.size()));
}

RunConfig require_config(const Globals& g) {
    if (g.config.empty()) throw ValidationError("--config is required for this command");
    return load_run_config(g.config, scripted_override(g));
}

fs::path out_dir_or(const std::string& flag, const RunConfig& cfg) {
    if (!flag.empty()) return flag;
    return cfg.output_dir.value_or(fs::current_path());
}

std::vector<TrapKind> parse_traps(const std::string& list) {
    std::vector<TrapKind> out;
    for (const auto& part : text::split(list, ',')) {
        const auto name = text::trim(part);
        if (name.empty()) continue;
        const auto t = parse_trap(name);
        if (!t) throw ValidationError("--traps: unknown trap '" + name + "'");
        out.push_back(*t);
    }
    if (out.empty()) throw ValidationError("--traps: no trap named");
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& part : text::split(s, ',')) {
        const auto v = text::trim(part);
        if (!v.empty()) out.push_back(v);
    }
    return out;
}

int serve(AnnotationStore& store, const std::string& host, int port) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    AnnotationServer server(store);
    const int bound = server.bind(host, port);
    std::cout << "annotation service listening on http://" << host << ":" << bound << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    server.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trap-based medical QA benchmark: generation, evaluation and analysis"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Run configuration JSON");
    app.add_option("--seed", g.seed, "RNG seed (generation, bootstrap, annotation order)");
    app.add_option("--backend", g.backend, "Backend override: scripted:<fixtures.json>");

    // generate
    auto* gen = app.add_subcommand("generate", "Generate trap questions from seed cases");
    std::string gen_seeds, gen_out, gen_traps;
    gen->add_option("--seeds", gen_seeds, "Seed cases JSONL")->required();
    gen->add_option("--out", gen_out, "Output directory (questions.jsonl, manifest.json)");
    gen->add_option("--traps", gen_traps, "Comma-separated trap names or slugs");

    // answer
    auto* ans = app.add_subcommand("answer", "Collect candidate model answers");
    std::string ans_questions, ans_model, ans_out;
    bool ans_challenge = false, ans_flagged = false;
    ans->add_option("--questions", ans_questions, "Questions JSONL")->required();
    ans->add_option("--model", ans_model, "Candidate model id")->required();
    ans->add_option("--out", ans_out, "Answers JSONL (appended to and resumed)");
    ans->add_flag("--challenge", ans_challenge, "Ask for ranked diagnosis lists");
    ans->add_flag("--include-flagged", ans_flagged, "Also answer unvalidated questions");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score answers against questions");
    std::string ev_questions, ev_answers, ev_out;
    bool ev_challenge = false;
    ev->add_option("--questions", ev_questions, "Questions JSONL")->required();
    ev->add_option("--answers", ev_answers, "Answers JSONL")->required();
    ev->add_option("--out", ev_out, "Output directory");
    ev->add_flag("--challenge", ev_challenge, "Top-k accuracy over ranked lists");

    // analyze
    auto* an = app.add_subcommand("analyze", "Diversity, deltas, significance and agreement statistics");
    std::vector<std::pair<double, double>> deltas;
    std::string an_selfbleu, an_ac1, an_task_kind, an_categories, an_sig, an_models, an_metric = "acc";
    std::string an_expression, an_diagnoses, an_out;
    double an_fraction = 0.8;
    int an_runs = 10;
    an->add_option("--delta", deltas, "STATIC DYNAMIC pair; repeatable");
    an->add_option("--selfbleu", an_selfbleu, "Text groups JSONL or questions JSONL");
    an->add_option("--ac1", an_ac1, "Rating CSV (long or wide)");
    an->add_option("--task-kind", an_task_kind, "Filter long-format CSV rows by task_kind");
    an->add_option("--categories", an_categories, "Comma-separated declared categories for AC1");
    an->add_option("--significance", an_sig, "eval_records.jsonl for a paired bootstrap");
    an->add_option("--models", an_models, "MODEL_A,MODEL_B for --significance");
    an->add_option("--metric", an_metric, "acc | ver | help")->check(CLI::IsMember({"acc", "ver", "help"}));
    an->add_option("--fraction", an_fraction, "Bootstrap subset fraction");
    an->add_option("--runs", an_runs, "Bootstrap runs");
    an->add_option("--expression", an_expression, "Questions JSONL for expression diversity (judge)");
    an->add_option("--diagnoses", an_diagnoses, "Questions JSONL for diagnosis diversity (judge)");
    an->add_option("--out", an_out, "Write the report JSON here as well as stdout");

    // annotate
    auto* ann = app.add_subcommand("annotate", "Human-study annotation service");
    ann->require_subcommand(1);
    std::string ann_tasks, ann_log, ann_host = "127.0.0.1", ann_out;
    int ann_port = 8080;
    auto* ann_serve = ann->add_subcommand("serve", "Serve the annotation HTTP API");
    ann_serve->add_option("--tasks", ann_tasks, "Tasks JSONL")->required();
    ann_serve->add_option("--log", ann_log, "Append-only annotation log (JSONL)")->required();
    ann_serve->add_option("--host", ann_host, "Bind address");
    ann_serve->add_option("--port", ann_port, "Port (0 picks a free one)");
    auto* ann_export = ann->add_subcommand("export", "Export the rating matrix CSV");
    ann_export->add_option("--tasks", ann_tasks, "Tasks JSONL")->required();
    ann_export->add_option("--log", ann_log, "Annotation log (JSONL)")->required();
    ann_export->add_option("--out", ann_out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = require_config(g);
            auto gw = make_gateway(cfg);
            GenerateOptions o;
            o.seeds = gen_seeds;
            o.out_dir = out_dir_or(gen_out, cfg);
            if (!gen_traps.empty()) o.traps = parse_traps(gen_traps);
            o.rng_seed = g.seed;
            const auto s = run_generate(cfg, *gw, o);
            std::cout << "generated " << s.questions << " questions from " << s.seeds << " seeds (" << s.unvalidated
                      << " unvalidated, " << s.seed_failures << " seed failures) -> " << s.questions_path.string()
                      << "\n";
            return 0;
        }
        if (ans->parsed()) {
            const auto cfg = require_config(g);
            auto gw = make_gateway(cfg);
            AnswerOptions o;
            o.questions = ans_questions;
            o.model_id = ans_model;
            o.out = ans_out.empty() ? out_dir_or("", cfg) / ("answers_" + ans_model + ".jsonl") : fs::path(ans_out);
            o.challenge = ans_challenge;
            o.include_flagged = ans_flagged;
            const auto s = run_answer(cfg, *gw, o);
            std::cout << "answered " << s.answered << " (" << s.resumed << " resumed, " << s.skipped_flagged
                      << " flagged skipped, " << s.failed << " failed) -> " << o.out.string() << "\n";
            return 0;
        }
        if (ev->parsed()) {
            const auto cfg = require_config(g);
            auto gw = make_gateway(cfg);
            EvaluateOptions o;
            o.questions = ev_questions;
            o.answers = ev_answers;
            o.out_dir = out_dir_or(ev_out, cfg);
            o.challenge = ev_challenge;
            const auto doc = run_evaluate(cfg, *gw, o);
            std::cout << doc.at(ev_challenge ? "challenge_cards" : "scorecards").dump(2) << "\n";
            return 0;
        }
        if (an->parsed()) {
            AnalyzeOptions o;
            o.deltas = deltas;
            if (!an_selfbleu.empty()) o.self_bleu = an_selfbleu;
            if (!an_ac1.empty()) o.ac1 = an_ac1;
            if (!an_task_kind.empty()) o.ac1_task_kind = an_task_kind;
            o.ac1_categories = split_list(an_categories);
            if (!an_sig.empty()) {
                const auto models = split_list(an_models);
                if (models.size() != 2) throw ValidationError("--models: expected MODEL_A,MODEL_B");
                SignificanceRequest r;
                r.records = an_sig;
                r.model_a = models[0];
                r.model_b = models[1];
                r.metric = *parse_significance_metric(an_metric);
                r.fraction = an_fraction;
                r.runs = an_runs;
                o.significance = r;
            }
            if (!an_expression.empty()) o.expression = an_expression;
            if (!an_diagnoses.empty()) o.diagnoses = an_diagnoses;
            o.rng_seed = g.seed.value_or(0);
            std::optional<RunConfig> cfg;
            std::unique_ptr<gateway::Gateway> gw;
            if (!g.config.empty()) {
                cfg = require_config(g);
                gw = make_gateway(*cfg);
            }
            const auto report = run_analyze(o, cfg ? &*cfg : nullptr, gw.get());
            const auto text = report.dump(2) + "\n";
            if (!an_out.empty()) write_file_atomic(an_out, text);
            std::cout << text;
            return 0;
        }
        if (ann_serve->parsed()) {
            AnnotationStore store(load_tasks(ann_tasks), ann_log, g.seed.value_or(0));
            return serve(store, ann_host, ann_port);
        }
        if (ann_export->parsed()) {
            const AnnotationStore store(load_tasks(ann_tasks), ann_log, g.seed.value_or(0), true);
            const auto csv = store.export_csv();
            if (ann_out.empty()) {
                std::cout << csv;
            } else {
                write_file_atomic(ann_out, csv);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
