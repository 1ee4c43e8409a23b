/// @file bindings.cpp
/// @brief pybind11 module medtrap._core: metrics, analytics and the workflow steps.
///
/// Structured results cross the boundary as JSON text; the Python package
/// decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "medtrap/analytics/agreement.hpp"
#include "medtrap/analytics/bleu.hpp"
#include "medtrap/analytics/delta.hpp"
#include "medtrap/analytics/diversity.hpp"
#include "medtrap/analytics/significance.hpp"
#include "medtrap/evaluate/metrics.hpp"
#include "medtrap/service/run_config.hpp"
#include "medtrap/service/workflow.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace medtrap;
using nlohmann::json;

namespace {

Stance parse_stance(const std::string& s) {
    for (auto v : {Stance::Supports, Stance::Opposes, Stance::Undetermined}) {
        if (s == to_string(v)) return v;
    }
    throw ValidationError("unknown stance '" + s + "' (expected Supports, Opposes or Undetermined)");
}

service::RunConfig config(const fs::path& path, const std::optional<fs::path>& scripted) {
    return service::load_run_config(path, scripted);
}

std::vector<TrapKind> parse_traps(const std::vector<std::string>& names) {
    std::vector<TrapKind> out;
    for (const auto& n : names) {
        const auto t = parse_trap(n);
        if (!t) throw ValidationError("unknown trap '" + n + "'");
        out.push_back(*t);
    }
    return out;
}

std::string generate_step(const fs::path& cfg_path, const fs::path& seeds, const fs::path& out_dir,
                          const std::optional<std::vector<std::string>>& traps, std::optional<std::uint64_t> seed,
                          const std::optional<fs::path>& scripted) {
    const auto cfg = config(cfg_path, scripted);
    auto gw = service::make_gateway(cfg);
    service::GenerateOptions o;
    o.seeds = seeds;
    o.out_dir = out_dir;
    if (traps) o.traps = parse_traps(*traps);
    o.rng_seed = seed;
    const auto s = service::run_generate(cfg, *gw, o);
    return json{{"seeds", s.seeds},
                {"questions", s.questions},
                {"unvalidated", s.unvalidated},
                {"seed_failures", s.seed_failures},
                {"questions_path", s.questions_path.string()},
                {"manifest_path", s.manifest_path.string()}}
        .dump();
}

std::string answer_step(const fs::path& cfg_path, const fs::path& questions, const fs::path& out, const std::string& model,
                   bool challenge, bool include_flagged, const std::optional<fs::path>& scripted) {
    const auto cfg = config(cfg_path, scripted);
    auto gw = service::make_gateway(cfg);
    const auto s = service::run_answer(cfg, *gw, {questions, out, model, challenge, include_flagged});
    return json{{"answered", s.answered},
                {"resumed", s.resumed},
                {"skipped_flagged", s.skipped_flagged},
                {"failed", s.failed}}
        .dump();
}

std::string evaluate_step(const fs::path& cfg_path, const fs::path& questions, const fs::path& answers,
                          const fs::path& out_dir, bool challenge, const std::optional<fs::path>& scripted) {
    const auto cfg = config(cfg_path, scripted);
    auto gw = service::make_gateway(cfg);
    return service::run_evaluate(cfg, *gw, {questions, answers, out_dir, challenge}).dump();
}

std::string analyze_step(const std::optional<fs::path>& cfg_path, const std::vector<std::pair<double, double>>& deltas,
                         const std::optional<fs::path>& self_bleu, const std::optional<fs::path>& ac1,
                         const std::optional<std::string>& ac1_task_kind, const std::vector<std::string>& ac1_categories,
                         const std::optional<fs::path>& significance, const std::optional<std::pair<std::string, std::string>>& models,
                         const std::string& metric, double fraction, int runs, const std::optional<fs::path>& expression,
                         const std::optional<fs::path>& diagnoses, std::uint64_t seed, const std::optional<fs::path>& scripted) {
    service::AnalyzeOptions o;
    o.deltas = deltas;
    o.self_bleu = self_bleu;
    o.ac1 = ac1;
    o.ac1_task_kind = ac1_task_kind;
    o.ac1_categories = ac1_categories;
    if (significance) {
        if (!models) throw ValidationError("significance: models=(model_a, model_b) is required");
        const auto m = service::parse_significance_metric(metric);
        if (!m) throw ValidationError("significance: unknown metric '" + metric + "'");
        o.significance = service::SignificanceRequest{*significance, models->first, models->second, *m, fraction, runs};
    }
    o.expression = expression;
    o.diagnoses = diagnoses;
    o.rng_seed = seed;
    std::optional<service::RunConfig> cfg;
    std::unique_ptr<gateway::Gateway> gw;
    if (cfg_path) {
        cfg = config(*cfg_path, scripted);
        gw = service::make_gateway(*cfg);
    }
    return service::run_analyze(o, cfg ? &*cfg : nullptr, gw.get()).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the medtrap benchmark toolkit";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    // Metrics.
    m.def("consistency_score", [](const std::vector<std::string>& labels) { return evaluate::consistency_score(labels); },
          py::arg("labels"));
    m.def("average_of_four", &evaluate::average_of_four, py::arg("acc"), py::arg("ver"), py::arg("help"),
          py::arg("cons"));
    m.def(
        "rectifies",
        [](const std::string& rumor, const std::string& fact) {
            return evaluate::rectifies(parse_stance(rumor), parse_stance(fact));
        },
        py::arg("rumor_stance"), py::arg("fact_stance"));

    // Analytics.
    m.def("relative_delta", &analytics::relative_delta, py::arg("static_score"), py::arg("dynamic_score"));
    m.def("relative_delta_exact", &analytics::relative_delta_exact, py::arg("static_score"), py::arg("dynamic_score"));
    m.def("bleu_tokenize", &analytics::bleu_tokenize, py::arg("text"));
    m.def("sentence_bleu", &analytics::sentence_bleu, py::arg("references"), py::arg("hypothesis"));
    m.def("self_bleu", &analytics::self_bleu, py::arg("texts"));
    m.def("self_bleu_diversity", &analytics::self_bleu_diversity, py::arg("texts"));
    m.def("histogram_entropy", [](const std::vector<std::size_t>& h) { return analytics::histogram_entropy(h); },
          py::arg("histogram"));
    m.def(
        "expression_diversity",
        [](const std::array<std::array<std::size_t, 3>, 3>& counts) {
            analytics::StyleDistribution d;
            d.counts = counts;
            d.total = counts[0][0] + counts[0][1] + counts[0][2];
            d.validate();
            return analytics::expression_diversity(d);
        },
        py::arg("counts"));
    m.def(
        "gwet_ac1",
        [](const std::vector<std::vector<std::string>>& rows, const std::vector<std::string>& categories) {
            const auto t = analytics::gwet_ac1_terms(analytics::RatingMatrix::from_rows(rows, categories));
            py::dict d;
            d["pa"] = t.pa;
            d["pe"] = t.pe;
            d["ac1"] = t.ac1;
            d["categories"] = t.categories;
            return d;
        },
        py::arg("rows"), py::arg("categories") = std::vector<std::string>{});
    m.def(
        "bootstrap_significance",
        [](const std::vector<double>& a, const std::vector<double>& b, double fraction, int runs, std::uint64_t seed) {
            const auto r = analytics::bootstrap_significance(a, b, fraction, runs, seed);
            py::dict d;
            d["mean_a"] = r.mean_a;
            d["mean_b"] = r.mean_b;
            d["t"] = r.t;
            d["p"] = r.p;
            d["subset_size"] = r.subset_size;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("fraction") = 0.8, py::arg("runs") = 10, py::arg("seed") = 0);

    // Workflow steps.
    const auto release = py::call_guard<py::gil_scoped_release>();
    m.def("generate_json", &generate_step, py::arg("config"), py::arg("seeds"), py::arg("out_dir"),
          py::arg("traps") = py::none(), py::arg("seed") = py::none(), py::arg("scripted") = py::none(), release);
    m.def("answer_json", &answer_step, py::arg("config"), py::arg("questions"), py::arg("out"), py::arg("model"),
          py::arg("challenge") = false, py::arg("include_flagged") = false, py::arg("scripted") = py::none(), release);
    m.def("evaluate_json", &evaluate_step, py::arg("config"), py::arg("questions"), py::arg("answers"), py::arg("out_dir"),
          py::arg("challenge") = false, py::arg("scripted") = py::none(), release);
    m.def("analyze_json", &analyze_step, py::arg("config") = py::none(),
          py::arg("deltas") = std::vector<std::pair<double, double>>{}, py::arg("self_bleu") = py::none(),
          py::arg("ac1") = py::none(), py::arg("ac1_task_kind") = py::none(),
          py::arg("ac1_categories") = std::vector<std::string>{}, py::arg("significance") = py::none(),
          py::arg("models") = py::none(), py::arg("metric") = "acc", py::arg("fraction") = 0.8, py::arg("runs") = 10,
          py::arg("expression") = py::none(), py::arg("diagnoses") = py::none(), py::arg("seed") = 0,
          py::arg("scripted") = py::none(), release);
}
