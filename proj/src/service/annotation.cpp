/// @file annotation.cpp

#include "medtrap/service/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "medtrap/core/rng.hpp"
#include "medtrap/core/serialize.hpp"
#include "medtrap/core/text.hpp"
#include "medtrap/core/types.hpp"

namespace medtrap::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

void check_value(TaskKind kind, const std::string& value) {
    if (kind == TaskKind::QualityRating) {
        if (value.size() != 1 || value[0] < '1' || value[0] > '5') {
            throw ValidationError("value: rating must be an integer from 1 to 5, got '" + value + "'");
        }
    } else if (value != "A" && value != "B") {
        throw ValidationError("value: preference must be A or B, got '" + value + "'");
    }
}

}  // namespace

std::string_view to_string(TaskKind k) { return k == TaskKind::QualityRating ? "rating" : "preference"; }

std::optional<TaskKind> parse_task_kind(std::string_view s) {
    if (s == "rating") return TaskKind::QualityRating;
    if (s == "preference") return TaskKind::PairPreference;
    return std::nullopt;
}

json to_json(const AnnotationTask& t) {
    json j{{"id", t.id}, {"kind", std::string(to_string(t.kind))}, {"question", t.question}};
    if (t.kind == TaskKind::PairPreference) j["responses"] = t.responses;
    return j;
}

AnnotationTask annotation_task_from_json(const json& j) {
    AnnotationTask t;
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
        throw ValidationError("id: must be a non-empty string");
    }
    t.id = j.at("id").get<std::string>();
    const auto kind = parse_task_kind(j.value("kind", ""));
    if (!kind) throw ValidationError("kind: must be rating or preference (task " + t.id + ")");
    t.kind = *kind;
    if (!j.contains("question") || !j.at("question").is_string()) {
        throw ValidationError("question: must be a string (task " + t.id + ")");
    }
    t.question = j.at("question").get<std::string>();
    if (t.kind == TaskKind::PairPreference) {
        if (!j.contains("responses") || !j.at("responses").is_array() || j.at("responses").size() != 2) {
            throw ValidationError("responses: a preference task needs exactly two (task " + t.id + ")");
        }
        t.responses = j.at("responses").get<std::vector<std::string>>();
    }
    return t;
}

std::vector<AnnotationTask> load_tasks(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ValidationError("tasks: file not found: " + path.string());
    std::vector<AnnotationTask> out;
    std::set<std::string> ids;
    for (const auto& j : parse_jsonl(read_file(path))) {
        auto t = annotation_task_from_json(j);
        if (!ids.insert(t.id).second) throw ValidationError("tasks: duplicate id " + t.id);
        out.push_back(std::move(t));
    }
    if (out.empty()) throw ValidationError("tasks: file has no tasks: " + path.string());
    return out;
}

void validate_annotator_id(const std::string& id) {
    const bool ok = !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
    if (!ok) throw ValidationError("annotator: id must be 1-64 characters of letters, digits, '_', '-' or '.'");
}

json to_json(const LogEntry& e) {
    return json{{"seq", e.seq},
                {"task_id", e.task_id},
                {"annotator", e.annotator},
                {"task_kind", std::string(to_string(e.kind))},
                {"value", e.value},
                {"previous", e.previous ? json(*e.previous) : json(nullptr)}};
}

LogEntry log_entry_from_json(const json& j) {
    LogEntry e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.task_id = j.at("task_id").get<std::string>();
    e.annotator = j.at("annotator").get<std::string>();
    const auto kind = parse_task_kind(j.at("task_kind").get<std::string>());
    if (!kind) throw ValidationError("log: bad task_kind");
    e.kind = *kind;
    e.value = j.at("value").get<std::string>();
    if (j.contains("previous") && j.at("previous").is_string()) e.previous = j.at("previous").get<std::string>();
    return e;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks, fs::path log_path, std::uint64_t order_seed,
                                 bool read_only)
    : tasks_(std::move(tasks)), log_path_(std::move(log_path)), order_seed_(order_seed), read_only_(read_only) {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (!index_.emplace(tasks_[i].id, i).second) throw ValidationError("tasks: duplicate id " + tasks_[i].id);
    }
    if (fs::exists(log_path_)) {
        const auto lines = text::split(read_file(log_path_), '\n');
        std::size_t last = lines.size();
        while (last > 0 && text::trim(lines[last - 1]).empty()) --last;
        for (std::size_t i = 0; i < last; ++i) {
            if (text::trim(lines[i]).empty()) continue;
            const auto j = json::parse(lines[i], nullptr, false);
            if (j.is_discarded()) {
                if (i + 1 == last) break;
                throw ValidationError("log: malformed line " + std::to_string(i + 1) + " in " + log_path_.string());
            }
            auto e = log_entry_from_json(j);
            const auto& t = task(e.task_id);
            if (t.kind != e.kind) throw ValidationError("log: task kind mismatch for " + e.task_id);
            check_value(e.kind, e.value);
            apply(e);
        }
    }
    if (read_only_) return;
    if (!log_path_.parent_path().empty()) fs::create_directories(log_path_.parent_path());
    out_.open(log_path_, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("annotation log: cannot open " + log_path_.string());
}

const AnnotationTask& AnnotationStore::task(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw UnknownTaskError("unknown task id: " + id);
    return tasks_[it->second];
}

void AnnotationStore::apply(const LogEntry& e) {
    latest_[{e.task_id, e.annotator}] = e.value;
    log_.push_back(e);
}

std::vector<std::string> AnnotationStore::order_for(const std::string& annotator) const {
    std::vector<std::string> ids;
    for (const auto& t : tasks_) ids.push_back(t.id);
    auto rng = Rng::derive(order_seed_, annotator);
    rng.shuffle(ids);
    return ids;
}

NextTask AnnotationStore::next_task(const std::string& annotator) const {
    validate_annotator_id(annotator);
    const auto order = order_for(annotator);
    std::lock_guard lock(mu_);
    NextTask n;
    n.total = order.size();
    for (const auto& id : order) {
        if (latest_.count({id, annotator})) {
            ++n.done;
        } else if (!n.task) {
            n.task = tasks_[index_.at(id)];
        }
    }
    return n;
}

LogEntry AnnotationStore::record(const std::string& task_id, const std::string& annotator, TaskKind kind,
                                 std::string value) {
    if (read_only_) throw std::logic_error("annotation store is read-only");
    validate_annotator_id(annotator);
    const auto& t = task(task_id);
    if (t.kind != kind) {
        throw ValidationError("task " + task_id + " is a " + std::string(to_string(t.kind)) + " task");
    }
    check_value(kind, value);
    std::lock_guard lock(mu_);
    LogEntry e;
    e.seq = log_.size() + 1;
    e.task_id = task_id;
    e.annotator = annotator;
    e.kind = kind;
    e.value = std::move(value);
    if (const auto it = latest_.find({task_id, annotator}); it != latest_.end()) e.previous = it->second;
    out_ << to_json(e).dump() << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("annotation log: write failed for " + log_path_.string());
    apply(e);
    return e;
}

LogEntry AnnotationStore::submit_rating(const std::string& task_id, const std::string& annotator, int value) {
    if (value < 1 || value > 5) throw ValidationError("value: rating must be an integer from 1 to 5");
    return record(task_id, annotator, TaskKind::QualityRating, std::to_string(value));
}

LogEntry AnnotationStore::submit_preference(const std::string& task_id, const std::string& annotator,
                                            const std::string& choice) {
    return record(task_id, annotator, TaskKind::PairPreference, choice);
}

std::string AnnotationStore::export_csv() const {
    std::lock_guard lock(mu_);
    std::map<std::string, std::map<std::string, std::string>> by_task;
    for (const auto& e : log_) by_task[e.task_id][e.annotator] = e.value;
    std::string out = "item_id,annotator_id,task_kind,value\n";
    for (const auto& t : tasks_) {
        const auto it = by_task.find(t.id);
        if (it == by_task.end()) continue;
        for (const auto& [annotator, value] : it->second) {
            out += csv_field(t.id) + "," + annotator + "," + std::string(to_string(t.kind)) + "," + value + "\n";
        }
    }
    return out;
}

std::vector<LogEntry> AnnotationStore::entries() const {
    std::lock_guard lock(mu_);
    return log_;
}

}  // namespace medtrap::service
