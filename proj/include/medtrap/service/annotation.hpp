/// @file annotation.hpp
/// @brief Human-study task store: stable per-annotator ordering, validated
/// submissions, an append-only JSONL log and CSV export folded from it.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace medtrap::service {

enum class TaskKind { QualityRating, PairPreference };

/// "rating" or "preference"; also the task_kind column of the export.
std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view s);

struct AnnotationTask {
    std::string id;
    TaskKind kind = TaskKind::QualityRating;
    std::string question;
    std::vector<std::string> responses;  // exactly two for PairPreference, else none
};

nlohmann::json to_json(const AnnotationTask& t);
AnnotationTask annotation_task_from_json(const nlohmann::json& j);

/// Reads tasks JSONL; throws ValidationError on duplicate ids or bad payloads.
std::vector<AnnotationTask> load_tasks(const std::filesystem::path& path);

class UnknownTaskError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LogEntry {
    std::uint64_t seq = 0;
    std::string task_id;
    std::string annotator;
    TaskKind kind = TaskKind::QualityRating;
    std::string value;                   // "1".."5" or "A"/"B"
    std::optional<std::string> previous; // set when overwriting an earlier answer
};

struct NextTask {
    std::optional<AnnotationTask> task;
    std::size_t done = 0;
    std::size_t total = 0;
};

class AnnotationStore {
public:
    /// Replays `log_path` if it exists. A torn final line is ignored; any
    /// other malformed line raises ValidationError. A read-only store never
    /// creates or writes the log and rejects submissions.
    AnnotationStore(std::vector<AnnotationTask> tasks, std::filesystem::path log_path, std::uint64_t order_seed = 0,
                    bool read_only = false);

    /// First task in this annotator's order that they have not answered.
    NextTask next_task(const std::string& annotator) const;

    /// Value must be an integer in 1..5. Throws ValidationError on a bad
    /// value, annotator id or task kind; UnknownTaskError for unknown ids.
    LogEntry submit_rating(const std::string& task_id, const std::string& annotator, int value);
    /// Choice must be "A" or "B".
    LogEntry submit_preference(const std::string& task_id, const std::string& annotator, const std::string& choice);

    /// Annotator's task order: a shuffle keyed by (order_seed, annotator).
    std::vector<std::string> order_for(const std::string& annotator) const;

    /// CSV with header item_id,annotator_id,task_kind,value: last write per
    /// (task, annotator), rows in task-file order then annotator id order.
    std::string export_csv() const;

    std::vector<LogEntry> entries() const;
    const std::vector<AnnotationTask>& tasks() const { return tasks_; }

private:
    LogEntry record(const std::string& task_id, const std::string& annotator, TaskKind kind, std::string value);
    void apply(const LogEntry& e);
    const AnnotationTask& task(const std::string& id) const;

    std::vector<AnnotationTask> tasks_;
    std::map<std::string, std::size_t> index_;
    std::filesystem::path log_path_;
    std::uint64_t order_seed_;
    bool read_only_;
    std::vector<LogEntry> log_;
    std::map<std::pair<std::string, std::string>, std::string> latest_;  // (task, annotator) -> value
    std::ofstream out_;
    mutable std::mutex mu_;
};

/// Throws ValidationError unless `id` is 1..64 characters of [A-Za-z0-9_.-].
void validate_annotator_id(const std::string& id);

nlohmann::json to_json(const LogEntry& e);
LogEntry log_entry_from_json(const nlohmann::json& j);

}  // namespace medtrap::service
