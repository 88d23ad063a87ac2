#pragma once

#include "frag/answering.hpp"
#include "frag/backend.hpp"
#include "frag/cache.hpp"
#include "frag/config.hpp"
#include "frag/manifest.hpp"
#include "frag/metrics.hpp"
#include "frag/scoring.hpp"
#include "frag/selection.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frag {

/// Everything needed to re-run selection for one task offline.
struct TaskTrace {
    std::string task_id;
    std::string media_id;
    MediaKind media_kind = MediaKind::video;
    AnswerType answer_type = AnswerType::extractive;
    bool failed = false;
    std::string error;

    std::size_t t_total = 0;
    std::size_t n_sampled = 0;
    std::size_t k = 0;
    std::string scoring_prompt_hash;
    std::vector<ScoredFrame> frames;  // sampling order; empty for the uniform baseline
    SelectionResult selection;
    std::optional<Answer> answer;
    std::optional<bool> correct;
};

struct FailureCounts {
    std::size_t failed_tasks = 0;
    std::size_t failed_frames = 0;
    std::size_t degraded_frames = 0;
};

/// Values that legitimately differ between otherwise identical runs.
struct RunRuntime {
    std::string started_at;
    double scoring_wall_seconds = 0.0;
    double answer_wall_seconds = 0.0;
    std::size_t scoring_calls = 0;
    std::size_t answer_calls = 0;
    std::size_t cache_hits = 0;
};

struct RunReport {
    std::vector<TaskTrace> tasks;  // manifest order, one per task
    MetricsReport metrics;
    FailureCounts failures;
    RunRuntime runtime;
    bool aborted = false;
    std::string abort_reason;
    nlohmann::json config;
};

nlohmann::json to_json(const RunReport& report);
/// The report without its "runtime" member; equal across reruns of a deterministic backend.
nlohmann::json deterministic_json(const RunReport& report);

TaskTrace task_trace_from_json(const nlohmann::json& task);

/// frame_index,score,selected
std::string score_csv(const TaskTrace& trace);

QuestionMetrics evaluate_task(const QueryTask& task, const std::optional<Answer>& answer, const RunConfig& cfg);

/// Open media, sample, score (cache first, up to cfg.concurrency in flight), select, answer, evaluate.
/// Per-task failures are isolated; BackendUnreachable aborts and marks the remaining tasks failed.
RunReport run_pipeline(const RunConfig& cfg, std::span<const ManifestEntry> entries, ChatBackend& scorer,
                       ChatBackend& answerer, ScoreCache& cache);

struct BackendSet {
    std::shared_ptr<ChatBackend> scorer;
    std::shared_ptr<ChatBackend> answerer;
};

/// Mock fixture when configured, otherwise HTTP endpoints with keys from the configured env vars.
BackendSet make_backends(const RunConfig& cfg);
std::unique_ptr<ScoreCache> make_cache(const RunConfig& cfg);

/// Writes report.json and, when enabled, scores/<task_id>.csv under cfg.out_dir.
void write_run_outputs(const RunReport& report, const RunConfig& cfg);

enum class SweepAxis { n_sampled, k_selected };

SweepAxis parse_sweep_axis(std::string_view text);
std::string_view to_string(SweepAxis axis) noexcept;

struct SweepRow {
    std::size_t value = 0;
    MetricsReport metrics;
    DiversityStats mean_spread;
    /// k axis only: every task's selection at the previous (smaller) value is contained in this one.
    std::optional<bool> nested_with_previous;
    std::size_t scoring_calls = 0;
    RunReport report;
};

/// One run per value; all runs share `cache`, so frames scored for one value are reused by the others.
std::vector<SweepRow> sweep(const RunConfig& cfg, std::span<const ManifestEntry> entries, SweepAxis axis,
                            std::span<const std::size_t> values, ChatBackend& scorer, ChatBackend& answerer,
                            ScoreCache& cache);

std::string sweep_csv(std::span<const SweepRow> rows, SweepAxis axis);

}  // namespace frag
