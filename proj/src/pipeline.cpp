#include "frag/pipeline.hpp"

#include "frag/error.hpp"
#include "frag/http_backend.hpp"
#include "frag/mock_backend.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace frag {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::int64_t unix_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

/// Runs fn(0..n-1) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

// Thrown out of a task to abort the whole run.
struct RunAborted {
    std::string reason;
};

struct Counters {
    std::atomic<std::size_t> scoring_calls{0};
    std::atomic<std::size_t> answer_calls{0};
    std::atomic<std::size_t> cache_hits{0};
    double scoring_wall = 0.0;
    double answer_wall = 0.0;
};

std::vector<ScoredFrame> score_proposals(const RunConfig& cfg, const MediaSource& media,
                                         const std::vector<FrameProposal>& proposals, const ScoringPrompt& prompt,
                                         ChatBackend& scorer, ScoreCache& cache, Counters& counters) {
    ScoringOptions options;
    options.model = cfg.scorer.model;
    options.top_logprobs = cfg.top_logprobs;
    options.detail = cfg.scorer.detail;
    options.mode = cfg.raw_pa ? ScoreMode::raw_a : ScoreMode::renormalized;
    options.retry = cfg.retry;
    const auto prompt_hash = prompt.hash();

    std::vector<ScoredFrame> scored(proposals.size());
    std::vector<std::exception_ptr> errors(proposals.size());
    std::atomic<bool> unreachable{false};

    parallel_for(proposals.size(), cfg.concurrency, [&](std::size_t i) {
        if (unreachable) return;
        const auto& proposal = proposals[i];
        try {
            const auto key = score_cache_key(cfg.scorer.model, proposal.media_id, proposal.frame_index, prompt_hash,
                                             cfg.raw_pa);
            if (const auto hit = cache.get(key)) {
                ++counters.cache_hits;
                scored[i] = ScoredFrame{proposal, hit->score, hit->degraded};
                return;
            }
            ++counters.scoring_calls;
            scored[i] = score_frame(scorer, proposal, media.read_frame(proposal.frame_index), prompt, options);
            if (!scored[i].failed) cache.put(key, {scored[i].score, scored[i].degraded, unix_now()});
        } catch (const BackendUnreachable&) {
            unreachable = true;
            errors[i] = std::current_exception();
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });

    // an unreachable backend outranks per-frame errors; otherwise report the earliest frame
    for (const auto& e : errors) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const BackendUnreachable&) {
            throw;
        } catch (...) {
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return scored;
}

std::vector<ImagePayload> read_images(const MediaSource& media, const std::vector<FrameProposal>& frames) {
    std::vector<ImagePayload> images;
    images.reserve(frames.size());
    for (const auto& f : frames) images.push_back(media.read_frame(f.frame_index));
    return images;
}

void run_task(const RunConfig& cfg, const ManifestEntry& entry, TaskTrace& trace, ChatBackend& scorer,
              ChatBackend& answerer, ScoreCache& cache, Counters& counters) {
    const auto& task = entry.task;
    const auto media = open_media(entry.media_path, entry.media_kind, cfg.decoder, entry.media_id);
    const auto sel_cfg = selection_for(cfg, entry.media_kind);
    trace.t_total = media.frame_count();
    trace.k = sel_cfg.k;

    std::vector<FrameProposal> chosen;
    if (cfg.selection_mode == SelectionMode::uniform) {
        chosen = uniform_sample(media, sel_cfg.k);
        trace.n_sampled = chosen.size();
        for (const auto& p : chosen) trace.selection.selected.push_back(ScoredFrame{p});
        trace.selection.k_effective = chosen.size();
        trace.selection.spread = diversity(trace.selection, trace.t_total);
    } else {
        const auto proposals = uniform_sample(media, sel_cfg.n_sampled.value_or(media.frame_count()));
        trace.n_sampled = proposals.size();
        const auto prompt = build_scoring_prompt(task, cfg.scoring_template);
        trace.scoring_prompt_hash = prompt.hash();

        const auto start = Clock::now();
        trace.frames = score_proposals(cfg, media, proposals, prompt, scorer, cache, counters);
        counters.scoring_wall += seconds_since(start);

        trace.selection = select_top_k(trace.frames, sel_cfg, trace.t_total);
        for (const auto& f : trace.selection.selected) chosen.push_back(f.proposal);
    }

    AnswerOptions options{cfg.answerer.model, cfg.answer_max_tokens, cfg.answerer.detail};
    const auto request = build_answer_request(task, chosen, read_images(media, chosen), options);
    const auto start = Clock::now();
    ++counters.answer_calls;
    const auto response = complete_with_retry(answerer, request, cfg.retry);
    counters.answer_wall += seconds_since(start);
    trace.answer = Answer{response.content, parse_answer(response.content, task)};
}

std::string resolve_truth_letter(const QueryTask& task) {
    const auto& truth = task.ground_truths.front();
    for (const auto& opt : task.options) {
        if (truth == opt.letter) return opt.letter;
    }
    const auto norm = normalize_answer(truth);
    for (const auto& opt : task.options) {
        if (normalize_answer(opt.text) == norm) return opt.letter;
    }
    return truth;
}

json metrics_to_json(const QuestionMetrics& q) {
    json out = {{"task_id", q.task_id}};
    if (q.accuracy) out["accuracy"] = *q.accuracy;
    if (q.em) out["em"] = *q.em;
    if (q.f1) out["f1"] = *q.f1;
    if (q.anls) out["anls"] = *q.anls;
    return out;
}

json metrics_to_json(const MetricsReport& m) {
    json out = {{"n_questions", m.n_questions}};
    if (m.accuracy) out["accuracy"] = *m.accuracy;
    if (m.em) out["em"] = *m.em;
    if (m.f1) out["f1"] = *m.f1;
    if (m.anls) out["anls"] = *m.anls;
    json per = json::array();
    for (const auto& q : m.per_question) per.push_back(metrics_to_json(q));
    out["per_question"] = std::move(per);
    return out;
}

json frame_to_json(const ScoredFrame& f) {
    json out = {{"index", f.proposal.frame_index}, {"score", f.score}, {"degraded", f.degraded}, {"failed", f.failed}};
    if (!f.error.empty()) out["error"] = f.error;
    return out;
}

json trace_to_json(const TaskTrace& t) {
    json frames = json::array();
    for (const auto& f : t.frames) frames.push_back(frame_to_json(f));
    json out = {
        {"id", t.task_id},
        {"media_id", t.media_id},
        {"media_kind", to_string(t.media_kind)},
        {"answer_type", to_string(t.answer_type)},
        {"status", t.failed ? "failed" : "ok"},
        {"t_total", t.t_total},
        {"n_sampled", t.n_sampled},
        {"k", t.k},
        {"scoring_prompt_hash", t.scoring_prompt_hash},
        {"frames", std::move(frames)},
        {"selection",
         {{"indices", t.selection.frame_indices()},
          {"k_effective", t.selection.k_effective},
          {"tie_events", t.selection.tie_events},
          {"normalized_span", t.selection.spread.normalized_span},
          {"mean_pairwise_gap", t.selection.spread.mean_pairwise_gap}}},
    };
    if (t.failed) out["error"] = t.error;
    out["answer"] = t.answer ? json{{"raw", t.answer->raw}, {"parsed", t.answer->parsed}} : json(nullptr);
    out["correct"] = t.correct ? json(*t.correct) : json(nullptr);
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

}  // namespace

QuestionMetrics evaluate_task(const QueryTask& task, const std::optional<Answer>& answer, const RunConfig& cfg) {
    QuestionMetrics q{task.id};
    if (task.ground_truths.empty()) return q;
    if (!answer) {
        // failed task: counts against every metric that would have applied
        if (task.answer_type == AnswerType::mcq) q.accuracy = 0.0;
        else q.em = q.f1 = q.anls = 0.0;
        return q;
    }
    if (task.answer_type == AnswerType::mcq) {
        q.accuracy = mcq_accuracy(answer->parsed, resolve_truth_letter(task));
        return q;
    }
    Tokenizer tokenizer = qa_tokenize;
    if (cfg.f1_tokenizer == F1TokenizerKind::whitespace) {
        tokenizer = [](std::string_view text) {
            std::vector<std::string> tokens;
            std::istringstream in{normalize_answer(text)};
            for (std::string t; in >> t;) tokens.push_back(t);
            return tokens;
        };
    }
    q.em = exact_match(answer->parsed, task.ground_truths);
    q.f1 = word_f1(answer->parsed, task.ground_truths, tokenizer);
    q.anls = anls_score(answer->parsed, task.ground_truths, cfg.anls_tau);
    return q;
}

RunReport run_pipeline(const RunConfig& cfg, std::span<const ManifestEntry> entries, ChatBackend& scorer,
                       ChatBackend& answerer, ScoreCache& cache) {
    cfg.validate();
    RunReport report;
    report.runtime.started_at = utc_now_iso8601();
    report.config = {
        {"scorer_model", cfg.scorer.model},
        {"answerer_model", cfg.answerer.model},
        {"n_sampled", cfg.n_sampled ? json(*cfg.n_sampled) : json(nullptr)},
        {"k_selected", cfg.k_selected ? json(*cfg.k_selected) : json(nullptr)},
        {"selection_mode", cfg.selection_mode == SelectionMode::frag ? "frag" : "uniform"},
        {"raw_pa", cfg.raw_pa},
        {"scoring_template", cfg.scoring_template},
        {"anls_tau", cfg.anls_tau},
    };

    Counters counters;
    std::vector<QuestionMetrics> per_question;
    for (const auto& entry : entries) {
        TaskTrace trace;
        trace.task_id = entry.task.id;
        trace.media_id = entry.media_id;
        trace.media_kind = entry.media_kind;
        trace.answer_type = entry.task.answer_type;

        if (report.aborted) {
            trace.failed = true;
            trace.error = "not run: " + report.abort_reason;
        } else {
            try {
                run_task(cfg, entry, trace, scorer, answerer, cache, counters);
            } catch (const BackendUnreachable& e) {
                report.aborted = true;
                report.abort_reason = e.what();
                trace.failed = true;
                trace.error = e.what();
            } catch (const std::exception& e) {
                trace.failed = true;
                trace.error = e.what();
            }
        }
        if (trace.failed) trace.answer.reset();

        auto q = evaluate_task(entry.task, trace.answer, cfg);
        if (q.accuracy) trace.correct = *q.accuracy == 1.0;
        else if (q.em) trace.correct = *q.em == 1.0;

        report.failures.failed_tasks += trace.failed ? 1 : 0;
        for (const auto& f : trace.frames) {
            report.failures.failed_frames += f.failed ? 1 : 0;
            report.failures.degraded_frames += f.degraded ? 1 : 0;
        }
        per_question.push_back(std::move(q));
        report.tasks.push_back(std::move(trace));
    }

    report.metrics = aggregate(std::move(per_question));
    report.runtime.scoring_wall_seconds = counters.scoring_wall;
    report.runtime.answer_wall_seconds = counters.answer_wall;
    report.runtime.scoring_calls = counters.scoring_calls;
    report.runtime.answer_calls = counters.answer_calls;
    report.runtime.cache_hits = counters.cache_hits;
    return report;
}

json to_json(const RunReport& report) {
    auto out = deterministic_json(report);
    out["runtime"] = {
        {"started_at", report.runtime.started_at},
        {"scoring_wall_seconds", report.runtime.scoring_wall_seconds},
        {"answer_wall_seconds", report.runtime.answer_wall_seconds},
        {"scoring_calls", report.runtime.scoring_calls},
        {"answer_calls", report.runtime.answer_calls},
        {"cache_hits", report.runtime.cache_hits},
    };
    return out;
}

json deterministic_json(const RunReport& report) {
    json tasks = json::array();
    for (const auto& t : report.tasks) tasks.push_back(trace_to_json(t));
    return {
        {"config", report.config},
        {"tasks", std::move(tasks)},
        {"metrics", metrics_to_json(report.metrics)},
        {"failures",
         {{"failed_tasks", report.failures.failed_tasks},
          {"failed_frames", report.failures.failed_frames},
          {"degraded_frames", report.failures.degraded_frames}}},
        {"aborted", report.aborted},
        {"abort_reason", report.abort_reason},
    };
}

TaskTrace task_trace_from_json(const json& task) {
    TaskTrace t;
    try {
        t.task_id = task.at("id").get<std::string>();
        t.media_id = task.at("media_id").get<std::string>();
        t.media_kind = parse_media_kind(task.at("media_kind").get<std::string>());
        t.answer_type = parse_answer_type(task.at("answer_type").get<std::string>());
        t.failed = task.at("status").get<std::string>() == "failed";
        t.error = task.value("error", std::string{});
        t.t_total = task.at("t_total").get<std::size_t>();
        t.n_sampled = task.at("n_sampled").get<std::size_t>();
        t.k = task.at("k").get<std::size_t>();
        t.scoring_prompt_hash = task.value("scoring_prompt_hash", std::string{});
        std::size_t ordinal = 0;
        for (const auto& f : task.at("frames")) {
            ScoredFrame sf{FrameProposal{t.media_id, f.at("index").get<std::size_t>(), ordinal++}};
            sf.score = f.at("score").get<double>();
            sf.degraded = f.at("degraded").get<bool>();
            sf.failed = f.at("failed").get<bool>();
            sf.error = f.value("error", std::string{});
            t.frames.push_back(std::move(sf));
        }
        const auto& sel = task.at("selection");
        const auto indices = sel.at("indices").get<std::vector<std::size_t>>();
        for (const auto idx : indices) {
            auto it = std::find_if(t.frames.begin(), t.frames.end(),
                                   [&](const ScoredFrame& f) { return f.proposal.frame_index == idx; });
            t.selection.selected.push_back(it != t.frames.end() ? *it : ScoredFrame{FrameProposal{t.media_id, idx, 0}});
        }
        t.selection.k_effective = sel.at("k_effective").get<std::size_t>();
        t.selection.tie_events = sel.at("tie_events").get<std::size_t>();
        t.selection.spread = {sel.at("normalized_span").get<double>(), sel.at("mean_pairwise_gap").get<double>()};
        if (const auto& a = task.at("answer"); !a.is_null())
            t.answer = Answer{a.at("raw").get<std::string>(), a.at("parsed").get<std::string>()};
        if (const auto& c = task.at("correct"); !c.is_null()) t.correct = c.get<bool>();
    } catch (const json::exception& e) {
        throw ValidationError(0, std::string("malformed task trace: ") + e.what());
    }
    return t;
}

std::string score_csv(const TaskTrace& trace) {
    std::vector<std::size_t> selected = trace.selection.frame_indices();
    std::ostringstream os;
    os << "frame_index,score,selected\n";
    for (const auto& f : trace.frames) {
        const bool is_selected = std::binary_search(selected.begin(), selected.end(), f.proposal.frame_index);
        os << f.proposal.frame_index << ',' << format_double(f.score) << ',' << (is_selected ? 1 : 0) << '\n';
    }
    return os.str();
}

BackendSet make_backends(const RunConfig& cfg) {
    if (cfg.mock_fixture) {
        auto mock = std::make_shared<MockBackend>(MockFixture::load(*cfg.mock_fixture));
        return {mock, mock};
    }
    auto key_for = [](const EndpointConfig& ep) {
        const char* v = ep.api_key_env.empty() ? nullptr : std::getenv(ep.api_key_env.c_str());
        return v ? std::string(v) : std::string{};
    };
    return {std::make_shared<HttpChatBackend>(cfg.scorer.base_url, key_for(cfg.scorer), cfg.scorer.timeout_seconds),
            std::make_shared<HttpChatBackend>(cfg.answerer.base_url, key_for(cfg.answerer),
                                              cfg.answerer.timeout_seconds)};
}

std::unique_ptr<ScoreCache> make_cache(const RunConfig& cfg) {
    return cfg.cache_dir ? std::make_unique<ScoreCache>(*cfg.cache_dir) : std::make_unique<ScoreCache>();
}

void write_run_outputs(const RunReport& report, const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "report.json", to_json(report).dump(2) + "\n");
    if (!cfg.write_score_csv) return;
    for (const auto& t : report.tasks) {
        if (!t.frames.empty()) write_text(cfg.out_dir / "scores" / (t.task_id + ".csv"), score_csv(t));
    }
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "n" || text == "n_sampled") return SweepAxis::n_sampled;
    if (text == "k" || text == "k_selected") return SweepAxis::k_selected;
    throw InvalidArgument("sweep axis must be n or k, got " + std::string(text));
}

std::string_view to_string(SweepAxis axis) noexcept { return axis == SweepAxis::n_sampled ? "n_sampled" : "k_selected"; }

std::vector<SweepRow> sweep(const RunConfig& cfg, std::span<const ManifestEntry> entries, SweepAxis axis,
                            std::span<const std::size_t> values, ChatBackend& scorer, ChatBackend& answerer,
                            ScoreCache& cache) {
    if (values.empty()) throw InvalidArgument("sweep needs at least one value");
    std::vector<SweepRow> rows;
    for (const auto value : values) {
        auto run_cfg = cfg;
        (axis == SweepAxis::n_sampled ? run_cfg.n_sampled : run_cfg.k_selected) = value;

        SweepRow row;
        row.value = value;
        row.report = run_pipeline(run_cfg, entries, scorer, answerer, cache);
        row.metrics = row.report.metrics;
        row.scoring_calls = row.report.runtime.scoring_calls;

        std::size_t counted = 0;
        for (const auto& t : row.report.tasks) {
            if (t.failed) continue;
            row.mean_spread.normalized_span += t.selection.spread.normalized_span;
            row.mean_spread.mean_pairwise_gap += t.selection.spread.mean_pairwise_gap;
            ++counted;
        }
        if (counted) {
            row.mean_spread.normalized_span /= static_cast<double>(counted);
            row.mean_spread.mean_pairwise_gap /= static_cast<double>(counted);
        }

        if (axis == SweepAxis::k_selected && !rows.empty() && rows.back().value <= value) {
            const auto& prev = rows.back().report;
            bool nested = true;
            for (std::size_t i = 0; i < prev.tasks.size() && i < row.report.tasks.size(); ++i) {
                const auto small = prev.tasks[i].selection.frame_indices();
                const auto large = row.report.tasks[i].selection.frame_indices();
                nested = nested && std::includes(large.begin(), large.end(), small.begin(), small.end());
            }
            row.nested_with_previous = nested;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows, SweepAxis axis) {
    std::ostringstream os;
    os << to_string(axis)
       << ",n_questions,accuracy,em,f1,anls,mean_normalized_span,mean_pairwise_gap,nested_with_previous,scoring_calls\n";
    for (const auto& r : rows) {
        os << r.value << ',' << r.metrics.n_questions << ',' << format_optional(r.metrics.accuracy) << ','
           << format_optional(r.metrics.em) << ',' << format_optional(r.metrics.f1) << ','
           << format_optional(r.metrics.anls) << ',' << format_double(r.mean_spread.normalized_span) << ','
           << format_double(r.mean_spread.mean_pairwise_gap) << ','
           << (r.nested_with_previous ? (*r.nested_with_previous ? "1" : "0") : "") << ',' << r.scoring_calls << '\n';
    }
    return os.str();
}

}  // namespace frag
