// frag: frame-selection question answering over long videos and documents.

#include "frag/error.hpp"
#include "frag/pipeline.hpp"
#include "frag/task.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonFlags {
    std::string config;
    std::string manifest;
    std::optional<std::size_t> k;
    std::optional<std::size_t> n;
    std::string scorer_model;
    std::string answerer_model;
    std::string mock;
    std::string cache;
    std::string out;
    std::optional<std::size_t> concurrency;
    std::string baseline;
    bool raw_pa = false;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--config", f.config, "Run config (JSON)");
    cmd.add_option("--manifest", f.manifest, "Dataset manifest (JSONL)");
    cmd.add_option("--k", f.k, "Top-K selection budget")->check(CLI::PositiveNumber);
    cmd.add_option("--n", f.n, "Uniformly sampled proposals per media item")->check(CLI::PositiveNumber);
    cmd.add_option("--scorer-model", f.scorer_model, "Model used for per-frame scoring");
    cmd.add_option("--answerer-model", f.answerer_model, "Model used for the final answer");
    cmd.add_option("--mock", f.mock, "Mock backend fixture (JSON); replaces both endpoints");
    cmd.add_option("--cache", f.cache, "Score cache directory");
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--concurrency", f.concurrency, "Scoring requests in flight")->check(CLI::PositiveNumber);
    cmd.add_option("--baseline", f.baseline, "Bypass selection: 'uniform' answers from K uniformly spaced frames")
        ->check(CLI::IsMember({"uniform"}));
    cmd.add_flag("--raw-pa", f.raw_pa, "Use raw P(A) instead of P(A)/(P(A)+P(B))");
}

frag::RunConfig resolve_config(const CommonFlags& f) {
    frag::RunConfig cfg = f.config.empty() ? frag::RunConfig{} : frag::load_run_config(f.config);
    if (!f.manifest.empty()) cfg.manifest = f.manifest;
    if (f.k) cfg.k_selected = *f.k;
    if (f.n) cfg.n_sampled = *f.n;
    if (!f.scorer_model.empty()) cfg.scorer.model = f.scorer_model;
    if (!f.answerer_model.empty()) cfg.answerer.model = f.answerer_model;
    if (!f.mock.empty()) cfg.mock_fixture = f.mock;
    if (!f.cache.empty()) cfg.cache_dir = f.cache;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.concurrency) cfg.concurrency = *f.concurrency;
    if (f.baseline == "uniform") cfg.selection_mode = frag::SelectionMode::uniform;
    if (f.raw_pa) cfg.raw_pa = true;
    if (cfg.manifest.empty()) throw frag::ValidationError(0, "no manifest given (--manifest or config \"manifest\")");
    cfg.validate();
    return cfg;
}

void print_metrics(const frag::MetricsReport& m) {
    std::cout << "questions: " << m.n_questions << '\n';
    auto line = [](const char* name, const std::optional<double>& v) {
        if (v) std::cout << name << ": " << *v << '\n';
    };
    line("accuracy", m.accuracy);
    line("em", m.em);
    line("f1", m.f1);
    line("anls", m.anls);
}

std::vector<std::size_t> parse_values(const std::string& text) {
    std::vector<std::size_t> values;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const auto v = std::stoull(item, &used);
        if (used != item.size() || v == 0) throw frag::InvalidArgument("bad sweep value: " + item);
        values.push_back(static_cast<std::size_t>(v));
    }
    return values;
}

int cmd_run(const CommonFlags& flags) {
    const auto cfg = resolve_config(flags);
    const auto entries = frag::load_manifest(cfg.manifest, {.require_media = false});
    auto backends = frag::make_backends(cfg);
    auto cache = frag::make_cache(cfg);
    const auto report = frag::run_pipeline(cfg, entries, *backends.scorer, *backends.answerer, *cache);
    frag::write_run_outputs(report, cfg);

    print_metrics(report.metrics);
    std::cout << "failed tasks: " << report.failures.failed_tasks << ", failed frames: " << report.failures.failed_frames
              << ", degraded frames: " << report.failures.degraded_frames << '\n';
    std::cout << "report: " << (cfg.out_dir / "report.json").string() << '\n';
    if (report.aborted) {
        std::cerr << "run aborted: " << report.abort_reason << '\n';
        return 3;
    }
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis_text, const std::string& values_text) {
    const auto cfg = resolve_config(flags);
    const auto axis = frag::parse_sweep_axis(axis_text);
    const auto values = parse_values(values_text);
    const auto entries = frag::load_manifest(cfg.manifest, {.require_media = false});
    auto backends = frag::make_backends(cfg);
    auto cache = frag::make_cache(cfg);
    const auto rows = frag::sweep(cfg, entries, axis, values, *backends.scorer, *backends.answerer, *cache);

    const auto csv = frag::sweep_csv(rows, axis);
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = cfg.out_dir / ("sweep_" + std::string(frag::to_string(axis)) + ".csv");
    std::ofstream(path) << csv;
    std::cout << csv;
    std::cerr << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_score_dump(const std::string& task_id, const std::string& report_path, std::optional<std::size_t> k) {
    std::ifstream in(report_path);
    if (!in) throw frag::ValidationError(0, "cannot open report " + report_path);
    const auto doc = nlohmann::json::parse(in);
    for (const auto& task : doc.at("tasks")) {
        if (task.at("id").get<std::string>() != task_id) continue;
        auto trace = frag::task_trace_from_json(task);
        if (k) {
            if (trace.frames.empty()) throw frag::InvalidArgument("task " + task_id + " has no frame scores to replay");
            trace.selection = frag::select_top_k(trace.frames, {*k, trace.n_sampled}, trace.t_total);
        }
        std::cout << frag::score_csv(trace);
        return 0;
    }
    throw frag::InvalidArgument("task " + task_id + " not found in " + report_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frame selection augmented question answering over long videos and documents"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "Score, select and answer every task in a manifest");
    add_common(*run, run_flags);

    CommonFlags sweep_flags;
    std::string axis, values;
    auto* sweep = app.add_subcommand("sweep", "Repeat the run over N (sampled) or K (selected) values");
    add_common(*sweep, sweep_flags);
    sweep->add_option("--axis", axis, "n or k")->required()->check(CLI::IsMember({"n", "k"}));
    sweep->add_option("--values", values, "Comma-separated values, e.g. 64,128,256")->required();

    std::string task_id, report_path = "frag-out/report.json";
    std::optional<std::size_t> dump_k;
    auto* dump = app.add_subcommand("score-dump", "Print frame_index,score,selected for one task of a report");
    dump->add_option("--task", task_id, "Task id")->required();
    dump->add_option("--report", report_path, "Report file")->capture_default_str();
    dump->add_option("--k", dump_k, "Replay selection with this K instead of the recorded one")
        ->check(CLI::PositiveNumber);

    std::string question;
    auto* hash = app.add_subcommand("hash-question", "Print the mock-fixture key for a question");
    hash->add_option("question", question, "Question text")->required();

    auto* defaults = app.add_subcommand("defaults", "Print the default run config and per-kind budgets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, axis, values);
        if (dump->parsed()) return cmd_score_dump(task_id, report_path, dump_k);
        if (hash->parsed()) {
            std::cout << frag::question_hash(question) << '\n';
            return 0;
        }
        if (defaults->parsed()) {
            auto doc = frag::to_json(frag::RunConfig{});
            for (auto kind : {frag::MediaKind::video, frag::MediaKind::document}) {
                const auto sel = frag::SelectionConfig::defaults_for(kind);
                doc["per_kind_defaults"][std::string(frag::to_string(kind))] = {
                    {"n_sampled", sel.n_sampled ? nlohmann::json(*sel.n_sampled) : nlohmann::json("all")},
                    {"k_selected", sel.k}};
            }
            std::cout << doc.dump(2) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
