#include "frag/config.hpp"

#include "frag/error.hpp"

#include <fstream>
#include <set>

namespace fs = std::filesystem;

namespace frag {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ValidationError(0, "unknown config key " + where + key);
    }
}

EndpointConfig endpoint_from_json(const json& obj, const std::string& where) {
    reject_unknown(obj, {"base_url", "model", "api_key_env", "detail", "timeout_seconds"}, where + ".");
    EndpointConfig ep;
    ep.base_url = obj.value("base_url", ep.base_url);
    ep.model = obj.value("model", ep.model);
    ep.api_key_env = obj.value("api_key_env", ep.api_key_env);
    if (auto it = obj.find("detail"); it != obj.end() && !it->is_null()) ep.detail = it->get<std::string>();
    ep.timeout_seconds = obj.value("timeout_seconds", ep.timeout_seconds);
    return ep;
}

json endpoint_to_json(const EndpointConfig& ep) {
    json out = {{"base_url", ep.base_url}, {"model", ep.model}, {"api_key_env", ep.api_key_env},
                {"timeout_seconds", ep.timeout_seconds}};
    out["detail"] = ep.detail ? json(*ep.detail) : json(nullptr);
    return out;
}

template <typename T>
std::optional<T> optional_field(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

void RunConfig::validate() const {
    if (concurrency < 1) throw ValidationError(0, "concurrency must be >= 1");
    if (n_sampled && *n_sampled < 1) throw ValidationError(0, "n_sampled must be >= 1");
    if (k_selected && *k_selected < 1) throw ValidationError(0, "k_selected must be >= 1");
    if (retry.max_retries < 0) throw ValidationError(0, "retry.max_retries must be >= 0");
    if (top_logprobs < 5) throw ValidationError(0, "top_logprobs must be >= 5");
    if (scoring_template.find("{question}") == std::string::npos)
        throw ValidationError(0, "scoring_template lacks a {question} placeholder");
    if (!(anls_tau > 0.0 && anls_tau <= 1.0)) throw ValidationError(0, "anls_tau must be in (0, 1]");
    if (decoder.fps <= 0.0) throw ValidationError(0, "decoder.fps must be > 0");
}

SelectionConfig selection_for(const RunConfig& cfg, MediaKind kind) {
    auto sel = SelectionConfig::defaults_for(kind);
    if (cfg.n_sampled) sel.n_sampled = cfg.n_sampled;
    if (cfg.k_selected) sel.k = *cfg.k_selected;
    return sel;
}

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw ValidationError(0, "config must be a JSON object");
    reject_unknown(doc,
                   {"scorer", "answerer", "n_sampled", "k_selected", "concurrency", "retry", "top_logprobs",
                    "answer_max_tokens", "cache_dir", "manifest", "mock_fixture", "out_dir", "write_score_csv",
                    "scoring_template", "raw_pa", "selection_mode", "decoder", "anls_tau", "f1_tokenizer"},
                   "");
    RunConfig cfg;
    try {
        if (auto it = doc.find("scorer"); it != doc.end()) cfg.scorer = endpoint_from_json(*it, "scorer");
        if (auto it = doc.find("answerer"); it != doc.end()) cfg.answerer = endpoint_from_json(*it, "answerer");
        cfg.n_sampled = optional_field<std::size_t>(doc, "n_sampled");
        cfg.k_selected = optional_field<std::size_t>(doc, "k_selected");
        cfg.concurrency = doc.value("concurrency", cfg.concurrency);
        if (auto it = doc.find("retry"); it != doc.end()) {
            reject_unknown(*it, {"max_retries", "backoff_seconds"}, "retry.");
            cfg.retry.max_retries = it->value("max_retries", cfg.retry.max_retries);
            cfg.retry.backoff_seconds = it->value("backoff_seconds", cfg.retry.backoff_seconds);
        }
        cfg.top_logprobs = doc.value("top_logprobs", cfg.top_logprobs);
        cfg.answer_max_tokens = doc.value("answer_max_tokens", cfg.answer_max_tokens);
        if (auto p = optional_field<std::string>(doc, "cache_dir")) cfg.cache_dir = resolve(base_dir, *p);
        if (auto p = optional_field<std::string>(doc, "manifest")) cfg.manifest = resolve(base_dir, *p);
        if (auto p = optional_field<std::string>(doc, "mock_fixture")) cfg.mock_fixture = resolve(base_dir, *p);
        if (auto p = optional_field<std::string>(doc, "out_dir")) cfg.out_dir = resolve(base_dir, *p);
        cfg.write_score_csv = doc.value("write_score_csv", cfg.write_score_csv);
        cfg.scoring_template = doc.value("scoring_template", cfg.scoring_template);
        cfg.raw_pa = doc.value("raw_pa", cfg.raw_pa);
        const auto mode = doc.value("selection_mode", std::string("frag"));
        if (mode == "frag") cfg.selection_mode = SelectionMode::frag;
        else if (mode == "uniform") cfg.selection_mode = SelectionMode::uniform;
        else throw ValidationError(0, "selection_mode must be frag or uniform");
        if (auto it = doc.find("decoder"); it != doc.end()) {
            reject_unknown(*it, {"command", "fps", "workdir"}, "decoder.");
            cfg.decoder.command_template = it->value("command", cfg.decoder.command_template);
            cfg.decoder.fps = it->value("fps", cfg.decoder.fps);
            if (auto p = optional_field<std::string>(*it, "workdir")) cfg.decoder.workdir = resolve(base_dir, *p);
        }
        cfg.anls_tau = doc.value("anls_tau", cfg.anls_tau);
        const auto tok = doc.value("f1_tokenizer", std::string("qa"));
        if (tok == "qa") cfg.f1_tokenizer = F1TokenizerKind::qa;
        else if (tok == "whitespace") cfg.f1_tokenizer = F1TokenizerKind::whitespace;
        else throw ValidationError(0, "f1_tokenizer must be qa or whitespace");
    } catch (const json::exception& e) {
        throw ValidationError(0, std::string("invalid config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(0, "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(0, "config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(doc, path.parent_path());
}

json to_json(const RunConfig& cfg) {
    auto opt_size = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    auto opt_path = [](const std::optional<fs::path>& v) { return v ? json(v->string()) : json(nullptr); };
    return {
        {"scorer", endpoint_to_json(cfg.scorer)},
        {"answerer", endpoint_to_json(cfg.answerer)},
        {"n_sampled", opt_size(cfg.n_sampled)},
        {"k_selected", opt_size(cfg.k_selected)},
        {"concurrency", cfg.concurrency},
        {"retry", {{"max_retries", cfg.retry.max_retries}, {"backoff_seconds", cfg.retry.backoff_seconds}}},
        {"top_logprobs", cfg.top_logprobs},
        {"answer_max_tokens", cfg.answer_max_tokens},
        {"cache_dir", opt_path(cfg.cache_dir)},
        {"manifest", cfg.manifest.string()},
        {"mock_fixture", opt_path(cfg.mock_fixture)},
        {"out_dir", cfg.out_dir.string()},
        {"write_score_csv", cfg.write_score_csv},
        {"scoring_template", cfg.scoring_template},
        {"raw_pa", cfg.raw_pa},
        {"selection_mode", cfg.selection_mode == SelectionMode::frag ? "frag" : "uniform"},
        {"decoder",
         {{"command", cfg.decoder.command_template}, {"fps", cfg.decoder.fps}, {"workdir", cfg.decoder.workdir.string()}}},
        {"anls_tau", cfg.anls_tau},
        {"f1_tokenizer", cfg.f1_tokenizer == F1TokenizerKind::qa ? "qa" : "whitespace"},
    };
}

}  // namespace frag
