#pragma once

#include "frag/backend.hpp"
#include "frag/media.hpp"
#include "frag/scoring.hpp"
#include "frag/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace frag {

struct EndpointConfig {
    std::string base_url = "http://localhost:8000/v1";
    std::string model;
    std::string api_key_env = "FRAG_API_KEY";
    std::optional<std::string> detail;
    double timeout_seconds = 120.0;
};

enum class SelectionMode {
    frag,     // score every sampled frame, keep the Top-K
    uniform,  // baseline: K uniformly spaced frames, no scoring
};

enum class F1TokenizerKind { qa, whitespace };

struct RunConfig {
    EndpointConfig scorer;
    EndpointConfig answerer;

    /// Unset means the per-kind default (video 256 / 32, document all pages / 2).
    std::optional<std::size_t> n_sampled;
    std::optional<std::size_t> k_selected;

    std::size_t concurrency = 8;
    RetryPolicy retry;
    int top_logprobs = 5;
    int answer_max_tokens = 64;

    std::optional<std::filesystem::path> cache_dir;
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> mock_fixture;
    std::filesystem::path out_dir = "frag-out";
    bool write_score_csv = true;

    std::string scoring_template{kScoringTemplate};
    bool raw_pa = false;
    SelectionMode selection_mode = SelectionMode::frag;
    DecoderConfig decoder;

    double anls_tau = 0.5;
    F1TokenizerKind f1_tokenizer = F1TokenizerKind::qa;

    void validate() const;
};

/// Budget for one media item after applying per-kind defaults and overrides.
SelectionConfig selection_for(const RunConfig& cfg, MediaKind kind);

/// Relative paths in `doc` resolve against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace frag
