#pragma once

#include "frag/backend.hpp"
#include "frag/media.hpp"
#include "frag/task.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace frag {

/// Per-frame relevance question. {question} is replaced by the question block.
inline constexpr std::string_view kScoringTemplate =
    "Question: {question}\n"
    "Does the information within the image provide the necessary details to accurately answer the given "
    "question?\n"
    "A. yes\n"
    "B. no\n"
    "Answer with the option's letter from the given choices directly.";

struct ScoringPrompt {
    std::string query_text;
    std::string rendered;

    /// SHA-256 of the rendered prompt; part of every score cache key.
    std::string hash() const;
};

/// Embeds the question (with mcq option lines) into `prompt_template`.
ScoringPrompt build_scoring_prompt(const QueryTask& task, std::string_view prompt_template = kScoringTemplate);

enum class ScoreMode {
    renormalized,  // pA / (pA + pB) when both letters are observed
    raw_a,         // pA as reported
};

struct ScoreExtraction {
    double score = 0.0;
    bool degraded = false;  // neither option letter was among the alternatives
};

/// "A", " A", "A." and "A:" all normalize to "A".
std::string normalize_option_token(std::string_view token);

ScoreExtraction extract_score(const TokenDistribution& dist, ScoreMode mode = ScoreMode::renormalized);

struct ScoredFrame {
    FrameProposal proposal;
    double score = 0.0;
    bool degraded = false;
    bool failed = false;   // transport failure after retries; score stays 0
    std::string error;

    bool operator==(const ScoredFrame&) const = default;
};

struct ScoringOptions {
    std::string model;
    int top_logprobs = 5;
    std::optional<std::string> detail;
    ScoreMode mode = ScoreMode::renormalized;
    RetryPolicy retry;
};

ChatRequest build_scoring_request(const FrameProposal& frame, ImagePayload image, const ScoringPrompt& prompt,
                                  const ScoringOptions& options);

/// One single-image request, one generated token. Transport failures yield a failed frame;
/// a malformed response throws ProtocolError.
ScoredFrame score_frame(ChatBackend& backend, const FrameProposal& frame, ImagePayload image,
                        const ScoringPrompt& prompt, const ScoringOptions& options);

}  // namespace frag
