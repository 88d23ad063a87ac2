#include "frag/scoring.hpp"

#include "frag/digest.hpp"
#include "frag/error.hpp"

#include <algorithm>
#include <cmath>

namespace frag {

namespace {

constexpr std::string_view kPlaceholder = "{question}";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::string ScoringPrompt::hash() const { return sha256_hex(rendered); }

ScoringPrompt build_scoring_prompt(const QueryTask& task, std::string_view prompt_template) {
    if (task.question.empty()) throw InvalidArgument("scoring prompt needs a non-empty question");
    const auto at = prompt_template.find(kPlaceholder);
    if (at == std::string_view::npos) throw InvalidArgument("scoring template lacks a {question} placeholder");

    ScoringPrompt prompt;
    prompt.query_text = render_question_block(task);
    prompt.rendered.reserve(prompt_template.size() + prompt.query_text.size());
    prompt.rendered.append(prompt_template.substr(0, at));
    prompt.rendered.append(prompt.query_text);
    prompt.rendered.append(prompt_template.substr(at + kPlaceholder.size()));
    return prompt;
}

std::string normalize_option_token(std::string_view token) {
    while (!token.empty() && is_space(token.front())) token.remove_prefix(1);
    while (!token.empty() && is_space(token.back())) token.remove_suffix(1);
    if (!token.empty() && (token.back() == '.' || token.back() == ':')) token.remove_suffix(1);
    return std::string(token);
}

ScoreExtraction extract_score(const TokenDistribution& dist, ScoreMode mode) {
    std::optional<double> log_a, log_b;
    for (const auto& t : dist) {
        const auto norm = normalize_option_token(t.token);
        if (norm == "A" && !log_a) log_a = t.logprob;
        else if (norm == "B" && !log_b) log_b = t.logprob;
    }

    if (!log_a && !log_b) return {0.0, true};
    if (!log_a) return {0.0, false};
    const double p_a = std::min(1.0, std::exp(*log_a));
    if (!log_b || mode == ScoreMode::raw_a) return {p_a, false};
    // pA / (pA + pB), evaluated in log space so tiny probabilities do not underflow
    return {1.0 / (1.0 + std::exp(*log_b - *log_a)), false};
}

ChatRequest build_scoring_request(const FrameProposal& frame, ImagePayload image, const ScoringPrompt& prompt,
                                  const ScoringOptions& options) {
    if (image.bytes.empty()) throw InvalidArgument("empty image payload for frame " + std::to_string(frame.frame_index));
    ChatRequest req;
    req.model = options.model;
    req.images.push_back({std::move(image), frame.media_id, frame.frame_index});
    req.text = prompt.rendered;
    req.temperature = 0.0;
    req.max_tokens = 1;
    req.top_logprobs = std::max(5, options.top_logprobs);
    req.detail = options.detail;
    return req;
}

ScoredFrame score_frame(ChatBackend& backend, const FrameProposal& frame, ImagePayload image,
                        const ScoringPrompt& prompt, const ScoringOptions& options) {
    const auto request = build_scoring_request(frame, std::move(image), prompt, options);
    ScoredFrame out{frame};
    ChatResponse response;
    try {
        response = complete_with_retry(backend, request, options.retry);
    } catch (const TransportError& e) {
        out.failed = true;
        out.error = std::string(e.what()) + (e.body().empty() ? "" : ": " + e.body());
        return out;
    }
    if (!response.top_logprobs)
        throw ProtocolError("scoring response carries no logprobs", response.content);
    const auto extracted = extract_score(*response.top_logprobs, options.mode);
    out.score = extracted.score;
    out.degraded = extracted.degraded;
    return out;
}

}  // namespace frag
