#pragma once

#include "frag/backend.hpp"
#include "frag/selection.hpp"
#include "frag/task.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace frag {

inline constexpr std::string_view kMcqInstruction = "Answer with the option's letter from the given choices directly.";
inline constexpr std::string_view kExtractiveInstruction = "Answer the question using a single word or phrase.";
inline constexpr std::string_view kUnparsed = "unparsed";

struct AnswerOptions {
    std::string model;
    int max_tokens = 64;
    std::optional<std::string> detail;
};

struct Answer {
    std::string raw;
    std::string parsed;
};

/// Text part of the answer request. A task-level prompt_template replaces the default layout.
std::string render_answer_text(const QueryTask& task);

/// Images (already in presentation order) followed by the question text.
ChatRequest build_answer_request(const QueryTask& task, std::span<const FrameProposal> frames,
                                 std::vector<ImagePayload> images, const AnswerOptions& options);
ChatRequest build_answer_request(const QueryTask& task, const SelectionResult& selection,
                                 std::vector<ImagePayload> images, const AnswerOptions& options);

/// mcq: option letter or "unparsed". extractive: trimmed, trailing periods dropped, whitespace collapsed.
std::string parse_answer(std::string_view raw, const QueryTask& task);

}  // namespace frag
