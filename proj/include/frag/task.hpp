#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace frag {

enum class AnswerType { mcq, extractive };

std::string_view to_string(AnswerType type) noexcept;
AnswerType parse_answer_type(std::string_view text);

struct AnswerOption {
    std::string letter;
    std::string text;
};

/// One question over one media item.
struct QueryTask {
    std::string id;
    std::string question;
    std::vector<AnswerOption> options;  // mcq only, letters A, B, C, ...
    AnswerType answer_type = AnswerType::extractive;
    std::vector<std::string> ground_truths;
    /// Dataset-supplied answer prompt with {question} and {options} placeholders.
    std::optional<std::string> prompt_template;

    /// Throws InvalidArgument when the mcq/extractive invariants do not hold.
    void validate() const;
};

/// "A. red\nB. blue"
std::string render_option_lines(const QueryTask& task);

/// Question followed by the option lines (mcq), exactly as the answer prompt shows them.
std::string render_question_block(const QueryTask& task);

/// Short stable digest of the raw question text; keys planted answers in mock fixtures.
std::string question_hash(std::string_view question);

}  // namespace frag
