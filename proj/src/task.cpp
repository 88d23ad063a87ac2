#include "frag/task.hpp"

#include "frag/digest.hpp"
#include "frag/error.hpp"

namespace frag {

std::string_view to_string(AnswerType type) noexcept {
    return type == AnswerType::mcq ? "mcq" : "extractive";
}

AnswerType parse_answer_type(std::string_view text) {
    if (text == "mcq") return AnswerType::mcq;
    if (text == "extractive") return AnswerType::extractive;
    throw InvalidArgument("unknown answer_type: " + std::string(text));
}

void QueryTask::validate() const {
    if (question.empty()) throw InvalidArgument("task " + id + ": empty question");
    if (answer_type == AnswerType::extractive) {
        if (!options.empty()) throw InvalidArgument("task " + id + ": extractive task must not have options");
        return;
    }
    if (options.empty()) throw InvalidArgument("task " + id + ": mcq task needs options");
    for (std::size_t i = 0; i < options.size(); ++i) {
        const std::string expected(1, static_cast<char>('A' + i));
        if (options[i].letter != expected)
            throw InvalidArgument("task " + id + ": option " + std::to_string(i) + " must use letter " + expected);
    }
}

std::string render_option_lines(const QueryTask& task) {
    std::string out;
    for (const auto& opt : task.options) {
        if (!out.empty()) out.push_back('\n');
        out += opt.letter + ". " + opt.text;
    }
    return out;
}

std::string render_question_block(const QueryTask& task) {
    if (task.options.empty()) return task.question;
    return task.question + "\n" + render_option_lines(task);
}

std::string question_hash(std::string_view question) {
    return sha256_hex(question).substr(0, 16);
}

}  // namespace frag
