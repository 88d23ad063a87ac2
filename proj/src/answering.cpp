#include "frag/answering.hpp"

#include "frag/error.hpp"

#include <algorithm>
#include <cctype>

namespace frag {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
    return text;
}

std::string parse_mcq(std::string_view raw, const QueryTask& task) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0 && is_alnum(raw[i - 1])) continue;
        if (i + 1 < raw.size() && is_alnum(raw[i + 1])) continue;
        for (const auto& opt : task.options) {
            if (opt.letter.size() == 1 && raw[i] == opt.letter[0]) return opt.letter;
        }
    }
    const auto body = trim(raw);
    for (const auto& opt : task.options) {
        if (iequals(body, opt.text)) return opt.letter;
    }
    return std::string(kUnparsed);
}

std::string parse_extractive(std::string_view raw) {
    auto s = trim(raw);
    while (!s.empty() && s.back() == '.') s = trim(s.substr(0, s.size() - 1));
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string render_answer_text(const QueryTask& task) {
    if (task.prompt_template) {
        auto text = replace_all(*task.prompt_template, "{question}", task.question);
        return replace_all(std::move(text), "{options}", render_option_lines(task));
    }
    const auto& instruction = task.answer_type == AnswerType::mcq ? kMcqInstruction : kExtractiveInstruction;
    return render_question_block(task) + "\n" + std::string(instruction);
}

ChatRequest build_answer_request(const QueryTask& task, std::span<const FrameProposal> frames,
                                 std::vector<ImagePayload> images, const AnswerOptions& options) {
    if (frames.empty()) throw InvalidArgument("answer request needs at least one frame");
    if (frames.size() != images.size())
        throw InvalidArgument("answer request: " + std::to_string(images.size()) + " images for " +
                              std::to_string(frames.size()) + " selected frames");
    ChatRequest req;
    req.model = options.model;
    req.images.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        req.images.push_back({std::move(images[i]), frames[i].media_id, frames[i].frame_index});
    req.text = render_answer_text(task);
    req.temperature = 0.0;
    req.max_tokens = options.max_tokens;
    req.detail = options.detail;
    req.question_hash = question_hash(task.question);
    return req;
}

ChatRequest build_answer_request(const QueryTask& task, const SelectionResult& selection,
                                 std::vector<ImagePayload> images, const AnswerOptions& options) {
    std::vector<FrameProposal> frames;
    frames.reserve(selection.selected.size());
    for (const auto& f : selection.selected) frames.push_back(f.proposal);
    return build_answer_request(task, frames, std::move(images), options);
}

std::string parse_answer(std::string_view raw, const QueryTask& task) {
    return task.answer_type == AnswerType::mcq ? parse_mcq(raw, task) : parse_extractive(raw);
}

}  // namespace frag
