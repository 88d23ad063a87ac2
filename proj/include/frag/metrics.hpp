#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace frag {

/// Unit-cost edit distance over Unicode code points (UTF-8 input).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Lowercase, trim, collapse internal whitespace runs to one space.
std::string normalize_answer(std::string_view text);

/// Max over truths of (1 - NL) when NL < tau, else 0.
double anls_score(std::string_view prediction, std::span<const std::string> truths, double tau = 0.5);

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Lowercase, drop ASCII punctuation, split on whitespace.
std::vector<std::string> qa_tokenize(std::string_view text);

/// Multiset-overlap F1, max over truths.
double word_f1(std::string_view prediction, std::span<const std::string> truths,
               const Tokenizer& tokenize = qa_tokenize);

int exact_match(std::string_view prediction, std::span<const std::string> truths);
int mcq_accuracy(std::string_view parsed, std::string_view truth_letter);

struct QuestionMetrics {
    std::string task_id;
    std::optional<double> accuracy;
    std::optional<double> em;
    std::optional<double> f1;
    std::optional<double> anls;
};

/// Aggregates are means over the questions that carry the metric; absent when none do.
struct MetricsReport {
    std::size_t n_questions = 0;
    std::optional<double> accuracy;
    std::optional<double> em;
    std::optional<double> f1;
    std::optional<double> anls;
    std::vector<QuestionMetrics> per_question;
};

MetricsReport aggregate(std::vector<QuestionMetrics> per_question);

}  // namespace frag
