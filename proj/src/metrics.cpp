#include "frag/metrics.hpp"

#include "frag/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace frag {

namespace {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) {
            out.push_back(c);  // invalid byte: keep it as its own unit
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
        for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

void require_truths(std::span<const std::string> truths, const char* who) {
    if (truths.empty()) throw InvalidArgument(std::string(who) + ": empty ground-truth list");
}

double f1_tokens(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    if (pred.empty() && truth.empty()) return 1.0;
    if (pred.empty() || truth.empty()) return 0.0;
    std::map<std::string_view, int> counts;
    for (const auto& t : truth) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& p : pred) {
        auto it = counts.find(p);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(truth.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const auto x = decode_utf8(a), y = decode_utf8(b);
    if (x.empty()) return y.size();
    if (y.empty()) return x.size();
    std::vector<std::size_t> row(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[y.size()];
}

std::string normalize_answer(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

double anls_score(std::string_view prediction, std::span<const std::string> truths, double tau) {
    require_truths(truths, "anls_score");
    const auto pred = normalize_answer(prediction);
    const auto pred_len = decode_utf8(pred).size();
    double best = 0.0;
    for (const auto& truth : truths) {
        const auto gt = normalize_answer(truth);
        const auto longest = std::max(pred_len, decode_utf8(gt).size());
        const double nl = longest == 0 ? 0.0 : static_cast<double>(levenshtein(pred, gt)) / static_cast<double>(longest);
        best = std::max(best, nl < tau ? 1.0 - nl : 0.0);
    }
    return best;
}

std::vector<std::string> qa_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isspace(u)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else if (u < 0x80 && std::ispunct(u)) {
            continue;
        } else {
            current.push_back(static_cast<char>(std::tolower(u)));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double word_f1(std::string_view prediction, std::span<const std::string> truths, const Tokenizer& tokenize) {
    require_truths(truths, "word_f1");
    const auto pred = tokenize(prediction);
    double best = 0.0;
    for (const auto& truth : truths) best = std::max(best, f1_tokens(pred, tokenize(truth)));
    return best;
}

int exact_match(std::string_view prediction, std::span<const std::string> truths) {
    const auto pred = normalize_answer(prediction);
    return std::any_of(truths.begin(), truths.end(), [&](const std::string& t) { return normalize_answer(t) == pred; })
               ? 1
               : 0;
}

int mcq_accuracy(std::string_view parsed, std::string_view truth_letter) {
    if (parsed.empty() || parsed == "unparsed") return 0;
    return parsed == truth_letter ? 1 : 0;
}

MetricsReport aggregate(std::vector<QuestionMetrics> per_question) {
    MetricsReport report;
    report.n_questions = per_question.size();
    auto mean_of = [&](std::optional<double> QuestionMetrics::*field) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& q : per_question) {
            if (const auto& v = q.*field) {
                sum += *v;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };
    report.accuracy = mean_of(&QuestionMetrics::accuracy);
    report.em = mean_of(&QuestionMetrics::em);
    report.f1 = mean_of(&QuestionMetrics::f1);
    report.anls = mean_of(&QuestionMetrics::anls);
    report.per_question = std::move(per_question);
    return report;
}

}  // namespace frag
