#include "frag/selection.hpp"

#include "frag/error.hpp"

#include <algorithm>
#include <numeric>

namespace frag {

namespace {

double effective_score(const ScoredFrame& f) { return f.failed ? 0.0 : f.score; }

bool ranks_before(const ScoredFrame& a, const ScoredFrame& b) {
    const double sa = effective_score(a), sb = effective_score(b);
    if (sa != sb) return sa > sb;
    return a.proposal.frame_index < b.proposal.frame_index;
}

}  // namespace

SelectionConfig SelectionConfig::defaults_for(MediaKind kind) noexcept {
    if (kind == MediaKind::document) return {2, std::nullopt};
    return {32, 256};
}

std::vector<std::size_t> SelectionResult::frame_indices() const {
    std::vector<std::size_t> out;
    out.reserve(selected.size());
    for (const auto& f : selected) out.push_back(f.proposal.frame_index);
    return out;
}

SelectionResult select_top_k(std::span<const ScoredFrame> scored, const SelectionConfig& cfg, std::size_t t_total) {
    if (scored.empty()) throw InvalidArgument("select_top_k: no scored frames");
    if (cfg.k == 0) throw InvalidArgument("select_top_k: k must be >= 1");

    std::vector<const ScoredFrame*> order(scored.size());
    std::transform(scored.begin(), scored.end(), order.begin(), [](const ScoredFrame& f) { return &f; });
    const auto k = std::min(cfg.k, scored.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [](const ScoredFrame* a, const ScoredFrame* b) { return ranks_before(*a, *b); });

    SelectionResult result;
    result.k_effective = k;
    const double boundary = effective_score(*order[k - 1]);
    result.tie_events = static_cast<std::size_t>(std::count_if(
        order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
        [&](const ScoredFrame* f) { return effective_score(*f) == boundary; }));

    result.selected.reserve(k);
    for (std::size_t i = 0; i < k; ++i) result.selected.push_back(*order[i]);
    std::sort(result.selected.begin(), result.selected.end(), [](const ScoredFrame& a, const ScoredFrame& b) {
        return a.proposal.frame_index < b.proposal.frame_index;
    });
    result.spread = diversity(result, std::max<std::size_t>(t_total, 1));
    return result;
}

DiversityStats diversity(std::span<const std::size_t> sorted_indices, std::size_t t_total) {
    if (t_total == 0) throw InvalidArgument("diversity: t_total must be >= 1");
    DiversityStats stats;
    const auto n = sorted_indices.size();
    if (t_total == 1 || n < 2) return stats;

    const double denom = static_cast<double>(t_total - 1);
    stats.normalized_span = static_cast<double>(sorted_indices.back() - sorted_indices.front()) / denom;

    // Sum of |a - b| over pairs of a sorted sequence: sum_i x_i * (2i - n + 1).
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weighted += static_cast<double>(sorted_indices[i]) * (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0);
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    stats.mean_pairwise_gap = weighted / pairs / denom;
    return stats;
}

DiversityStats diversity(const SelectionResult& selection, std::size_t t_total) {
    const auto indices = selection.frame_indices();
    return diversity(std::span<const std::size_t>(indices), t_total);
}

}  // namespace frag
