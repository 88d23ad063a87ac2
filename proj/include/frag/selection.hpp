#pragma once

#include "frag/media.hpp"
#include "frag/scoring.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace frag {

/// Top-K budget. `n_sampled` unset means "every frame/page".
struct SelectionConfig {
    std::size_t k = 32;
    std::optional<std::size_t> n_sampled = 256;

    /// Video: 256 sampled, Top-32. Document: all pages, Top-2.
    static SelectionConfig defaults_for(MediaKind kind) noexcept;
};

struct DiversityStats {
    double normalized_span = 0.0;     // (max - min) / (T - 1)
    double mean_pairwise_gap = 0.0;   // mean |a - b| over pairs, / (T - 1)

    bool operator==(const DiversityStats&) const = default;
};

struct SelectionResult {
    std::vector<ScoredFrame> selected;  // ascending frame_index
    std::size_t k_effective = 0;
    std::size_t tie_events = 0;         // non-selected frames tied with the K-th score
    DiversityStats spread;

    std::vector<std::size_t> frame_indices() const;
};

/// Top-K by (score desc, frame_index asc), returned in presentation order.
/// Failed frames compete with score 0. `t_total` is only used for the spread.
SelectionResult select_top_k(std::span<const ScoredFrame> scored, const SelectionConfig& cfg, std::size_t t_total);

DiversityStats diversity(std::span<const std::size_t> sorted_indices, std::size_t t_total);
DiversityStats diversity(const SelectionResult& selection, std::size_t t_total);

}  // namespace frag
