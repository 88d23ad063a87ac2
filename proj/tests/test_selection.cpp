#include "frag/error.hpp"
#include "frag/selection.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace frag;

namespace {

std::vector<ScoredFrame> frames_from_scores(const std::vector<double>& scores) {
    std::vector<ScoredFrame> out;
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back(ScoredFrame{FrameProposal{"m", i, i}, scores[i]});
    return out;
}

// Independent route: full sort of (index, score) pairs.
std::set<std::size_t> oracle_top_k(const std::vector<ScoredFrame>& frames, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> keyed;
    for (const auto& f : frames) keyed.emplace_back(-(f.failed ? 0.0 : f.score), f.proposal.frame_index);
    std::sort(keyed.begin(), keyed.end());
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, keyed.size()); ++i) out.insert(keyed[i].second);
    return out;
}

}  // namespace

TEST_CASE("select_top_k worked examples") {
    const auto r = select_top_k(frames_from_scores({0.1, 0.9, 0.5, 0.9}), {2, 4}, 4);
    CHECK(r.frame_indices() == std::vector<std::size_t>{1, 3});
    CHECK(r.k_effective == 2);
    CHECK(r.tie_events == 0);

    const auto ties = select_top_k(frames_from_scores({0.9, 0.9, 0.9}), {2, 3}, 3);
    CHECK(ties.frame_indices() == std::vector<std::size_t>{0, 1});
    CHECK(ties.tie_events == 1);

    const auto clamp = select_top_k(frames_from_scores({0.3, 0.1, 0.2}), {10, 3}, 3);
    CHECK(clamp.frame_indices() == std::vector<std::size_t>{0, 1, 2});
    CHECK(clamp.k_effective == 3);

    CHECK_THROWS_AS(select_top_k(std::vector<ScoredFrame>{}, {2, 0}, 1), InvalidArgument);
    CHECK_THROWS_AS(select_top_k(frames_from_scores({0.5}), {0, 1}, 1), InvalidArgument);
}

TEST_CASE("failed frames compete with score zero") {
    auto frames = frames_from_scores({0.0, 0.95, 0.2});
    frames[1].failed = true;
    const auto r = select_top_k(frames, {2, 3}, 3);
    CHECK(r.frame_indices() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("select_top_k agrees with a full-sort oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 512), kk(1, 64), coarse(0, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = len(rng);
        std::vector<double> scores(n);
        // half the trials use a coarse grid so ties are common
        for (auto& s : scores) s = trial % 2 ? u(rng) : static_cast<double>(coarse(rng)) / 10.0;
        const auto frames = frames_from_scores(scores);
        const auto k = kk(rng);
        const auto r = select_top_k(frames, {k, n}, n);
        const auto idx = r.frame_indices();
        REQUIRE(std::set<std::size_t>(idx.begin(), idx.end()) == oracle_top_k(frames, k));
        REQUIRE(std::is_sorted(idx.begin(), idx.end()));
        REQUIRE(idx.size() == r.k_effective);
    }
}

TEST_CASE("selection properties: permutation invariance and nested budgets") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> grid(0, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores(60);
        for (auto& s : scores) s = grid(rng) / 5.0;
        auto frames = frames_from_scores(scores);
        const auto base = select_top_k(frames, {8, 60}, 60);

        std::shuffle(frames.begin(), frames.end(), rng);
        const auto shuffled = select_top_k(frames, {8, 60}, 60);
        REQUIRE(shuffled.frame_indices() == base.frame_indices());
        REQUIRE(shuffled.tie_events == base.tie_events);
        REQUIRE(shuffled.spread == base.spread);

        for (std::size_t k = 1; k < 20; ++k) {
            const auto small = select_top_k(frames, {k, 60}, 60).frame_indices();
            const auto large = select_top_k(frames, {k + 1, 60}, 60).frame_indices();
            REQUIRE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
        }

        // nothing left out scores above anything selected
        const auto chosen = base.frame_indices();
        double min_in = 1.0, max_out = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (std::binary_search(chosen.begin(), chosen.end(), i)) min_in = std::min(min_in, scores[i]);
            else max_out = std::max(max_out, scores[i]);
        }
        REQUIRE(min_in >= max_out);
    }
}

TEST_CASE("diversity worked examples") {
    const std::vector<std::size_t> extremes{0, 99};
    CHECK(diversity(extremes, 100).normalized_span == 1.0);

    const std::vector<std::size_t> single{50};
    CHECK(diversity(single, 100) == DiversityStats{0.0, 0.0});
    CHECK(diversity(single, 1) == DiversityStats{0.0, 0.0});

    const std::vector<std::size_t> three{10, 20, 30};
    const auto d = diversity(three, 101);
    CHECK(d.normalized_span == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d.mean_pairwise_gap == doctest::Approx((10.0 + 20.0 + 10.0) / 3.0 / 100.0).epsilon(1e-12));

    CHECK_THROWS_AS(diversity(three, 0), InvalidArgument);
}

TEST_CASE("mean pairwise gap matches the direct pair sum") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> idx(0, 999);
    for (int trial = 0; trial < 50; ++trial) {
        std::set<std::size_t> picks;
        while (picks.size() < 12) picks.insert(idx(rng));
        const std::vector<std::size_t> v(picks.begin(), picks.end());
        double sum = 0.0;
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b) sum += static_cast<double>(v[b] - v[a]);
        const double expected = sum / (12.0 * 11.0 / 2.0) / 999.0;
        const auto stats = diversity(v, 1000);
        REQUIRE(stats.mean_pairwise_gap == doctest::Approx(expected).epsilon(1e-12));
        REQUIRE(stats.mean_pairwise_gap <= 1.0);
        REQUIRE(stats.normalized_span <= 1.0);
    }
}

TEST_CASE("defaults per media kind") {
    const auto video = SelectionConfig::defaults_for(MediaKind::video);
    CHECK(video.k == 32);
    CHECK(video.n_sampled == std::optional<std::size_t>(256));
    const auto doc = SelectionConfig::defaults_for(MediaKind::document);
    CHECK(doc.k == 2);
    CHECK_FALSE(doc.n_sampled.has_value());
}
