#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace frag {

struct ScoreCacheEntry {
    double score = 0.0;
    bool degraded = false;
    std::int64_t timestamp = 0;  // unix seconds when first computed
};

/// Content-addressed key over everything that determines a frame's score.
std::string score_cache_key(std::string_view scorer_model, std::string_view media_id, std::size_t frame_index,
                            std::string_view prompt_hash, bool raw_pa);

/// Frame score cache shared by concurrent scoring workers.
///
/// Always memory-backed; with a directory it also persists one JSON file per key
/// (<dir>/<key[0:2]>/<key>.json) written via rename, so an upsert is atomic.
/// Scores are stored as IEEE-754 bit patterns and come back bit-identical.
class ScoreCache {
public:
    ScoreCache() = default;
    explicit ScoreCache(std::filesystem::path dir);

    ScoreCache(const ScoreCache&) = delete;
    ScoreCache& operator=(const ScoreCache&) = delete;

    std::optional<ScoreCacheEntry> get(const std::string& key) const;
    void put(const std::string& key, const ScoreCacheEntry& entry);

    std::size_t memory_size() const;
    const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

private:
    std::filesystem::path file_for(const std::string& key) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mutex_;
    mutable std::map<std::string, ScoreCacheEntry, std::less<>> entries_;
};

}  // namespace frag
