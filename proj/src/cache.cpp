#include "frag/cache.hpp"

#include "frag/digest.hpp"
#include "frag/error.hpp"

#include <json.hpp>

#include <atomic>
#include <bit>
#include <fstream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;

namespace frag {

using nlohmann::json;

std::string score_cache_key(std::string_view scorer_model, std::string_view media_id, std::size_t frame_index,
                            std::string_view prompt_hash, bool raw_pa) {
    // length-prefixed fields so no concatenation of two keys can collide
    std::string material;
    for (std::string_view part : {scorer_model, media_id, prompt_hash}) {
        material += std::to_string(part.size());
        material += ':';
        material += part;
    }
    material += '#' + std::to_string(frame_index) + (raw_pa ? "#raw" : "#norm");
    return sha256_hex(material);
}

ScoreCache::ScoreCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(*dir_); }

fs::path ScoreCache::file_for(const std::string& key) const { return *dir_ / key.substr(0, 2) / (key + ".json"); }

std::optional<ScoreCacheEntry> ScoreCache::get(const std::string& key) const {
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    if (!dir_) return std::nullopt;

    std::ifstream in(file_for(key));
    if (!in) return std::nullopt;
    ScoreCacheEntry entry;
    try {
        const auto doc = json::parse(in);
        entry.score = std::bit_cast<double>(doc.at("score_bits").get<std::uint64_t>());
        entry.degraded = doc.at("degraded").get<bool>();
        entry.timestamp = doc.at("timestamp").get<std::int64_t>();
    } catch (const json::exception&) {
        return std::nullopt;  // torn or foreign file: treat as a miss and rescore
    }
    std::unique_lock lock(mutex_);
    entries_.emplace(key, entry);
    return entry;
}

void ScoreCache::put(const std::string& key, const ScoreCacheEntry& entry) {
    {
        std::unique_lock lock(mutex_);
        entries_.insert_or_assign(key, entry);
    }
    if (!dir_) return;

    static std::atomic<std::uint64_t> counter{0};
    const auto target = file_for(key);
    fs::create_directories(target.parent_path());
    const auto tmp = target.parent_path() /
                     (key + ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
                      std::to_string(counter++));
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write cache file " + tmp.string());
        out << json{{"score", entry.score},
                    {"score_bits", std::bit_cast<std::uint64_t>(entry.score)},
                    {"degraded", entry.degraded},
                    {"timestamp", entry.timestamp}}
                   .dump();
    }
    fs::rename(tmp, target);
}

std::size_t ScoreCache::memory_size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

}  // namespace frag
