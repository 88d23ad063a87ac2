#pragma once

#include "frag/backend.hpp"

#include <json.hpp>

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace frag {

/// Offline stand-in for the chat endpoint.
///
/// Fixture schema:
///   {"scores":  {media_id: {frame_index: [[token, logprob], ...]}},
///    "answers": {question_hash: {"required_frames": [ints], "correct": str, "incorrect": str}},
///    "default_distribution": [[token, logprob], ...]}        // optional
///
/// Frames missing from "scores" get the default distribution, which is {"B": 0} unless overridden.
/// An answer request returns "correct" iff every required frame is among its images.
struct MockFixture {
    struct PlantedAnswer {
        std::vector<std::size_t> required_frames;
        std::string correct;
        std::string incorrect;
    };

    std::map<std::string, std::map<std::size_t, TokenDistribution>> scores;
    std::map<std::string, PlantedAnswer> answers;
    TokenDistribution default_distribution{{"B", 0.0}};

    static MockFixture from_json(const nlohmann::json& doc);
    static MockFixture load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

class MockBackend : public ChatBackend {
public:
    explicit MockBackend(MockFixture fixture);

    ChatResponse complete(const ChatRequest& request) override;

    std::size_t scoring_calls() const noexcept { return scoring_calls_.load(); }
    std::size_t answer_calls() const noexcept { return answer_calls_.load(); }
    void reset_counters() noexcept;

    const MockFixture& fixture() const noexcept { return fixture_; }

private:
    MockFixture fixture_;
    std::atomic<std::size_t> scoring_calls_{0};
    std::atomic<std::size_t> answer_calls_{0};
};

}  // namespace frag
