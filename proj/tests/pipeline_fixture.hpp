#pragma once

#include "frag/manifest.hpp"
#include "frag/mock_backend.hpp"
#include "frag/task.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace frag::testing {

/// Distribution whose renormalized score is exactly representable-ish `p`.
inline TokenDistribution yes_no(double p) {
    return {{"A", std::log(p)}, {"B", std::log(1.0 - p)}, {"C", std::log(1e-6)}};
}

struct PlantedCase {
    std::string task_id;
    std::string media_id;
    std::size_t frames = 20;
    std::vector<std::size_t> planted;
    std::string question;
};

/// A workspace with frame directories, a JSONL manifest and a mock fixture. Every task is an
/// mcq whose mock answer is correct iff all planted frames reach the answerer.
class PlantedWorkspace {
public:
    explicit PlantedWorkspace(std::vector<PlantedCase> cases) : cases_(std::move(cases)) {
        std::ofstream manifest(dir_ / "manifest.jsonl");
        for (std::size_t c = 0; c < cases_.size(); ++c) {
            const auto& pc = cases_[c];
            write_frames(dir_ / "media" / pc.media_id, pc.frames);
            auto& scores = fixture_.scores[pc.media_id];
            for (std::size_t i = 0; i < pc.frames; ++i) {
                const bool planted = std::find(pc.planted.begin(), pc.planted.end(), i) != pc.planted.end();
                // distinct low scores so no ties reach the K boundary
                scores[i] = yes_no(planted ? 0.9 - 0.01 * static_cast<double>(c)
                                           : 0.05 + 0.3 * static_cast<double>(i) / static_cast<double>(pc.frames));
            }
            fixture_.answers[question_hash(pc.question)] = {pc.planted, "B. the planted answer", "A"};
            nlohmann::json line = {{"id", pc.task_id},
                                   {"media_path", "media/" + pc.media_id},
                                   {"media_kind", "video"},
                                   {"question", pc.question},
                                   {"options", {"a decoy", "the planted answer", "another decoy"}},
                                   {"answer_type", "mcq"},
                                   {"ground_truths", {"B"}}};
            manifest << line.dump() << '\n';
        }
        manifest.close();
        std::ofstream(dir_ / "mock.json") << fixture_.to_json().dump();
    }

    std::filesystem::path manifest_path() const { return dir_ / "manifest.jsonl"; }
    std::filesystem::path fixture_path() const { return dir_ / "mock.json"; }
    std::filesystem::path path() const { return dir_.path(); }
    const MockFixture& fixture() const { return fixture_; }
    std::vector<ManifestEntry> entries() const { return load_manifest(manifest_path()); }

private:
    TempDir dir_;
    std::vector<PlantedCase> cases_;
    MockFixture fixture_;
};

inline std::vector<PlantedCase> standard_cases() {
    return {
        {"t0", "clip_a", 20, {3, 17}, "What does the woman pick up?"},
        {"t1", "clip_b", 40, {6, 7}, "Which room does the dog enter first?"},
        {"t2", "clip_c", 64, {50, 61}, "What is written on the final sign?"},
    };
}

}  // namespace frag::testing
