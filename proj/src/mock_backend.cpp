#include "frag/mock_backend.hpp"

#include "frag/error.hpp"

#include <algorithm>
#include <fstream>

namespace frag {

using nlohmann::json;

namespace {

TokenDistribution parse_distribution(const json& arr) {
    TokenDistribution dist;
    for (const auto& pair : arr) dist.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
    return dist;
}

json dump_distribution(const TokenDistribution& dist) {
    json arr = json::array();
    for (const auto& t : dist) arr.push_back(json::array({t.token, t.logprob}));
    return arr;
}

}  // namespace

MockFixture MockFixture::from_json(const json& doc) {
    MockFixture fx;
    try {
        if (auto it = doc.find("scores"); it != doc.end()) {
            for (const auto& [media_id, frames] : it->items()) {
                auto& per_media = fx.scores[media_id];
                for (const auto& [index, dist] : frames.items())
                    per_media[static_cast<std::size_t>(std::stoull(index))] = parse_distribution(dist);
            }
        }
        if (auto it = doc.find("answers"); it != doc.end()) {
            for (const auto& [hash, entry] : it->items()) {
                PlantedAnswer a;
                a.required_frames = entry.value("required_frames", std::vector<std::size_t>{});
                a.correct = entry.at("correct").get<std::string>();
                a.incorrect = entry.at("incorrect").get<std::string>();
                fx.answers.emplace(hash, std::move(a));
            }
        }
        if (auto it = doc.find("default_distribution"); it != doc.end())
            fx.default_distribution = parse_distribution(*it);
    } catch (const std::exception& e) {
        throw ValidationError(0, std::string("invalid mock fixture: ") + e.what());
    }
    return fx;
}

MockFixture MockFixture::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(0, "cannot open mock fixture " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(0, "mock fixture " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

json MockFixture::to_json() const {
    json scores_json = json::object();
    for (const auto& [media_id, frames] : scores) {
        json per_media = json::object();
        for (const auto& [index, dist] : frames) per_media[std::to_string(index)] = dump_distribution(dist);
        scores_json[media_id] = std::move(per_media);
    }
    json answers_json = json::object();
    for (const auto& [hash, a] : answers)
        answers_json[hash] = {{"required_frames", a.required_frames}, {"correct", a.correct}, {"incorrect", a.incorrect}};
    return {{"scores", scores_json}, {"answers", answers_json},
            {"default_distribution", dump_distribution(default_distribution)}};
}

MockBackend::MockBackend(MockFixture fixture) : fixture_(std::move(fixture)) {}

void MockBackend::reset_counters() noexcept {
    scoring_calls_ = 0;
    answer_calls_ = 0;
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
    ChatResponse out;
    if (request.top_logprobs) {
        ++scoring_calls_;
        if (request.images.size() != 1) throw TransportError(400, "scoring request must carry exactly one image");
        const auto& img = request.images.front();
        const TokenDistribution* dist = &fixture_.default_distribution;
        if (auto m = fixture_.scores.find(img.media_id); m != fixture_.scores.end()) {
            if (auto f = m->second.find(img.frame_index); f != m->second.end()) dist = &f->second;
        }
        TokenDistribution top(dist->begin(), dist->begin() + std::min<std::ptrdiff_t>(
                                                                 static_cast<std::ptrdiff_t>(dist->size()),
                                                                 *request.top_logprobs));
        out.content = top.empty() ? std::string{} : top.front().token;
        out.top_logprobs = std::move(top);
        return out;
    }

    ++answer_calls_;
    const auto it = fixture_.answers.find(request.question_hash);
    if (it == fixture_.answers.end()) {
        out.content = "I cannot tell.";
        return out;
    }
    const auto& planted = it->second;
    const bool all_present = std::all_of(planted.required_frames.begin(), planted.required_frames.end(),
                                         [&](std::size_t want) {
                                             return std::any_of(request.images.begin(), request.images.end(),
                                                                [&](const ImagePart& p) { return p.frame_index == want; });
                                         });
    out.content = all_present ? planted.correct : planted.incorrect;
    return out;
}

}  // namespace frag
