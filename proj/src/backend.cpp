#include "frag/backend.hpp"

#include "frag/digest.hpp"
#include "frag/error.hpp"

#include <algorithm>
#include <thread>

namespace frag {

using nlohmann::json;

json to_wire(const ChatRequest& request) {
    json content = json::array();
    for (const auto& part : request.images) {
        json image_url = {{"url", "data:" + std::string(part.image.mime_type()) + ";base64," +
                                      base64_encode(part.image.bytes)}};
        if (request.detail) image_url["detail"] = *request.detail;
        content.push_back({{"type", "image_url"}, {"image_url", std::move(image_url)}});
    }
    content.push_back({{"type", "text"}, {"text", request.text}});

    json body = {
        {"model", request.model},
        {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    if (request.top_logprobs) {
        body["logprobs"] = true;
        body["top_logprobs"] = *request.top_logprobs;
    }
    return body;
}

ChatResponse parse_wire_response(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what(), body);
    }
    try {
        const auto& choices = doc.at("choices");
        if (!choices.is_array() || choices.empty()) throw ProtocolError("response has no choices", body);
        const auto& choice = choices.at(0);

        ChatResponse out;
        const auto& content = choice.at("message").at("content");
        if (!content.is_null()) out.content = content.get<std::string>();

        if (auto lp = choice.find("logprobs"); lp != choice.end() && !lp->is_null()) {
            const auto& tokens = lp->at("content");
            if (!tokens.is_array() || tokens.empty()) throw ProtocolError("logprobs.content is empty", body);
            TokenDistribution dist;
            for (const auto& alt : tokens.at(0).at("top_logprobs")) {
                dist.push_back({alt.at("token").get<std::string>(), alt.at("logprob").get<double>()});
            }
            out.top_logprobs = std::move(dist);
        }
        return out;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("unexpected response shape: ") + e.what(), body);
    }
}

std::chrono::duration<double> RetryPolicy::delay_before_retry(int retry) const {
    if (backoff_seconds.empty()) return std::chrono::duration<double>(0.0);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(retry), backoff_seconds.size() - 1);
    return std::chrono::duration<double>(backoff_seconds[i]);
}

ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& request, const RetryPolicy& policy) {
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= policy.max_retries) throw;
        } catch (const BackendUnreachable&) {
            if (attempt >= policy.max_retries) throw;
        }
        std::this_thread::sleep_for(policy.delay_before_retry(attempt));
    }
}

}  // namespace frag
