#pragma once

#include "frag/media.hpp"

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace frag {

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

/// Top alternatives for the first generated token; exp(logprob) need not sum to one.
using TokenDistribution = std::vector<TokenLogprob>;

/// An image in a request plus where it came from. Only `image` goes on the wire.
struct ImagePart {
    ImagePayload image;
    std::string media_id;
    std::size_t frame_index = 0;
};

/// Single user-turn chat request: image parts first, then one text part.
struct ChatRequest {
    std::string model;
    std::vector<ImagePart> images;
    std::string text;
    double temperature = 0.0;
    int max_tokens = 1;
    std::optional<int> top_logprobs;   // set => logprobs requested
    std::optional<std::string> detail; // opaque resolution hint forwarded per image

    /// Metadata for offline backends; never serialized.
    std::string question_hash;
};

struct ChatResponse {
    std::string content;
    std::optional<TokenDistribution> top_logprobs;
};

/// OpenAI-compatible chat/completions body.
nlohmann::json to_wire(const ChatRequest& request);

/// Parses a chat/completions response body. Throws ProtocolError with the body attached.
ChatResponse parse_wire_response(const std::string& body);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Throws TransportError, BackendUnreachable or ProtocolError.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
    int max_retries = 2;
    std::vector<double> backoff_seconds{0.5, 2.0};

    std::chrono::duration<double> delay_before_retry(int retry) const;
};

/// Retries transport failures (5xx, 408, 429, socket errors, unreachable) per `policy`.
/// 4xx and protocol errors propagate immediately.
ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& request, const RetryPolicy& policy);

}  // namespace frag
