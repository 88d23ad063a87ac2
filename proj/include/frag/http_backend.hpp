#pragma once

#include "frag/backend.hpp"

#include <string>

namespace frag {

/// OpenAI-compatible endpoint reached over HTTP(S): POST {base_url}/chat/completions.
class HttpChatBackend : public ChatBackend {
public:
    /// `base_url` like "http://localhost:8000/v1". Empty `api_key` sends no Authorization header.
    HttpChatBackend(std::string base_url, std::string api_key = {}, double timeout_seconds = 120.0);

    ChatResponse complete(const ChatRequest& request) override;

    const std::string& origin() const noexcept { return origin_; }
    const std::string& path_prefix() const noexcept { return prefix_; }

private:
    std::string origin_;  // scheme://host[:port]
    std::string prefix_;  // path below the origin, no trailing slash
    std::string api_key_;
    double timeout_seconds_;
};

}  // namespace frag
