#include "frag/http_backend.hpp"

#include "frag/error.hpp"

#include <httplib.h>

namespace frag {

HttpChatBackend::HttpChatBackend(std::string base_url, std::string api_key, double timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw InvalidArgument("base_url needs a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    origin_ = base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? std::string{} : base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
    // httplib::Client is not safe for concurrent requests; one per call.
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(timeout_seconds_);
    const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto body = to_wire(request).dump();
    auto res = client.Post(prefix_ + "/chat/completions", headers, body, "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Connection)
            throw BackendUnreachable("cannot connect to " + origin_ + ": " + httplib::to_string(err));
        throw TransportError(0, httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) throw TransportError(res->status, res->body);
    return parse_wire_response(res->body);
}

}  // namespace frag
