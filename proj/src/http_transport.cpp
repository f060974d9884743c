#include "httplib.h"

#include "jh/http_transport.hpp"

#include "jh/errors.hpp"

namespace jh {

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base URL lacks a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpReply HttpTransport::post(const std::string& url, const std::string& api_key,
                              const std::string& body) {
    const UrlParts parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
    auto result = client.Post(parts.path, headers, body, "application/json");
    if (!result) return HttpReply{0, {}};
    return HttpReply{result->status, result->body};
}

}  // namespace jh
