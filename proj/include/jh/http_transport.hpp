#pragma once

#include <chrono>

#include "jh/gateway.hpp"

namespace jh {

/// Transport backed by cpp-httplib. http:// and https:// base URLs are
/// accepted; the base URL may carry a path prefix.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120));

    HttpReply post(const std::string& url, const std::string& api_key,
                   const std::string& body) override;

private:
    std::chrono::seconds timeout_;
};

/// Split "scheme://host[:port]/path" into the origin and the path part.
struct UrlParts {
    std::string origin;
    std::string path;
};
UrlParts split_url(const std::string& url);

}  // namespace jh
