#pragma once

// In-process Transport doubles for tests.

#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jh/gateway.hpp"

namespace jh::testing {

/// OpenAI-style completion body carrying `content`.
std::string completion_body(const std::string& content, const std::string& finish_reason = "stop");

/// The messages of a request body, flattened.
struct SeenRequest {
    std::string url;
    nlohmann::json body;
    std::string system() const;     // "" when absent
    std::string last_user() const;
};

/// Answers every POST through a callback; keeps a log of what it saw.
class FunctionTransport : public Transport {
public:
    using Handler = std::function<HttpReply(const SeenRequest&)>;
    explicit FunctionTransport(Handler handler) : handler_(std::move(handler)) {}

    HttpReply post(const std::string& url, const std::string& api_key, const std::string& body) override;

    std::size_t calls() const { return calls_.load(); }
    std::vector<SeenRequest> log() const;

private:
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<SeenRequest> log_;
};

/// Replies from a fixed queue of (status, content) pairs, in order.
class ScriptedTransport : public Transport {
public:
    struct Step {
        int status = 200;
        std::string content;  // wrapped in a completion body when status == 200
    };
    explicit ScriptedTransport(std::vector<Step> steps) : steps_(steps.begin(), steps.end()) {}

    HttpReply post(const std::string& url, const std::string& api_key, const std::string& body) override;

    std::size_t calls() const { return calls_.load(); }
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::deque<Step> steps_;
    std::atomic<std::size_t> calls_{0};
};

/// Fails the test run loudly if any code path reaches the network.
class ForbidNetwork : public Transport {
public:
    HttpReply post(const std::string& url, const std::string&, const std::string&) override {
        ++calls_;
        throw std::logic_error("network access attempted: " + url);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

/// Text after "assistant <slot>'s answer: " up to the end of that line in a
/// judge prompt ("" when absent).
std::string slot_answer(const std::string& prompt, char slot);

/// Gateway options for tests: a dummy key and no real sleeping.
GatewayOptions test_gateway_options();

/// Owns the gateway, cassette and ledger behind a CallContext.
struct Harness {
    explicit Harness(std::shared_ptr<Transport> transport, GatewayOptions options = test_gateway_options());
    Gateway gateway;
    Cassette cassette;
    CallLedger ledger;
    CallContext calls() { return CallContext{gateway, cassette, ledger}; }
};

}  // namespace jh::testing
