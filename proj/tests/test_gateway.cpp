#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "jh/errors.hpp"
#include "jh/gateway.hpp"
#include "jh/http_transport.hpp"
#include "transports.hpp"

using namespace jh;
using namespace jh::testing;

namespace {

ChatRequest sample_request() {
    ChatRequest r;
    r.provider_base_url = "http://localhost:1";
    r.model = "m";
    r.messages = {{Role::system, "You are a Chef"}, {Role::user, "What is 2+2?"}};
    r.temperature = 0.7;
    r.sample_index = 3;
    r.stage = Stage::solve;
    r.max_tokens = 64;
    return r;
}

}  // namespace

TEST_CASE("cache keys are sha-256 hex and sensitive to every request field") {
    const auto base = sample_request();
    const auto key = cache_key(base);
    CHECK(std::regex_match(key, std::regex("[0-9a-f]{64}")));
    CHECK(cache_key(base) == key);

    std::vector<ChatRequest> variants(7, base);
    variants[0].provider_base_url = "http://localhost:2";
    variants[1].model = "m2";
    variants[2].messages[1].content = "What is 2+3?";
    variants[3].messages[0].role = Role::user;
    variants[4].temperature = 0.701;
    variants[5].sample_index = 4;
    variants[6].max_tokens = 65;
    for (const auto& v : variants) CHECK(cache_key(v) != key);

    auto same = base;
    same.temperature = 0.70004;  // rendered with three decimals
    CHECK(cache_key(same) == key);
}

TEST_CASE("requests are validated before any call") {
    Harness h(std::make_shared<ForbidNetwork>());
    auto r = sample_request();
    r.messages.clear();
    CHECK_THROWS_AS(h.gateway.complete(r, h.cassette, h.ledger), InvalidRequest);
    r = sample_request();
    r.temperature = 2.5;
    CHECK_THROWS_AS(h.gateway.complete(r, h.cassette, h.ledger), InvalidRequest);
}

TEST_CASE("transient failures are retried and the attempts are recorded") {
    auto t = std::make_shared<ScriptedTransport>(
        std::vector<ScriptedTransport::Step>{{429, "slow down"}, {0, ""}, {503, "busy"}, {200, "4"}});
    Harness h(t);
    const auto response = h.gateway.complete(sample_request(), h.cassette, h.ledger);
    CHECK(response.content == "4");
    CHECK(response.source == ResponseSource::live);
    CHECK(t->calls() == 4);
    REQUIRE(h.ledger.size() == 1);
    CHECK(h.ledger.entries()[0].http_attempts == 4);
    CHECK(h.ledger.entries()[0].ok);
}

TEST_CASE("retries stop at the policy limit") {
    std::vector<ScriptedTransport::Step> steps(5, {500, "down"});
    auto t = std::make_shared<ScriptedTransport>(steps);
    Harness h(t);
    CHECK_THROWS_AS(h.gateway.complete(sample_request(), h.cassette, h.ledger), ExhaustedRetries);
    CHECK(t->calls() == 5);
    REQUIRE(h.ledger.size() == 1);
    CHECK_FALSE(h.ledger.entries()[0].ok);
}

TEST_CASE("auth and client errors are not retried") {
    {
        auto t = std::make_shared<ScriptedTransport>(std::vector<ScriptedTransport::Step>{{401, "no"}});
        Harness h(t);
        CHECK_THROWS_AS(h.gateway.complete(sample_request(), h.cassette, h.ledger), AuthError);
        CHECK(t->calls() == 1);
    }
    {
        auto t = std::make_shared<ScriptedTransport>(std::vector<ScriptedTransport::Step>{{400, "bad"}});
        Harness h(t);
        try {
            h.gateway.complete(sample_request(), h.cassette, h.ledger);
            FAIL("expected HttpStatusError");
        } catch (const HttpStatusError& e) {
            CHECK(e.status() == 400);
        }
    }
}

TEST_CASE("a missing credential fails before the network") {
    auto t = std::make_shared<ForbidNetwork>();
    auto options = test_gateway_options();
    options.api_key.clear();
    Harness h(t, options);
    CHECK_THROWS_AS(h.gateway.complete(sample_request(), h.cassette, h.ledger), AuthError);
    CHECK(t->calls() == 0);
}

TEST_CASE("unparseable bodies are malformed responses") {
    auto t = std::make_shared<FunctionTransport>([](const SeenRequest&) { return HttpReply{200, "not json"}; });
    Harness h(t);
    CHECK_THROWS_AS(h.gateway.complete(sample_request(), h.cassette, h.ledger), MalformedResponse);
    auto empty = std::make_shared<FunctionTransport>(
        [](const SeenRequest&) { return HttpReply{200, R"({"choices":[]})"}; });
    Harness h2(empty);
    CHECK_THROWS_AS(h2.gateway.complete(sample_request(), h2.cassette, h2.ledger), MalformedResponse);
}

TEST_CASE("backoff doubles with bounded jitter") {
    Gateway g(std::make_shared<ForbidNetwork>(), test_gateway_options());
    for (int i = 0; i < 5; ++i) {
        const double d = g.backoff_delay(i).count();
        const double nominal = 0.5 * (1 << i);
        CHECK(d >= nominal * 0.8 - 1e-12);
        CHECK(d <= nominal * 1.2 + 1e-12);
    }
}

TEST_CASE("replay serves recorded responses and never touches the network") {
    const auto dir = temp_dir("cassette");
    const auto path = dir + "/cassette.jsonl";
    {
        auto t = std::make_shared<ScriptedTransport>(std::vector<ScriptedTransport::Step>{{200, "four"}});
        Gateway g(t, test_gateway_options());
        Cassette c(path, CassetteMode::record);
        CallLedger ledger;
        CHECK(g.complete(sample_request(), c, ledger).source == ResponseSource::live);
        // A second identical request in record mode is served from the store.
        CHECK(g.complete(sample_request(), c, ledger).source == ResponseSource::cache);
        CHECK(t->calls() == 1);
    }
    auto forbid = std::make_shared<ForbidNetwork>();
    Gateway g(forbid, test_gateway_options());
    Cassette c(path, CassetteMode::replay);
    CallLedger ledger;
    const auto hit = g.complete(sample_request(), c, ledger);
    CHECK(hit.content == "four");
    CHECK(hit.source == ResponseSource::cassette);

    auto other = sample_request();
    other.sample_index = 99;
    CHECK_THROWS_AS(g.complete(other, c, ledger), ReplayMissError);
    CHECK(forbid->calls() == 0);
    CHECK(ledger.size() == 2);
}

TEST_CASE("replay without a cassette file is a config error") {
    CHECK_THROWS_AS(Cassette(temp_dir("missing") + "/none.jsonl", CassetteMode::replay), ConfigError);
}

TEST_CASE("system messages fold into user messages when the provider lacks the role") {
    const auto body = chat_request_body(sample_request(), false);
    for (const auto& m : body["messages"]) CHECK(m["role"] == "user");
    CHECK(body["messages"][0]["content"] == "You are a Chef");
    const auto native = chat_request_body(sample_request(), true);
    CHECK(native["messages"][0]["role"] == "system");
}

TEST_CASE("endpoint urls tolerate trailing slashes") {
    CHECK(chat_completions_url("https://api.example.com/") == "https://api.example.com/v1/chat/completions");
    CHECK(chat_completions_url("http://h:8080") == "http://h:8080/v1/chat/completions");
}

TEST_CASE("in-flight calls never exceed max_concurrency") {
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    auto t = std::make_shared<FunctionTransport>([&](const SeenRequest&) {
        const int now = ++in_flight;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight;
        return HttpReply{200, completion_body("ok")};
    });
    auto options = test_gateway_options();
    options.max_concurrency = 2;
    Gateway g(t, options);
    Cassette c;
    CallLedger ledger;
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            auto r = sample_request();
            r.sample_index = static_cast<std::uint64_t>(i);
            g.complete(r, c, ledger);
        });
    }
    for (auto& th : threads) th.join();
    CHECK(peak.load() <= 2);
    CHECK(ledger.size() == 8);
    CHECK(g.http_attempts() == 8);
}

TEST_CASE("live HTTP: a 429 is retried against a real server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        if (hits++ == 0) {
            res.status = 429;
            res.set_content("{\"error\":\"rate\"}", "application/json");
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(completion_body("echo:" + body["messages"][1]["content"].get<std::string>()),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto request = sample_request();
    request.provider_base_url = "http://127.0.0.1:" + std::to_string(port);
    Gateway g(std::make_shared<HttpTransport>(), test_gateway_options());
    Cassette c;
    CallLedger ledger;
    const auto response = g.complete(request, c, ledger);
    server.stop();
    serving.join();

    CHECK(response.content == "echo:What is 2+2?");
    CHECK(hits.load() == 2);
    CHECK(seen_auth == "Bearer test-key");
    CHECK(ledger.entries()[0].http_attempts == 2);
}

TEST_CASE("connection failures surface as exhausted retries") {
    auto request = sample_request();
    request.provider_base_url = "http://127.0.0.1:1";
    auto options = test_gateway_options();
    options.retry.max_attempts = 2;
    Gateway g(std::make_shared<HttpTransport>(), options);
    Cassette c;
    CallLedger ledger;
    CHECK_THROWS_AS(g.complete(request, c, ledger), ExhaustedRetries);
}
