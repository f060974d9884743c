#include "jh/gateway.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "jh/errors.hpp"
#include "jh/hash.hpp"

namespace jh {

using nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::persona_gen: return "persona_gen";
        case Stage::solve: return "solve";
        case Stage::extract: return "extract";
        case Stage::evaluate: return "evaluate";
        case Stage::score: return "score";
    }
    return "solve";
}

Role role_from_string(std::string_view text) {
    if (text == "system") return Role::system;
    if (text == "user") return Role::user;
    if (text == "assistant") return Role::assistant;
    throw InvalidRequest("unknown role: " + std::string(text));
}

Stage stage_from_string(std::string_view text) {
    for (Stage s : kAllStages) {
        if (to_string(s) == text) return s;
    }
    throw InvalidRequest("unknown stage: " + std::string(text));
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "stop";
}

std::string_view to_string(ResponseSource source) {
    switch (source) {
        case ResponseSource::live: return "live";
        case ResponseSource::cache: return "cache";
        case ResponseSource::cassette: return "cassette";
    }
    return "live";
}

std::string_view to_string(CassetteMode mode) {
    switch (mode) {
        case CassetteMode::record: return "record";
        case CassetteMode::replay: return "replay";
        case CassetteMode::passthrough: return "passthrough";
    }
    return "passthrough";
}

CassetteMode cassette_mode_from_string(std::string_view text) {
    if (text == "record") return CassetteMode::record;
    if (text == "replay") return CassetteMode::replay;
    if (text == "passthrough") return CassetteMode::passthrough;
    throw ConfigError("unknown cassette mode: " + std::string(text));
}

void ChatRequest::validate() const {
    if (messages.empty()) throw InvalidRequest("request has no messages");
    if (messages.front().role == Role::assistant) {
        throw InvalidRequest("first message must be system or user");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw InvalidRequest("temperature outside [0, 2]");
    }
    if (max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
    if (model.empty()) throw InvalidRequest("model is empty");
}

json to_json(const ChatResponse& response) {
    json j = {
        {"content", response.content},
        {"finish_reason", to_string(response.finish_reason)},
        {"usage",
         {{"prompt_tokens", response.usage.prompt_tokens},
          {"completion_tokens", response.usage.completion_tokens}}},
    };
    return j;
}

ChatResponse chat_response_from_json(const json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    const auto reason = j.value("finish_reason", std::string("stop"));
    r.finish_reason = reason == "length" ? FinishReason::length
                      : reason == "error" ? FinishReason::error
                                          : FinishReason::stop;
    if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
        r.usage.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
        r.usage.completion_tokens = it->value("completion_tokens", std::int64_t{0});
    }
    return r;
}

std::string canonical_serialization(const ChatRequest& request) {
    char temperature[32];
    std::snprintf(temperature, sizeof temperature, "%.3f", request.temperature);
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back(json::array({to_string(m.role), m.content}));
    }
    // json::array keeps insertion order, so the field order is fixed.
    json canonical = json::array({request.provider_base_url, request.model, messages,
                                  std::string(temperature), request.sample_index,
                                  request.max_tokens});
    return canonical.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string cache_key(const ChatRequest& request) {
    return sha256_hex(canonical_serialization(request));
}

// Cassette

Cassette::Cassette(CassetteMode mode) : mode_(mode) {}

Cassette::Cassette(const std::string& path, CassetteMode mode) : mode_(mode), path_(path) {
    std::ifstream in(path);
    if (!in) {
        if (mode == CassetteMode::replay) {
            throw ConfigError("replay cassette not found: " + path);
        }
        return;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            auto response = chat_response_from_json(j.at("response"));
            response.source = ResponseSource::cassette;
            entries_.insert_or_assign(j.at("key").get<std::string>(), std::move(response));
        } catch (const json::exception& e) {
            throw ConfigError("cassette " + path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::optional<ChatResponse> Cassette::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Cassette::store(const std::string& key, const ChatResponse& response) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.insert_or_assign(key, response);
    it->second.source = ResponseSource::cassette;
    if (path_ && inserted) {
        std::ofstream out(*path_, std::ios::app | std::ios::binary);
        out << json{{"key", key}, {"response", to_json(response)}}.dump() << '\n';
    }
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// CallLedger

void CallLedger::append(const LedgerEntry& entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
}

std::vector<LedgerEntry> CallLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t CallLedger::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t CallLedger::count(Stage stage) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.stage == stage ? 1 : 0;
    return n;
}

std::map<Stage, std::size_t> CallLedger::stage_counts() const {
    std::lock_guard lock(mutex_);
    std::map<Stage, std::size_t> counts;
    for (const auto& e : entries_) ++counts[e.stage];
    return counts;
}

// Wire helpers

std::string api_key_from_env() {
    const char* key = std::getenv("JH_API_KEY");
    return key ? std::string(key) : std::string();
}

Messages fold_system_messages(const Messages& messages) {
    Messages out = messages;
    for (auto& m : out) {
        if (m.role == Role::system) m.role = Role::user;
    }
    return out;
}

json chat_request_body(const ChatRequest& request, bool system_role_supported) {
    const Messages& wire = request.messages;
    Messages folded;
    if (!system_role_supported) folded = fold_system_messages(wire);
    json messages = json::array();
    for (const auto& m : system_role_supported ? wire : folded) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return {
        {"model", request.model},
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
}

std::string chat_completions_url(std::string_view base_url) {
    while (!base_url.empty() && base_url.back() == '/') base_url.remove_suffix(1);
    return std::string(base_url) + "/v1/chat/completions";
}

ChatRequest make_request(const ModelEndpoint& endpoint, Stage stage, Messages messages,
                         std::uint64_t sample_index) {
    ChatRequest r;
    r.provider_base_url = endpoint.base_url;
    r.model = endpoint.model;
    r.messages = std::move(messages);
    r.temperature = endpoint.temperature;
    r.sample_index = sample_index;
    r.stage = stage;
    r.max_tokens = endpoint.max_tokens;
    return r;
}

const ModelEndpoint& StageModels::for_stage(Stage stage) const {
    switch (stage) {
        case Stage::persona_gen: return persona_gen;
        case Stage::solve: return solve;
        case Stage::extract: return extract;
        case Stage::evaluate: return evaluate;
        case Stage::score: return score;
    }
    return solve;
}

namespace {

bool is_transient(int status) { return status == 0 || status == 429 || status >= 500; }

ChatResponse parse_completion(const std::string& body) {
    if (body.empty()) throw MalformedResponse("empty response body");
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
    }
    try {
        const auto& choice = j.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        if (!content.is_string()) throw MalformedResponse("message content is not a string");
        ChatResponse r;
        r.content = content.get<std::string>();
        const auto reason = choice.value("finish_reason", json("stop"));
        r.finish_reason = reason.is_string() && reason.get<std::string>() == "length"
                              ? FinishReason::length
                              : FinishReason::stop;
        if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
            r.usage.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
            r.usage.completion_tokens = it->value("completion_tokens", std::int64_t{0});
        }
        r.source = ResponseSource::live;
        return r;
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("unexpected response shape: ") + e.what());
    }
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

// Gateway

Gateway::Gateway(std::shared_ptr<Transport> transport, GatewayOptions options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      in_flight_(std::max(1, std::min(options_.max_concurrency, 1024))),
      jitter_state_(options_.jitter_seed),
      bucket_tokens_(std::max(1.0, options_.burst)),
      bucket_refilled_(std::chrono::steady_clock::now()) {
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
    }
    if (options_.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
}

std::size_t Gateway::http_attempts() const noexcept { return http_attempts_.load(); }

std::chrono::duration<double> Gateway::backoff_delay(int retry) {
    double u;
    {
        std::lock_guard lock(jitter_mutex_);
        u = static_cast<double>(splitmix64(jitter_state_) >> 11) * 0x1.0p-53;
    }
    const double jitter = 1.0 + options_.retry.jitter_fraction * (2.0 * u - 1.0);
    return std::chrono::duration<double>(options_.retry.base_delay_seconds *
                                         std::ldexp(1.0, retry) * jitter);
}

void Gateway::acquire_rate_token() {
    if (options_.requests_per_second <= 0.0) return;
    for (;;) {
        std::chrono::duration<double> wait{};
        {
            std::lock_guard lock(bucket_mutex_);
            const auto now = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(now - bucket_refilled_).count();
            bucket_refilled_ = now;
            bucket_tokens_ = std::min(std::max(1.0, options_.burst),
                                      bucket_tokens_ + elapsed * options_.requests_per_second);
            if (bucket_tokens_ >= 1.0) {
                bucket_tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - bucket_tokens_) /
                                                 options_.requests_per_second);
        }
        options_.sleep(wait);
    }
}

ChatResponse Gateway::call_live(const ChatRequest& request, int& attempts) {
    if (!transport_) throw ConfigError("no transport configured for live calls");
    if (options_.api_key.empty()) throw AuthError("no API credential configured (JH_API_KEY)");

    const std::string url = chat_completions_url(request.provider_base_url);
    const std::string body = chat_request_body(request, options_.system_role_supported).dump();

    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    int last_status = 0;
    for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
        if (attempt > 0) options_.sleep(backoff_delay(attempt - 1));
        acquire_rate_token();
        ++attempts;
        ++http_attempts_;
        const HttpReply reply = transport_->post(url, options_.api_key, body);
        last_status = reply.status;
        if (reply.status == 401 || reply.status == 403) {
            throw AuthError("authentication rejected (HTTP " + std::to_string(reply.status) + ")");
        }
        if (is_transient(reply.status)) continue;
        if (reply.status < 200 || reply.status >= 300) {
            throw HttpStatusError(reply.status, "HTTP " + std::to_string(reply.status) + ": " +
                                                    reply.body.substr(0, 200));
        }
        return parse_completion(reply.body);
    }
    throw ExhaustedRetries("gave up after " + std::to_string(attempts) +
                           " attempts (last status " + std::to_string(last_status) + ")");
}

ChatResponse Gateway::complete(const ChatRequest& request, Cassette& cassette, CallLedger& ledger) {
    LedgerEntry entry;
    entry.stage = request.stage;
    entry.sample_index = request.sample_index;
    entry.ok = false;
    struct Append {
        CallLedger& ledger;
        LedgerEntry& entry;
        ~Append() { ledger.append(entry); }
    } append{ledger, entry};

    request.validate();
    const std::string key = cache_key(request);

    if (cassette.mode() != CassetteMode::passthrough) {
        if (auto hit = cassette.find(key)) {
            hit->source = cassette.mode() == CassetteMode::replay ? ResponseSource::cassette
                                                                  : ResponseSource::cache;
            entry.source = hit->source;
            entry.ok = true;
            return *hit;
        }
        if (cassette.mode() == CassetteMode::replay) {
            entry.source = ResponseSource::cassette;
            throw ReplayMissError("no cassette entry for fingerprint " + key + " (stage " +
                                  std::string(to_string(request.stage)) + ")");
        }
    }

    entry.source = ResponseSource::live;
    ChatResponse response = call_live(request, entry.http_attempts);
    if (cassette.mode() == CassetteMode::record) cassette.store(key, response);
    entry.ok = true;
    return response;
}

}  // namespace jh
