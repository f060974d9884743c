#pragma once

// Uniform access to OpenAI-compatible chat-completion endpoints.
//
// Every model call in the pipeline goes through Gateway::complete(), which
// consults a Cassette (record / replay / passthrough), retries transient HTTP
// failures, enforces the global concurrency and rate limits, and appends one
// entry per call to the caller's CallLedger.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace jh {

enum class Role { system, user, assistant };
enum class Stage { persona_gen, solve, extract, evaluate, score };

std::string_view to_string(Role role);
std::string_view to_string(Stage stage);
Role role_from_string(std::string_view text);
Stage stage_from_string(std::string_view text);

inline constexpr Stage kAllStages[] = {Stage::persona_gen, Stage::solve, Stage::extract,
                                       Stage::evaluate, Stage::score};

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Messages = std::vector<ChatMessage>;

struct ChatRequest {
    std::string provider_base_url;
    std::string model;
    Messages messages;
    double temperature = 0.7;
    std::uint64_t sample_index = 0;
    Stage stage = Stage::solve;
    int max_tokens = 1024;

    /// Throws InvalidRequest when an invariant does not hold.
    void validate() const;
};

enum class FinishReason { stop, length, error };
enum class ResponseSource { live, cache, cassette };

std::string_view to_string(FinishReason reason);
std::string_view to_string(ResponseSource source);

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string content;  // empty when finish_reason == error
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
    ResponseSource source = ResponseSource::live;
};

nlohmann::json to_json(const ChatResponse& response);
ChatResponse chat_response_from_json(const nlohmann::json& j);

/// Canonical byte string hashed by cache_key(). Field order is fixed; the
/// temperature is rendered with exactly three decimals.
std::string canonical_serialization(const ChatRequest& request);

/// SHA-256 fingerprint of canonical_serialization(); 64 lowercase hex chars.
std::string cache_key(const ChatRequest& request);

enum class CassetteMode { record, replay, passthrough };

std::string_view to_string(CassetteMode mode);
CassetteMode cassette_mode_from_string(std::string_view text);

/// Fingerprint -> response store, optionally backed by a JSONL file.
/// Writes are serialized; a recorded entry is appended to the file as soon as
/// it is stored so an interrupted run keeps everything it paid for.
class Cassette {
public:
    explicit Cassette(CassetteMode mode = CassetteMode::passthrough);

    /// File-backed cassette; loads `path` when it exists. Replay mode
    /// requires the file.
    Cassette(const std::string& path, CassetteMode mode);

    CassetteMode mode() const noexcept { return mode_; }
    std::optional<ChatResponse> find(const std::string& key) const;
    void store(const std::string& key, const ChatResponse& response);
    std::size_t size() const;

private:
    CassetteMode mode_;
    std::optional<std::string> path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, ChatResponse> entries_;
};

struct LedgerEntry {
    Stage stage = Stage::solve;
    std::uint64_t sample_index = 0;
    int http_attempts = 0;
    ResponseSource source = ResponseSource::live;
    bool ok = true;
};

/// Per-question (or per-run) record of every complete() invocation.
class CallLedger {
public:
    void append(const LedgerEntry& entry);
    std::vector<LedgerEntry> entries() const;
    std::size_t size() const;
    std::size_t count(Stage stage) const;
    std::map<Stage, std::size_t> stage_counts() const;

private:
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> entries_;
};

/// Outcome of one HTTP POST. status == 0 means no HTTP response arrived
/// (timeout or connection failure).
struct HttpReply {
    int status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpReply post(const std::string& url, const std::string& api_key,
                           const std::string& body) = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_seconds = 0.5;
    double jitter_fraction = 0.2;
};

struct GatewayOptions {
    std::string api_key;
    RetryPolicy retry;
    int max_concurrency = 8;
    /// Token-bucket refill rate; 0 disables rate limiting.
    double requests_per_second = 0.0;
    double burst = 1.0;
    /// When false, system messages are sent as user messages on the wire.
    bool system_role_supported = true;
    std::uint64_t jitter_seed = 0x6a68u;
    std::function<void(std::chrono::duration<double>)> sleep;
};

/// Reads JH_API_KEY from the environment (empty when unset).
std::string api_key_from_env();

/// Replaces system messages by user messages carrying the same text.
Messages fold_system_messages(const Messages& messages);

/// Request body for POST {base}/v1/chat/completions.
nlohmann::json chat_request_body(const ChatRequest& request, bool system_role_supported);

/// Endpoint URL for a base URL (trailing slashes tolerated).
std::string chat_completions_url(std::string_view base_url);

class Gateway {
public:
    Gateway(std::shared_ptr<Transport> transport, GatewayOptions options);

    ChatResponse complete(const ChatRequest& request, Cassette& cassette, CallLedger& ledger);

    /// Total HTTP POSTs issued so far (all retries included).
    std::size_t http_attempts() const noexcept;

    /// Delay before retry number `retry` (0-based), jitter applied.
    std::chrono::duration<double> backoff_delay(int retry);

private:
    ChatResponse call_live(const ChatRequest& request, int& attempts);
    void acquire_rate_token();

    std::shared_ptr<Transport> transport_;
    GatewayOptions options_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<std::size_t> http_attempts_{0};

    std::mutex jitter_mutex_;
    std::uint64_t jitter_state_;

    std::mutex bucket_mutex_;
    double bucket_tokens_;
    std::chrono::steady_clock::time_point bucket_refilled_;
};

/// Which model serves a pipeline stage, and how it is sampled.
struct ModelEndpoint {
    std::string base_url;
    std::string model;
    double temperature = 0.7;
    int max_tokens = 1024;
};

/// Model per pipeline stage. Stages may point at different providers.
struct StageModels {
    ModelEndpoint persona_gen;
    ModelEndpoint solve;
    ModelEndpoint extract;
    ModelEndpoint evaluate;
    ModelEndpoint score;

    const ModelEndpoint& for_stage(Stage stage) const;
};

/// Everything a pipeline step needs to issue model calls.
struct CallContext {
    Gateway& gateway;
    Cassette& cassette;
    CallLedger& ledger;

    ChatResponse complete(const ChatRequest& request) const {
        return gateway.complete(request, cassette, ledger);
    }
};

ChatRequest make_request(const ModelEndpoint& endpoint, Stage stage, Messages messages,
                         std::uint64_t sample_index);

}  // namespace jh
