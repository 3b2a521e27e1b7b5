#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace poetrat {

enum class Role { System, User, Assistant };

const char* role_name(Role role);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;
    std::optional<int> max_tokens;
    /// Distinguishes repeated sampling calls in the cache; never sent
    /// over the wire.
    std::optional<int> sample_tag;
};

struct ChatResponse {
    std::string content;
    std::string model;
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
    bool from_cache = false;
};

std::string sha256_hex(const std::string& data);

/// Canonical serialization of a request: fixed field order, temperature
/// rendered with exactly 2 decimals.
std::string canonical_request(const ChatRequest& request);

/// SHA-256 of the canonical serialization, as lowercase hex.
std::string cache_key(const ChatRequest& request);

class Transport {
public:
    virtual ~Transport() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct MockRule {
    std::string matcher;  // substring of the last user message
    std::string reply;
};

/// Scripted transport: first matching rule wins, unmatched requests
/// fail closed. Optionally fails the first N calls with a transient
/// error, for exercising the retry policy. Thread-safe.
class MockTransport : public Transport {
public:
    explicit MockTransport(std::vector<MockRule> script);

    ChatResponse complete(const ChatRequest& request) override;

    void fail_first(int n) { fail_remaining_ = n; }

    int calls() const { return calls_.load(); }
    int max_in_flight() const { return max_in_flight_.load(); }
    void set_reply_delay_ms(int ms) { reply_delay_ms_ = ms; }

private:
    std::vector<MockRule> script_;
    std::atomic<int> fail_remaining_{0};
    std::atomic<int> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    int reply_delay_ms_ = 0;
};

/// Adapts an arbitrary callable; used by tests that need content-aware
/// replies.
class FunctionTransport : public Transport {
public:
    using Fn = std::function<ChatResponse(const ChatRequest&)>;
    explicit FunctionTransport(Fn fn) : fn_(std::move(fn)) {}
    ChatResponse complete(const ChatRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

struct HttpConfig {
    std::string endpoint_url;  // e.g. https://api.example.com/v1/chat/completions
    std::string api_key;       // defaults to POETRAT_API_KEY
    int timeout_seconds = 120;
};

/// De-facto chat-completions protocol: POST with a bearer token and a
/// messages array. Throws transient Transport errors on 429/5xx so the
/// gateway retry policy applies.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(HttpConfig config);
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpConfig config_;
};

/// On-disk append-only response cache keyed by the request digest.
/// Hits skip the inner transport entirely; misses are stored verbatim
/// as <digest-hex>.json next to the request.
class CachingTransport : public Transport {
public:
    CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path cache_dir);

    ChatResponse complete(const ChatRequest& request) override;

    int64_t hits() const { return hits_.load(); }
    int64_t misses() const { return misses_.load(); }

private:
    std::shared_ptr<Transport> inner_;
    std::filesystem::path cache_dir_;
    std::atomic<int64_t> hits_{0};
    std::atomic<int64_t> misses_{0};
    std::mutex write_mutex_;
};

struct GatewayConfig {
    int retry_max = 3;        // retries after the initial attempt
    int retry_base_ms = 1000; // doubles per retry
    int max_parallel = 4;
};

/// The one entry point prompting code talks to: bounded parallelism,
/// retry on transient failures, EmptyCompletion on blank content.
class Gateway {
public:
    Gateway(std::shared_ptr<Transport> transport, GatewayConfig config = {});

    ChatResponse complete(const ChatRequest& request);

    const GatewayConfig& config() const { return config_; }
    Transport& transport() { return *transport_; }

private:
    std::shared_ptr<Transport> transport_;
    GatewayConfig config_;
    class Slots;
    std::shared_ptr<Slots> slots_;
};

/// Loads a mock script from a JSON file: [{"match": ..., "reply": ...}].
std::vector<MockRule> load_mock_script(const std::filesystem::path& path);

}  // namespace poetrat
