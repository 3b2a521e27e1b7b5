#include "poetrat/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

#include "poetrat/error.hpp"

#ifdef POETRAT_WITH_HTTP
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#endif

namespace poetrat {

using json = nlohmann::json;

const char* role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::Io, "SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

void validate(const ChatRequest& request) {
    if (request.messages.empty()) throw Error(Errc::Contract, "request has no messages");
    if (request.messages.back().role != Role::User) {
        throw Error(Errc::Contract, "last message must have role user");
    }
    if (request.temperature < 0) throw Error(Errc::Contract, "temperature must be >= 0");
}

std::string last_user_content(const ChatRequest& request) {
    return request.messages.empty() ? std::string() : request.messages.back().content;
}

json request_to_json(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    json j;
    j["model"] = request.model;
    j["temperature"] = request.temperature;
    j["messages"] = std::move(messages);
    if (request.max_tokens) j["max_tokens"] = *request.max_tokens;
    return j;
}

json response_to_json(const ChatResponse& response) {
    json j;
    j["content"] = response.content;
    j["model"] = response.model;
    j["prompt_tokens"] = response.prompt_tokens;
    j["completion_tokens"] = response.completion_tokens;
    return j;
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.content = j.value("content", "");
    r.model = j.value("model", "");
    r.prompt_tokens = j.value("prompt_tokens", int64_t{0});
    r.completion_tokens = j.value("completion_tokens", int64_t{0});
    return r;
}

}  // namespace

std::string canonical_request(const ChatRequest& request) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.2f", request.temperature);
    std::ostringstream out;
    out << "model\x1f" << request.model << "\x1e";
    out << "temperature\x1f" << temp << "\x1e";
    out << "messages\x1f";
    for (const auto& m : request.messages) {
        out << role_name(m.role) << '\x1f' << m.content.size() << '\x1f' << m.content << '\x1e';
    }
    out << "max_tokens\x1f" << (request.max_tokens ? std::to_string(*request.max_tokens) : "none") << "\x1e";
    if (request.sample_tag) out << "sample_tag\x1f" << *request.sample_tag << "\x1e";
    return out.str();
}

std::string cache_key(const ChatRequest& request) {
    return sha256_hex(canonical_request(request));
}

MockTransport::MockTransport(std::vector<MockRule> script) : script_(std::move(script)) {
    if (script_.empty()) throw Error(Errc::Contract, "mock script is empty");
}

ChatResponse MockTransport::complete(const ChatRequest& request) {
    validate(request);
    calls_.fetch_add(1);
    int now = in_flight_.fetch_add(1) + 1;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    if (reply_delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply_delay_ms_));
    struct Leave {
        std::atomic<int>& counter;
        ~Leave() { counter.fetch_sub(1); }
    } leave{in_flight_};

    int remaining = fail_remaining_.load();
    while (remaining > 0) {
        if (fail_remaining_.compare_exchange_weak(remaining, remaining - 1)) {
            throw Error(Errc::Transport, "scripted failure", /*transient=*/true);
        }
    }

    std::string needle = last_user_content(request);
    for (const auto& rule : script_) {
        if (needle.find(rule.matcher) != std::string::npos) {
            ChatResponse r;
            r.content = rule.reply;
            r.model = request.model;
            return r;
        }
    }
    throw Error(Errc::Transport, "unscripted request");
}

HttpTransport::HttpTransport(HttpConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) {
        if (const char* key = std::getenv("POETRAT_API_KEY")) config_.api_key = key;
    }
    if (config_.endpoint_url.empty()) throw Error(Errc::ConfigError, "endpoint_url not set");
}

ChatResponse HttpTransport::complete(const ChatRequest& request) {
#ifndef POETRAT_WITH_HTTP
    (void)request;
    throw Error(Errc::Transport, "built without HTTP support");
#else
    validate(request);
    auto split = config_.endpoint_url.find('/', config_.endpoint_url.find("//") + 2);
    std::string base = split == std::string::npos ? config_.endpoint_url : config_.endpoint_url.substr(0, split);
    std::string path = split == std::string::npos ? "/" : config_.endpoint_url.substr(split);

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path, headers, request_to_json(request).dump(), "application/json");
    if (!res) {
        throw Error(Errc::Transport, "connection failed: " + httplib::to_string(res.error()), /*transient=*/true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw Error(Errc::Transport, "HTTP " + std::to_string(res->status), /*transient=*/true);
    }
    if (res->status != 200) {
        throw Error(Errc::Transport, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw Error(Errc::Transport, std::string("bad response body: ") + e.what());
    }
    ChatResponse r;
    try {
        r.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw Error(Errc::Transport, "response has no message content");
    }
    r.model = j.value("model", request.model);
    if (j.contains("usage")) {
        r.prompt_tokens = j["usage"].value("prompt_tokens", int64_t{0});
        r.completion_tokens = j["usage"].value("completion_tokens", int64_t{0});
    }
    return r;
#endif
}

CachingTransport::CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
    if (ec) throw Error(Errc::Io, "cannot create cache dir " + cache_dir_.string());
}

ChatResponse CachingTransport::complete(const ChatRequest& request) {
    validate(request);
    std::string digest = cache_key(request);
    auto file = cache_dir_ / (digest + ".json");
    {
        std::ifstream in(file, std::ios::binary);
        if (in) {
            json j;
            try {
                in >> j;
            } catch (const json::exception&) {
                throw Error(Errc::Io, "corrupt cache file " + file.string());
            }
            hits_.fetch_add(1);
            ChatResponse r = response_from_json(j.at("response"));
            r.from_cache = true;
            return r;
        }
    }
    ChatResponse r = inner_->complete(request);
    misses_.fetch_add(1);
    json j;
    j["digest"] = digest;
    j["request"] = request_to_json(request);
    if (request.sample_tag) j["sample_tag"] = *request.sample_tag;
    j["response"] = response_to_json(r);
    // Write-then-rename keeps concurrent readers off half-written files.
    auto tmp = cache_dir_ / (digest + ".tmp");
    {
        std::lock_guard lock(write_mutex_);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Io, "cannot write cache file " + tmp.string());
        out << j.dump(2) << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) throw Error(Errc::Io, "cannot commit cache file " + file.string());
    r.from_cache = false;
    return r;
}

class Gateway::Slots {
public:
    explicit Slots(int limit) : available_(limit) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

Gateway::Gateway(std::shared_ptr<Transport> transport, GatewayConfig config)
    : transport_(std::move(transport)), config_(config) {
    if (!transport_) throw Error(Errc::Contract, "gateway needs a transport");
    if (config_.max_parallel < 1) config_.max_parallel = 1;
    slots_ = std::make_shared<Slots>(config_.max_parallel);
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    validate(request);
    int attempt = 0;
    for (;;) {
        try {
            slots_->acquire();
            struct Release {
                Slots& slots;
                ~Release() { slots.release(); }
            } release{*slots_};
            ChatResponse r = transport_->complete(request);
            if (r.content.empty()) throw Error(Errc::EmptyCompletion, "endpoint returned no content");
            return r;
        } catch (const Error& e) {
            if (e.code() != Errc::Transport || !e.transient() || attempt >= config_.retry_max) throw;
            auto delay = std::chrono::milliseconds(config_.retry_base_ms) * (1LL << attempt);
            std::this_thread::sleep_for(delay);
            ++attempt;
        }
    }
}

std::vector<MockRule> load_mock_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open mock script " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("bad mock script: ") + e.what());
    }
    if (!j.is_array()) throw Error(Errc::ConfigError, "mock script must be a JSON array");
    std::vector<MockRule> rules;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("match") || !item.contains("reply")) {
            throw Error(Errc::ConfigError, "mock rule needs \"match\" and \"reply\"");
        }
        rules.push_back(MockRule{item["match"].get<std::string>(), item["reply"].get<std::string>()});
    }
    return rules;
}

}  // namespace poetrat
