#include <doctest.h>

#include <future>
#include <set>
#include <vector>

#include "poetrat/error.hpp"
#include "poetrat/gateway.hpp"

#include "support.hpp"

using namespace poetrat;

namespace {

ChatRequest user_request(std::string content, double temperature = 0.0) {
    ChatRequest r;
    r.model = "test-model";
    r.temperature = temperature;
    r.messages.push_back({Role::User, std::move(content)});
    return r;
}

}  // namespace

TEST_CASE("canonical request separates message boundaries") {
    ChatRequest a = user_request("c");
    a.messages.insert(a.messages.begin(), {Role::User, "ab"});
    ChatRequest b = user_request("bc");
    b.messages.insert(b.messages.begin(), {Role::User, "a"});
    CHECK(canonical_request(a) != canonical_request(b));
    CHECK(cache_key(a) != cache_key(b));
}

TEST_CASE("canonical request rounds temperature to two decimals") {
    CHECK(cache_key(user_request("x", 0.3)) == cache_key(user_request("x", 0.30)));
    CHECK(cache_key(user_request("x", 0.3)) == cache_key(user_request("x", 0.304)));
    CHECK(cache_key(user_request("x", 0.3)) != cache_key(user_request("x", 0.31)));
    CHECK(cache_key(user_request("x", 0.0)) != cache_key(user_request("x", 0.3)));
}

TEST_CASE("canonical request covers every identity field") {
    ChatRequest base = user_request("x");

    ChatRequest other_model = base;
    other_model.model = "other";
    CHECK(cache_key(base) != cache_key(other_model));

    ChatRequest with_max = base;
    with_max.max_tokens = 256;
    CHECK(cache_key(base) != cache_key(with_max));

    ChatRequest tagged = base;
    tagged.sample_tag = 0;
    CHECK(cache_key(base) != cache_key(tagged));
    ChatRequest tagged2 = base;
    tagged2.sample_tag = 1;
    CHECK(cache_key(tagged) != cache_key(tagged2));

    ChatRequest system_first = base;
    system_first.messages.insert(system_first.messages.begin(), {Role::System, "x"});
    CHECK(cache_key(base) != cache_key(system_first));

    // The tag never reaches the wire, only the digest.
    CHECK(canonical_request(tagged).find("sample_tag") != std::string::npos);
    CHECK(canonical_request(base).find("sample_tag") == std::string::npos);
}

TEST_CASE("cache keys are unique across 10k distinct requests") {
    std::set<std::string> keys;
    for (int i = 0; i < 10000; ++i) {
        auto key = cache_key(user_request("prompt #" + std::to_string(i)));
        CHECK(key.size() == 64);
        keys.insert(key);
    }
    CHECK(keys.size() == 10000);
}

TEST_CASE("mock transport matches the last user message, first rule wins") {
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{
        {"moon", "first"},
        {"moonlight", "second"},
        {"frost", "third"},
    });
    CHECK(mock->complete(user_request("bright moonlight tonight")).content == "first");
    CHECK(mock->complete(user_request("frost on the ground")).content == "third");
    CHECK_THROWS_AS(mock->complete(user_request("nothing matches")), Error);
    CHECK(mock->calls() == 3);

    SUBCASE("unmatched error is non-transient Transport") {
        try {
            mock->complete(user_request("nope"));
            FAIL("expected Transport");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Transport);
            CHECK_FALSE(e.transient());
        }
    }
}

TEST_CASE("request validation") {
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "y"}});
    ChatRequest empty;
    empty.model = "m";
    CHECK_THROWS_AS(mock->complete(empty), Error);

    ChatRequest assistant_last = user_request("x");
    assistant_last.messages.push_back({Role::Assistant, "reply"});
    CHECK_THROWS_AS(mock->complete(assistant_last), Error);

    CHECK_THROWS_AS(mock->complete(user_request("x", -0.5)), Error);

    CHECK_THROWS_AS(MockTransport(std::vector<MockRule>{}), Error);
    CHECK_THROWS_AS(Gateway(nullptr), Error);
}

TEST_CASE("gateway retries transient failures with backoff") {
    GatewayConfig cfg;
    cfg.retry_max = 3;
    cfg.retry_base_ms = 1;

    SUBCASE("recovers when failures stop within budget") {
        auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "ok"}});
        mock->fail_first(2);
        Gateway gw(mock, cfg);
        CHECK(gw.complete(user_request("x")).content == "ok");
        CHECK(mock->calls() == 3);
    }

    SUBCASE("gives up after the initial attempt plus retry_max") {
        auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "ok"}});
        mock->fail_first(10);
        Gateway gw(mock, cfg);
        try {
            gw.complete(user_request("x"));
            FAIL("expected Transport");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Transport);
            CHECK(e.transient());
        }
        CHECK(mock->calls() == 4);
    }

    SUBCASE("non-transient failures are not retried") {
        auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "ok"}});
        Gateway gw(mock, cfg);
        CHECK_THROWS_AS(gw.complete(user_request("unmatched")), Error);
        CHECK(mock->calls() == 1);
    }
}

TEST_CASE("gateway raises EmptyCompletion on blank content") {
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", ""}});
    Gateway gw(mock);
    try {
        gw.complete(user_request("x"));
        FAIL("expected EmptyCompletion");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyCompletion);
    }
    CHECK(mock->calls() == 1);  // blank replies are not retried
}

TEST_CASE("gateway bounds transport concurrency at max_parallel") {
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "ok"}});
    mock->set_reply_delay_ms(50);
    GatewayConfig cfg;
    cfg.max_parallel = 2;
    Gateway gw(mock, cfg);

    std::vector<std::future<ChatResponse>> futures;
    for (int i = 0; i < 6; ++i) {
        futures.push_back(std::async(std::launch::async, [&gw] { return gw.complete(user_request("x")); }));
    }
    for (auto& f : futures) CHECK(f.get().content == "ok");
    CHECK(mock->calls() == 6);
    CHECK(mock->max_in_flight() <= 2);
    CHECK(mock->max_in_flight() >= 2);  // the 50ms delay forces overlap
}

TEST_CASE("caching transport persists responses by digest") {
    support::TempDir dir;
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{{"x", "cached reply"}});
    auto cache = std::make_shared<CachingTransport>(mock, dir.path() / "cache");

    ChatRequest req = user_request("x");
    ChatResponse first = cache->complete(req);
    CHECK(first.content == "cached reply");
    CHECK_FALSE(first.from_cache);
    CHECK(cache->misses() == 1);
    CHECK(mock->calls() == 1);
    CHECK(std::filesystem::exists(dir.path() / "cache" / (cache_key(req) + ".json")));

    ChatResponse second = cache->complete(req);
    CHECK(second.content == "cached reply");
    CHECK(second.from_cache);
    CHECK(cache->hits() == 1);
    CHECK(mock->calls() == 1);

    SUBCASE("sample_tag splits cache entries") {
        ChatRequest tagged = req;
        tagged.sample_tag = 1;
        ChatResponse r = cache->complete(tagged);
        CHECK_FALSE(r.from_cache);
        CHECK(mock->calls() == 2);
    }

    SUBCASE("a fresh instance reuses the directory") {
        CachingTransport again(mock, dir.path() / "cache");
        ChatResponse r = again.complete(req);
        CHECK(r.from_cache);
        CHECK(mock->calls() == 1);
    }
}

TEST_CASE("load_mock_script") {
    support::TempDir dir;

    SUBCASE("valid script") {
        support::write_file(dir.path() / "ok.json",
                            R"([{"match": "a", "reply": "b"}, {"match": "c", "reply": ""}])");
        auto rules = load_mock_script(dir.path() / "ok.json");
        REQUIRE(rules.size() == 2);
        CHECK(rules[0].matcher == "a");
        CHECK(rules[0].reply == "b");
        CHECK(rules[1].reply.empty());
    }

    SUBCASE("missing file is Io") {
        try {
            load_mock_script(dir.path() / "absent.json");
            FAIL("expected Io");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Io);
        }
    }

    SUBCASE("bad JSON is ConfigError") {
        support::write_file(dir.path() / "bad.json", "{nope");
        try {
            load_mock_script(dir.path() / "bad.json");
            FAIL("expected ConfigError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ConfigError);
        }
    }

    SUBCASE("non-array and missing keys are ConfigError") {
        support::write_file(dir.path() / "obj.json", R"({"match": "a"})");
        CHECK_THROWS_AS(load_mock_script(dir.path() / "obj.json"), Error);
        support::write_file(dir.path() / "short.json", R"([{"match": "a"}])");
        CHECK_THROWS_AS(load_mock_script(dir.path() / "short.json"), Error);
    }
}
