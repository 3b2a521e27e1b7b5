#include <doctest.h>

#include <cmath>
#include <random>

#include "poetrat/error.hpp"
#include "poetrat/metrics.hpp"
#include "poetrat/text.hpp"

#include "support.hpp"

#ifdef POETRAT_WITH_HTTP
#include <httplib.h>
#include <thread>
#endif

using namespace poetrat;

namespace {

void check_bleu_matches_oracle(const BleuReport& got, const support::OracleBleu& want) {
    for (int n = 0; n < 4; ++n) {
        CHECK(got.bleu[n] == doctest::Approx(want.bleu[n]).epsilon(1e-6));
        CHECK(got.precisions[n] == doctest::Approx(want.precisions[n]).epsilon(1e-9));
    }
    CHECK(got.brevity_penalty == doctest::Approx(want.brevity_penalty).epsilon(1e-9));
    CHECK(got.candidate_len == want.candidate_len);
    CHECK(got.reference_len == want.reference_len);
}

// Computational-formula Pearson, independent of the library's
// mean-centered form.
double oracle_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Fractional rank by counting: rank(v) = #less + (#equal + 1) / 2.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        int less = 0, equal = 0;
        for (double other : v) {
            if (other < v[i]) ++less;
            if (other == v[i]) ++equal;
        }
        ranks[i] = less + (equal + 1) / 2.0;
    }
    return ranks;
}

// Tau-b from group tie counts, independent of pairwise tie counting.
bool oracle_kendall(const std::vector<double>& xs, const std::vector<double>& ys, double* out) {
    long long c = 0, d = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        for (size_t j = i + 1; j < xs.size(); ++j) {
            double prod = (xs[i] - xs[j]) * (ys[i] - ys[j]);
            if (prod > 0) ++c;
            if (prod < 0) ++d;
        }
    }
    auto tie_pairs = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        long long pairs = 0;
        size_t i = 0;
        while (i < v.size()) {
            size_t j = i;
            while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
            long long t = static_cast<long long>(j - i + 1);
            pairs += t * (t - 1) / 2;
            i = j + 1;
        }
        return pairs;
    };
    long long n = static_cast<long long>(xs.size());
    long long n0 = n * (n - 1) / 2;
    double denom = std::sqrt(static_cast<double>(n0 - tie_pairs(xs))) *
                   std::sqrt(static_cast<double>(n0 - tie_pairs(ys)));
    if (denom == 0.0) return false;
    *out = static_cast<double>(c - d) / denom;
    return true;
}

PromptSet test_prompts() { return PromptSet::load(support::prompts_dir()); }

// Counts calls and replies from a fixed sequence, repeating the last.
class SequenceTransport : public Transport {
public:
    explicit SequenceTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    ChatResponse complete(const ChatRequest&) override {
        size_t i = std::min(static_cast<size_t>(calls_++), replies_.size() - 1);
        return ChatResponse{replies_[i], "seq", 0, 0, false};
    }
    int calls() const { return calls_; }

private:
    std::vector<std::string> replies_;
    int calls_ = 0;
};

}  // namespace

TEST_CASE("corpus BLEU matches the oracle on 200 random corpora") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> pairs_dist(1, 10);
    std::uniform_int_distribution<int> vocab_dist(2, 20);
    for (int round = 0; round < 200; ++round) {
        int pairs = pairs_dist(rng);
        int vocab = vocab_dist(rng);
        std::vector<std::string> cands, refs;
        for (int p = 0; p < pairs; ++p) {
            cands.push_back(support::random_sentence(rng, 12, vocab));
            refs.push_back(support::random_sentence(rng, 12, vocab));
        }

        std::vector<std::vector<std::string>> cand_toks, ref_toks;
        for (const auto& s : cands) cand_toks.push_back(support::oracle_ws_tokens(s));
        for (const auto& s : refs) ref_toks.push_back(support::oracle_ws_tokens(s));
        check_bleu_matches_oracle(corpus_bleu(cands, refs, BleuTokenizer::Whitespace),
                                  support::oracle_corpus_bleu(cand_toks, ref_toks));

        cand_toks.clear();
        ref_toks.clear();
        for (const auto& s : cands) cand_toks.push_back(support::oracle_char_tokens(s));
        for (const auto& s : refs) ref_toks.push_back(support::oracle_char_tokens(s));
        check_bleu_matches_oracle(corpus_bleu(cands, refs, BleuTokenizer::Character),
                                  support::oracle_corpus_bleu(cand_toks, ref_toks));
    }
}

TEST_CASE("corpus BLEU hand-checked example") {
    auto r = corpus_bleu({"the cat sat on mat"}, {"the cat sat on the mat"}, BleuTokenizer::Whitespace);
    CHECK(r.candidate_len == 5);
    CHECK(r.reference_len == 6);
    CHECK(r.precisions[0] == doctest::Approx(1.0));
    CHECK(r.precisions[1] == doctest::Approx(3.0 / 4.0));
    CHECK(r.precisions[2] == doctest::Approx(2.0 / 3.0));
    CHECK(r.precisions[3] == doctest::Approx(1.0 / 2.0));
    double bp = std::exp(1.0 - 6.0 / 5.0);
    CHECK(r.brevity_penalty == doctest::Approx(bp).epsilon(1e-12));
    CHECK(r.bleu[0] == doctest::Approx(100.0 * bp));
    CHECK(r.bleu[3] ==
          doctest::Approx(100.0 * bp * std::pow(1.0 * 0.75 * (2.0 / 3.0) * 0.5, 0.25)).epsilon(1e-12));
}

TEST_CASE("corpus BLEU edge cases") {
    SUBCASE("identity scores 100") {
        auto r = corpus_bleu({"a b c d e"}, {"a b c d e"}, BleuTokenizer::Whitespace);
        for (int n = 0; n < 4; ++n) CHECK(r.bleu[n] == doctest::Approx(100.0));
    }
    SUBCASE("empty candidate zeroes everything") {
        auto r = corpus_bleu({""}, {"a b"}, BleuTokenizer::Whitespace);
        CHECK(r.brevity_penalty == doctest::Approx(0.0));
        CHECK(r.bleu[0] == doctest::Approx(0.0));
    }
    SUBCASE("longer candidate has no penalty") {
        auto r = corpus_bleu({"a b c"}, {"a b"}, BleuTokenizer::Whitespace);
        CHECK(r.brevity_penalty == doctest::Approx(1.0));
    }
    SUBCASE("disjoint tokens score 0 without smoothing") {
        auto r = corpus_bleu({"x y z"}, {"a b c"}, BleuTokenizer::Whitespace);
        for (int n = 0; n < 4; ++n) CHECK(r.bleu[n] == doctest::Approx(0.0));
    }
    SUBCASE("character tokenizer ignores whitespace") {
        auto a = corpus_bleu({"ab cd"}, {"abcd"}, BleuTokenizer::Character);
        CHECK(a.candidate_len == 4);
        CHECK(a.bleu[3] == doctest::Approx(100.0));
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(corpus_bleu({}, {}, BleuTokenizer::Whitespace), Error);
        CHECK_THROWS_AS(corpus_bleu({"a"}, {"a", "b"}, BleuTokenizer::Whitespace), Error);
    }
}

TEST_CASE("correlation closed forms") {
    std::vector<double> xs = {1, 2, 3, 4};
    std::vector<double> ys = {1, 3, 2, 4};
    CHECK(pearson(xs, ys) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(spearman(xs, ys) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(kendall(xs, ys) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    std::vector<double> anti = {4, 3, 2, 1};
    CHECK(pearson(xs, anti) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(spearman(xs, anti) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(kendall(xs, anti) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("correlation invariances") {
    std::vector<double> xs = {0.3, 1.7, -2.0, 5.5, 4.1, 0.0};
    std::vector<double> ys = {1.0, 0.2, 3.3, -0.5, 2.2, 2.0};

    SUBCASE("pearson is affine-invariant") {
        std::vector<double> scaled;
        for (double x : xs) scaled.push_back(2.5 * x - 7.0);
        CHECK(pearson(scaled, ys) == doctest::Approx(pearson(xs, ys)).epsilon(1e-12));
        std::vector<double> flipped;
        for (double x : xs) flipped.push_back(-x);
        CHECK(pearson(flipped, ys) == doctest::Approx(-pearson(xs, ys)).epsilon(1e-12));
    }

    SUBCASE("rank statistics are monotone-invariant") {
        std::vector<double> warped;
        for (double x : xs) warped.push_back(std::exp(x));
        CHECK(spearman(warped, ys) == doctest::Approx(spearman(xs, ys)).epsilon(1e-12));
        CHECK(kendall(warped, ys) == doctest::Approx(kendall(xs, ys)).epsilon(1e-12));
    }
}

TEST_CASE("correlations match independent oracles on random vectors") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> len_dist(2, 20);
    std::uniform_int_distribution<int> val_dist(0, 4);  // small range forces ties
    int checked = 0;
    for (int round = 0; round < 100; ++round) {
        int n = len_dist(rng);
        std::vector<double> xs, ys;
        for (int i = 0; i < n; ++i) {
            xs.push_back(val_dist(rng));
            ys.push_back(val_dist(rng));
        }
        double tau;
        if (!oracle_kendall(xs, ys, &tau)) {
            CHECK_THROWS_AS(kendall(xs, ys), Error);
            continue;
        }
        CHECK(kendall(xs, ys) == doctest::Approx(tau).epsilon(1e-12));

        bool const_x = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
        bool const_y = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
        if (const_x || const_y) {
            CHECK_THROWS_AS(pearson(xs, ys), Error);
            continue;
        }
        CHECK(pearson(xs, ys) == doctest::Approx(oracle_pearson(xs, ys)).epsilon(1e-9));
        CHECK(spearman(xs, ys) ==
              doctest::Approx(oracle_pearson(oracle_ranks(xs), oracle_ranks(ys))).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 50);  // the generator must exercise the happy path
}

TEST_CASE("correlation degenerate inputs") {
    CHECK_THROWS_AS(pearson({1.0}, {2.0}), Error);
    CHECK_THROWS_AS(pearson({}, {}), Error);
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(spearman({2, 2, 2}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(kendall({5, 5, 5}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), Error);
    try {
        pearson({1, 1}, {1, 2});
        FAIL("expected DegenerateInput");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateInput);
    }
}

TEST_CASE("judge parses the first integer and retries unparseable replies") {
    PromptSet prompts = test_prompts();
    JudgeOptions options;
    options.model = "judge";

    SUBCASE("clean parse") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"Score: 3/5"});
        Gateway gw(seq);
        JudgeScore s = judge(gw, prompts, options, "src", "tr", Criterion::BM);
        CHECK(s.value == 3);
        CHECK(s.raw_reply == "Score: 3/5");
        CHECK(seq->calls() == 1);
    }

    SUBCASE("out-of-range replies are retried until a valid one") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"zero", "10", "I give it 4 out of 5."});
        Gateway gw(seq);
        JudgeScore s = judge(gw, prompts, options, "src", "tr", Criterion::BS);
        CHECK(s.value == 4);
        CHECK(seq->calls() == 3);
    }

    SUBCASE("gives up after parse_retries extra attempts") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"7"});
        Gateway gw(seq);
        try {
            judge(gw, prompts, options, "src", "tr", Criterion::BF);
            FAIL("expected UnparseableScore");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::UnparseableScore);
            CHECK(std::string(e.what()).find("7") != std::string::npos);
        }
        CHECK(seq->calls() == 3);
    }

    SUBCASE("empty inputs rejected") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"3"});
        Gateway gw(seq);
        CHECK_THROWS_AS(judge(gw, prompts, options, "", "tr", Criterion::BM), Error);
        CHECK_THROWS_AS(judge(gw, prompts, options, "src", "", Criterion::BM), Error);
    }
}

TEST_CASE("score_card runs the three rubrics and rounds the mean") {
    PromptSet prompts = test_prompts();
    auto mock = std::make_shared<MockTransport>(std::vector<MockRule>{
        {"beauty of meaning", "4"},
        {"beauty of sound", "3"},
        {"consistency with the source poem's structure", "4"},
    });
    Gateway gw(mock);
    JudgeOptions options;
    options.model = "judge";
    ScoreCard card = score_card(gw, prompts, options, "src", "tr");
    CHECK(card.bm.value == 4);
    CHECK(card.bs.value == 3);
    CHECK(card.bf.value == 4);
    CHECK(card.avg == doctest::Approx(3.7));
    CHECK(mock->calls() == 3);
}

TEST_CASE("scorecard_avg rounds half away from zero") {
    CHECK(scorecard_avg(4, 3, 4) == doctest::Approx(3.7));
    CHECK(scorecard_avg(5, 5, 5) == doctest::Approx(5.0));
    CHECK(scorecard_avg(1, 1, 2) == doctest::Approx(1.3));
    CHECK(scorecard_avg(4, 4, 3) == doctest::Approx(3.7));
    CHECK(scorecard_avg(2, 3, 3) == doctest::Approx(2.7));
}

TEST_CASE("adequacy judge is label-order invariant") {
    PromptSet prompts = test_prompts();
    AdequacyTriplet triplet;
    triplet.id = "t1";
    triplet.source = "source line";
    triplet.correct = "the faithful rendering";
    triplet.erroneous = "the mistaken rendering";
    JudgeOptions options;
    options.model = "judge";

    // Answers with whichever label precedes in the prompt; the correct
    // option's position depends only on (seed, id).
    auto pick = [&](bool want_correct) {
        return std::make_shared<FunctionTransport>([&, want_correct](const ChatRequest& req) {
            const std::string& p = req.messages.back().content;
            size_t pos_c = p.find(triplet.correct);
            size_t pos_e = p.find(triplet.erroneous);
            REQUIRE(pos_c != std::string::npos);
            REQUIRE(pos_e != std::string::npos);
            bool correct_first = pos_c < pos_e;
            std::string label = (correct_first == want_correct) ? "A" : "B";
            return ChatResponse{label, "judge", 0, 0, false};
        });
    };

    SUBCASE("correct answers score 1 under every seed") {
        Gateway gw(pick(true));
        for (uint64_t seed = 0; seed < 20; ++seed) {
            CHECK(adequacy_judge(gw, prompts, options, triplet, "candidate text", seed) == 1);
        }
    }

    SUBCASE("wrong answers score 0 under every seed") {
        Gateway gw(pick(false));
        for (uint64_t seed = 0; seed < 20; ++seed) {
            CHECK(adequacy_judge(gw, prompts, options, triplet, "candidate text", seed) == 0);
        }
    }

    SUBCASE("a constant-label responder sees both orders across seeds") {
        auto constant = std::make_shared<FunctionTransport>(
            [](const ChatRequest&) { return ChatResponse{"A", "judge", 0, 0, false}; });
        Gateway gw(constant);
        bool saw_one = false, saw_zero = false;
        for (uint64_t seed = 0; seed < 20; ++seed) {
            int v = adequacy_judge(gw, prompts, options, triplet, "candidate text", seed);
            (v ? saw_one : saw_zero) = true;
        }
        CHECK(saw_one);
        CHECK(saw_zero);
    }

    SUBCASE("labels must be standalone") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"CAB", "ABBA", "Option B."});
        Gateway gw(seq);
        int v = adequacy_judge(gw, prompts, options, triplet, "candidate text", 0);
        CHECK((v == 0 || v == 1));
        CHECK(seq->calls() == 3);  // first two replies have no standalone label
    }

    SUBCASE("unparseable after retries") {
        auto seq = std::make_shared<SequenceTransport>(std::vector<std::string>{"maybe"});
        Gateway gw(seq);
        try {
            adequacy_judge(gw, prompts, options, triplet, "candidate text", 0);
            FAIL("expected UnparseableChoice");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::UnparseableChoice);
        }
        CHECK(seq->calls() == 3);
    }

    SUBCASE("empty candidate rejected") {
        Gateway gw(pick(true));
        CHECK_THROWS_AS(adequacy_judge(gw, prompts, options, triplet, "", 0), Error);
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy({1, 0, 1, 0}) == doctest::Approx(50.0));
    CHECK(accuracy({1, 1, 1}) == doctest::Approx(100.0));
    CHECK(accuracy({0}) == doctest::Approx(0.0));
    CHECK(accuracy({1, 0, 0}) == doctest::Approx(33.3));
    CHECK_THROWS_AS(accuracy({}), Error);
}

#ifdef POETRAT_WITH_HTTP
TEST_CASE("external scorer client round-trips over HTTP") {
    httplib::Server server;
    std::string seen_body;
    server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        res.set_content(R"({"score": 0.75})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread pump([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ExternalScorerClient client("http://127.0.0.1:" + std::to_string(port) + "/score");
    CHECK(client.score("cand", "ref", "src") == doctest::Approx(0.75));
    CHECK(seen_body.find("\"candidate\":\"cand\"") != std::string::npos);
    CHECK(seen_body.find("\"reference\":\"ref\"") != std::string::npos);
    CHECK(seen_body.find("\"source\":\"src\"") != std::string::npos);

    server.stop();
    pump.join();

    CHECK_THROWS_AS(ExternalScorerClient(""), Error);
}
#endif
