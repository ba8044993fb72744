#include "fakes.hpp"

#include "prefforge/provider/cleanup.hpp"
#include "prefforge/provider/limiter.hpp"
#include "prefforge/provider/mock.hpp"
#include "prefforge/provider/retry.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>
#include <thread>

using namespace prefforge::provider;

namespace {

GenRequest request_for(StageTag tag, std::map<std::string, std::string> inputs, std::string user = {}) {
    GenRequest r;
    r.stage_tag = tag;
    r.inputs = std::move(inputs);
    r.user_prompt = std::move(user);
    return r;
}

// Fails the first `failures` calls with `kind`, then answers.
class FlakyGenerator final : public Generator {
public:
    FlakyGenerator(int failures, ErrorKind kind) : failures_(failures), kind_(kind) {}
    GenResponse complete(const GenRequest&) override {
        if (calls_++ < failures_) throw ProviderError(kind_, "flaky");
        return testing::text_response("ok");
    }
    std::string id() const override { return "flaky"; }
    int calls() const { return calls_; }

private:
    int failures_;
    ErrorKind kind_;
    int calls_ = 0;
};

}  // namespace

TEST_SUITE("provider") {

TEST_CASE("mock contract") {
    CHECK(mock_provider(StageTag::enhance, {{"q_raw", "abc"}}).text == "ENH::abc");

    const auto rej = mock_provider(StageTag::reject, {{"q_enhanced", "E"}});
    CHECK(rej.text == "REJANS::E");
    CHECK(rej.reasoning == "REJCOT::E");

    const auto cot = nlohmann::json::parse(mock_provider(StageTag::cot, {{"q_enhanced", "q"}, {"rag_content", "r"}}).text);
    CHECK(cot == nlohmann::json::array({"COT1::q", "COT2::r"}));

    const auto ans = mock_provider(StageTag::answer, {{"reasoning_w", "0123456789abcdefXYZ"}});
    CHECK(ans.text == "ANS::0123456789abcdef");

    // Prefixes count code points, not bytes.
    const auto cjk = mock_provider(StageTag::answer, {{"reasoning_w", "一二三四五六七八九十甲乙丙丁戊己庚辛"}});
    CHECK(cjk.text == "ANS::一二三四五六七八九十甲乙丙丁戊己");

    const auto judge = nlohmann::json::parse(mock_provider(StageTag::judge, {}).text);
    CHECK(judge == nlohmann::json{{"information_richness", 7}, {"relevance", 7}, {"accuracy", 7}});
}

TEST_CASE("mock generator falls back to the user prompt") {
    MockGenerator mock;
    CHECK(mock.complete(request_for(StageTag::enhance, {}, "Q7: what is X")).text == "ENH::what is X");

    auto req = request_for(StageTag::reject, {{"q_enhanced", "E"}});
    req.want_raw_reasoning = true;
    const auto raw = mock.complete(req);
    CHECK(raw.text == "REJANS::E");
    CHECK(raw.raw_reasoning == "REJCOT::E");

    req.want_raw_reasoning = false;
    const auto inline_block = mock.complete(req);
    CHECK_FALSE(inline_block.raw_reasoning.has_value());
    CHECK(inline_block.text == "<think>\nREJCOT::E\n</think>\n\nREJANS::E");
}

TEST_CASE("mock is deterministic") {
    MockGenerator mock;
    for (auto tag : {StageTag::enhance, StageTag::reject, StageTag::cot, StageTag::answer, StageTag::judge}) {
        const auto req = request_for(tag, {{"q_raw", "a"}, {"q_enhanced", "b"}, {"rag_content", "c"}, {"reasoning_w", "d"}});
        CHECK(mock.complete(req).text == mock.complete(req).text);
    }
}

TEST_CASE("mock retriever") {
    MockRetriever retriever;
    const auto r = retriever.retrieve("q");
    CHECK(r.passages == std::vector<std::string>{"RAG::q::1", "RAG::q::2"});
    CHECK(r.merged == "RAG::q::1\n---\nRAG::q::2");
    CHECK_FALSE(r.empty);
}

TEST_CASE("cleanup strips markup, dedups and handles empty input") {
    CHECK(strip_markup("<p>Hello&nbsp;<b>world</b> [12]</p>") == "Hello world");
    CHECK(strip_markup("a &amp; b &lt;tag&gt;") == "a & b");

    CleanupOptions opts;
    opts.min_chars = 0;
    const std::vector<std::string> dup = {"Same text here", "same   TEXT here", "Other"};
    CHECK(cleanup_passages(dup, opts) == std::vector<std::string>{"Same text here", "Other"});

    const auto empty = assemble_retrieval("q", {}, opts);
    CHECK(empty.empty);
    CHECK(empty.merged.empty());
}

TEST_CASE("cleanup drops short and low-score passages and truncates") {
    CleanupOptions opts;
    opts.min_chars = 10;
    opts.max_chars = 25;
    opts.min_score = 0.5;
    const std::vector<RetrievedPassage> raw = {
        {"short", 0.9}, {"long enough passage one", 0.9}, {"long enough passage two", 0.1}, {"and a third long passage", 0.8}};
    const auto r = assemble_retrieval("q", raw, opts);
    CHECK(r.passages.front() == "long enough passage one");
    CHECK(utf8_length(r.merged) <= 25);
}

TEST_CASE("cleanup is idempotent on fuzzed passages") {
    std::mt19937_64 rng(3);
    const std::vector<std::string> bits = {"<a href='x'>", "</a>", "&amp;", "&#39;", "[3]", " ", "\n", "word",
                                           "Word", "中文", "<!-- c -->", "<", ">", "[", "]", "12"};
    CleanupOptions opts;
    opts.min_chars = 5;
    opts.max_chars = 60;
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> passages(rng() % 6);
        for (auto& p : passages) {
            for (int k = 0, n = static_cast<int>(rng() % 15); k < n; ++k) p += bits[rng() % bits.size()];
        }
        const auto once = cleanup_passages(passages, opts);
        CHECK(cleanup_passages(once, opts) == once);
        CHECK(utf8_length(merge_passages(once, opts)) <= opts.max_chars);
        for (const auto& p : passages) CHECK(strip_markup(strip_markup(p)) == strip_markup(p));
    }
}

TEST_CASE("retry: auth is never retried") {
    auto inner = std::make_shared<FlakyGenerator>(100, ErrorKind::auth);
    RetryingGenerator gen(inner, RetryPolicy{}, [](std::chrono::milliseconds) {});
    CHECK_THROWS_AS(gen.complete({}), ProviderError);
    CHECK(inner->calls() == 1);
}

TEST_CASE("retry: transient errors recover within budget") {
    std::vector<std::chrono::milliseconds> slept;
    auto inner = std::make_shared<FlakyGenerator>(2, ErrorKind::rate_limit);
    RetryingGenerator gen(inner, RetryPolicy{}, [&](std::chrono::milliseconds d) { slept.push_back(d); });
    CHECK(gen.complete({}).text == "ok");
    CHECK(inner->calls() == 3);
    CHECK(slept.size() == 2);
}

TEST_CASE("retry: budget is never exceeded") {
    for (int attempts = 1; attempts <= 6; ++attempts) {
        auto inner = std::make_shared<FlakyGenerator>(100, ErrorKind::timeout);
        RetryPolicy policy;
        policy.max_attempts = attempts;
        RetryingGenerator gen(inner, policy, [](std::chrono::milliseconds) {});
        try {
            (void)gen.complete({});
            FAIL("expected exhaustion");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ErrorKind::exhausted);
            CHECK(e.attempts() == attempts);
        }
        CHECK(inner->calls() == attempts);
    }
}

TEST_CASE("backoff schedule is non-decreasing and near 1s/2s/4s") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed);
        const auto delays = backoff_schedule(RetryPolicy{}, rng);
        REQUIRE(delays.size() == 3);
        for (std::size_t i = 1; i < delays.size(); ++i) CHECK(delays[i] >= delays[i - 1]);
        CHECK(delays[0].count() >= 800);
        CHECK(delays[0].count() <= 1200);
        CHECK(delays[2].count() <= 4800);
    }
}

TEST_CASE("error kinds") {
    CHECK(ProviderError(ErrorKind::rate_limit, "x").retryable());
    CHECK(ProviderError(ErrorKind::timeout, "x").retryable());
    CHECK(ProviderError(ErrorKind::transient, "x").retryable());
    CHECK_FALSE(ProviderError(ErrorKind::auth, "x").retryable());
    CHECK_FALSE(ProviderError(ErrorKind::bad_request, "x").retryable());
    CHECK_FALSE(ProviderError(ErrorKind::exhausted, "x").retryable());
}

TEST_CASE("limiter caps requests in flight") {
    ConcurrencyLimiter limiter(3);
    std::atomic<int> inside{0};
    std::atomic<int> worst{0};
    {
        std::vector<std::jthread> threads;
        for (int t = 0; t < 12; ++t) {
            threads.emplace_back([&] {
                for (int k = 0; k < 20; ++k) {
                    auto permit = limiter.acquire();
                    const int now = ++inside;
                    int prev = worst.load();
                    while (now > prev && !worst.compare_exchange_weak(prev, now)) {
                    }
                    std::this_thread::sleep_for(std::chrono::microseconds(200));
                    --inside;
                }
            });
        }
    }
    CHECK(worst.load() <= 3);
    CHECK(limiter.peak() <= 3);
    CHECK(limiter.peak() >= 1);
    CHECK(limiter.in_flight() == 0);
}

}  // TEST_SUITE
