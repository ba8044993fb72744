#pragma once

#include "prefforge/provider/types.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

namespace prefforge::provider {

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_delay{1000};
    double multiplier = 2.0;
    // Relative jitter applied to each delay, e.g. 0.2 for +/-20%.
    double jitter = 0.2;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper real_sleeper();

// Delays to wait before attempts 2..max_attempts. Non-decreasing: a jittered
// delay never drops below its predecessor.
std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy, std::mt19937_64& rng);

// Runs `attempt` until it succeeds, throws a non-retryable ProviderError, or
// the budget is spent (ProviderError with kind exhausted). Exceptions other
// than ProviderError propagate unchanged.
template <class Result>
Result run_with_retry(const RetryPolicy& policy, const Sleeper& sleep, std::mt19937_64& rng,
                      const std::function<Result()>& attempt) {
    const auto delays = backoff_schedule(policy, rng);
    const int budget = policy.max_attempts < 1 ? 1 : policy.max_attempts;
    for (int i = 0;; ++i) {
        try {
            return attempt();
        } catch (const ProviderError& err) {
            if (!err.retryable()) throw;
            if (i + 1 >= budget) throw ProviderError(ErrorKind::exhausted, err.what(), i + 1);
            if (sleep) sleep(delays[static_cast<std::size_t>(i)]);
        }
    }
}

// Generator decorator adding retries with exponential backoff.
class RetryingGenerator final : public Generator {
public:
    RetryingGenerator(std::shared_ptr<Generator> inner, RetryPolicy policy, Sleeper sleep = real_sleeper(),
                      std::uint64_t seed = 0x5eed);

    GenResponse complete(const GenRequest& request) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<Generator> inner_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

class RetryingRetriever final : public Retriever {
public:
    RetryingRetriever(std::shared_ptr<Retriever> inner, RetryPolicy policy, Sleeper sleep = real_sleeper(),
                      std::uint64_t seed = 0x5eed);

    RetrievalResult retrieve(const std::string& query) override;
    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<Retriever> inner_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

}  // namespace prefforge::provider
