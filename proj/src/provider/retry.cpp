#include "prefforge/provider/retry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace prefforge::provider {

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); };
}

std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy, std::mt19937_64& rng) {
    std::vector<std::chrono::milliseconds> delays;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double previous = 0.0;
    double nominal = static_cast<double>(policy.base_delay.count());
    for (int i = 1; i < policy.max_attempts; ++i) {
        double delay = nominal * (1.0 + policy.jitter * unit(rng));
        delay = std::max(delay, previous);
        delays.emplace_back(static_cast<std::int64_t>(std::llround(delay)));
        previous = delay;
        nominal *= policy.multiplier;
    }
    return delays;
}

RetryingGenerator::RetryingGenerator(std::shared_ptr<Generator> inner, RetryPolicy policy, Sleeper sleep,
                                     std::uint64_t seed)
    : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleep)), rng_(seed) {}

GenResponse RetryingGenerator::complete(const GenRequest& request) {
    std::mt19937_64 local;
    {
        std::lock_guard lock(rng_mutex_);
        local.seed(rng_());
    }
    return run_with_retry<GenResponse>(policy_, sleep_, local, [&] { return inner_->complete(request); });
}

RetryingRetriever::RetryingRetriever(std::shared_ptr<Retriever> inner, RetryPolicy policy, Sleeper sleep,
                                     std::uint64_t seed)
    : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleep)), rng_(seed) {}

RetrievalResult RetryingRetriever::retrieve(const std::string& query) {
    std::mt19937_64 local;
    {
        std::lock_guard lock(rng_mutex_);
        local.seed(rng_());
    }
    return run_with_retry<RetrievalResult>(policy_, sleep_, local, [&] { return inner_->retrieve(query); });
}

}  // namespace prefforge::provider
