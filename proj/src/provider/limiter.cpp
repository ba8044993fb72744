#include "prefforge/provider/limiter.hpp"

#include <algorithm>
#include <stdexcept>

namespace prefforge::provider {

ConcurrencyLimiter::ConcurrencyLimiter(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("concurrency cap must be >= 1");
}

ConcurrencyLimiter::Permit::Permit(Permit&& other) noexcept : owner_(other.owner_) { other.owner_ = nullptr; }

ConcurrencyLimiter::Permit::~Permit() {
    if (owner_) owner_->release();
}

ConcurrencyLimiter::Permit ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return in_flight_ < capacity_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
    return Permit(this);
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

std::size_t ConcurrencyLimiter::in_flight() const {
    std::lock_guard lock(mutex_);
    return in_flight_;
}

std::size_t ConcurrencyLimiter::peak() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

}  // namespace prefforge::provider
