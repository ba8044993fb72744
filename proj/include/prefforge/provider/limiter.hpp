#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>

namespace prefforge::provider {

// Caps the number of requests in flight across every client sharing it.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(std::size_t capacity);

    ConcurrencyLimiter(const ConcurrencyLimiter&) = delete;
    ConcurrencyLimiter& operator=(const ConcurrencyLimiter&) = delete;

    class Permit {
    public:
        Permit(Permit&& other) noexcept;
        Permit& operator=(Permit&&) = delete;
        Permit(const Permit&) = delete;
        ~Permit();

    private:
        friend class ConcurrencyLimiter;
        explicit Permit(ConcurrencyLimiter* owner) : owner_(owner) {}
        ConcurrencyLimiter* owner_;
    };

    // Blocks until a slot is free.
    [[nodiscard]] Permit acquire();

    std::size_t capacity() const { return capacity_; }
    std::size_t in_flight() const;
    // Highest in_flight() observed since construction.
    std::size_t peak() const;

private:
    void release();

    const std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    std::size_t peak_ = 0;
};

}  // namespace prefforge::provider
