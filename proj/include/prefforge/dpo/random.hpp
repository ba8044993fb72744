#pragma once

#include <cstdint>
#include <random>

namespace prefforge::dpo {

// mt19937_64 output is fixed by the standard; the distributions in <random>
// are not, so values are derived from raw draws to stay identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, n). Modulo bias is irrelevant at these sizes.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
};

}  // namespace prefforge::dpo
