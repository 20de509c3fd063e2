#pragma once

#include <cstdint>
#include <random>

namespace sdrc {

/// Named sub-streams so that one trial seed can drive several independent
/// draws (cause samples, filter taps, ...) without them sharing state.
enum class Stream : std::uint32_t {
    Cause = 1,
    Filter = 2,
    Radius = 3,
    Exponent = 4,
};

/// Seeded generator; the only source of randomness in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed, Stream stream = Stream::Cause) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        engine_.seed(seq);
    }

    double normal() { return normal_(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double rademacher() { return (engine_() & 1U) ? 1.0 : -1.0; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sdrc
