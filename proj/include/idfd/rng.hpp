#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace idfd {

/// Portable seeded generator.
///
/// The engine is xoshiro256** with its 256-bit state expanded from the
/// 64-bit seed by splitmix64. Uniform doubles take the top 53 bits of a draw;
/// normals use the Marsaglia polar method with one cached spare. None of the
/// conversions go through <random> distributions, whose output is
/// implementation-defined, so a seed yields the same stream on every
/// conforming platform.
class SeededRng {
public:
    using State = std::array<std::uint64_t, 4>;

    explicit SeededRng(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;
    double normal() noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Independent child stream, e.g. one per k-means restart.
    SeededRng derive(std::uint64_t stream) const noexcept;

    struct Snapshot {
        std::uint64_t seed = 0;
        State state{};
        bool has_spare = false;
        double spare = 0.0;
        bool operator==(const Snapshot&) const = default;
    };
    Snapshot snapshot() const noexcept;
    static SeededRng restore(const Snapshot& snap) noexcept;

private:
    std::uint64_t seed_;
    State state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, SeededRng& rng);

}  // namespace idfd
