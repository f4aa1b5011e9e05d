#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace harvol {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of the named substream `stream` (and replication `index`) of a master
/// seed. Distinct names and indices give unrelated streams.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                                  std::uint64_t index = 0) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(master ^ h) + splitmix64(index));
}

/// mt19937_64 with distributions written out explicitly, so draws are the
/// same on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}; n must be positive.
    std::size_t index(std::size_t n) noexcept {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() noexcept;

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace harvol
