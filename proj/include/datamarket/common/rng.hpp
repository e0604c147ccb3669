#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>

namespace datamarket {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One seeded generator per actor so that adding or removing an actor in a
// scenario does not shift every other actor's draws.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

    std::mt19937_64& stream(std::uint64_t actor_key) {
        auto it = streams_.find(actor_key);
        if (it == streams_.end())
            it = streams_.emplace(actor_key, std::mt19937_64{splitmix64(seed_ ^ splitmix64(actor_key))}).first;
        return it->second;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::map<std::uint64_t, std::mt19937_64> streams_;
};

template <std::size_t N>
std::array<std::uint8_t, N> random_bytes(std::mt19937_64& rng) {
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; i += 8) {
        std::uint64_t v = rng();
        for (std::size_t j = 0; j < 8 && i + j < N; ++j) out[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return out;
}

}  // namespace datamarket
