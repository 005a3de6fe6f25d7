#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ifslab {

// splitmix64 mixer (Vigna). Used to derive decorrelated stream keys from
// (seed, tag, index) triples so replications are independent of execution
// order and of each other.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded deterministic RNG stream. Wraps std::mt19937_64 (bit-exact by the
// standard) but produces doubles by explicit bit manipulation so draws do not
// depend on the standard library's distribution implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : gen_(splitmix64(splitmix64(key))) {}

    // Derive a stream from a user seed, a purpose tag and a replication index.
    static RngStream derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
        std::uint64_t key = splitmix64(seed ^ splitmix64(tag));
        key = splitmix64(key ^ splitmix64(index + 0x51ed2701ULL));
        return RngStream(key);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform draw in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // in (0, 1], safe for log
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Purpose tags for derived streams.
namespace rng_tag {
inline constexpr std::uint64_t trajectory = 0x7452414a'45435431ULL;
inline constexpr std::uint64_t replication = 0x5245504c'49434154ULL;
inline constexpr std::uint64_t probe = 0x50524f42'45504e54ULL;
inline constexpr std::uint64_t gaussian = 0x47415553'5349414eULL;
inline constexpr std::uint64_t mc_operator = 0x4d434f50'45524154ULL;
}  // namespace rng_tag

}  // namespace ifslab
