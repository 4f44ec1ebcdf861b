#ifndef REINOPT_RNG_HPP
#define REINOPT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace reinopt {

// Stream ids used to derive independent generators from one master seed.
// Every replication owns one generator per id, so the factor noise, asset
// noise, arrival thinning and claim marks are mutually independent and a
// run is reproducible from (master seed, stream, replication) alone.
enum class Stream : std::uint64_t {
    FactorNoise = 1,
    AssetNoise = 2,
    Thinning = 3,
    Marks = 4,
    Gradient = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

// xoshiro256++ with splitmix64 state expansion. Self-contained so that
// streams are bit-stable across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = detail::splitmix64(s);
    }

    // Documented stream-splitting rule: the substream key is the splitmix64
    // chain over (master, stream id, replication index).
    static Rng stream(std::uint64_t master, Stream id, std::uint64_t replication) {
        std::uint64_t s = master;
        std::uint64_t key = detail::splitmix64(s);
        s ^= 0x6c62272e07bb0142ULL * (static_cast<std::uint64_t>(id) + 1);
        key ^= detail::splitmix64(s);
        s ^= 0x100000001b3ULL * (replication + 0x9e3779b97f4a7c15ULL);
        key ^= detail::splitmix64(s);
        return Rng(key);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller, pair cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

private:
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace reinopt

#endif
