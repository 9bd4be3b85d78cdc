#ifndef MDCSIM_RNG_HPP
#define MDCSIM_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace mdcsim::rng {

// Counter-based generation: every draw is a pure function of
// (key, counter). Substreams derived from a root seed stay independent of
// the order in which other streams consume values, which keeps replays and
// independent reference implementations in exact agreement.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Fold a path of identifiers into a stream key.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = splitmix64(seed);
    for (std::uint64_t p : path) k = splitmix64(k ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return k;
}

inline std::uint64_t draw_u64(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key + counter * 0x9e3779b97f4a7c15ULL);
}

/// Uniform double in [0, 1) from 53 random bits.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double draw_uniform(std::uint64_t key, std::uint64_t counter, double lo, double hi) {
    return lo + (hi - lo) * to_unit(draw_u64(key, counter));
}

/// Sequential view over a counter-based stream.
class Stream {
  public:
    explicit Stream(std::uint64_t key) : key_(key) {}
    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        : key_(derive(seed, path)) {}

    std::uint64_t next_u64() { return draw_u64(key_, counter_++); }
    double next_unit() { return to_unit(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
    /// Uniform integer in [0, n), n > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        // 64-bit multiply-shift; bias is negligible for the n used here.
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mdcsim::rng

#endif
