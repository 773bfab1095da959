#pragma once

#include <cstdint>
#include <string_view>

namespace netfail {

// Counter-based generator (SplitMix64). The k-th draw of a stream with
// initial state s is mix(s + (k+1)*gamma), so streams are cheap to fork
// and draws never depend on other streams. Substreams are keyed by
// (base seed, trial, stream id); adding a stream leaves every other
// stream's draws unchanged.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Independent substream for (seed, trial, stream). Chained mixing keeps
// nearby keys decorrelated.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
    std::uint64_t h = SplitMix64::mix(seed + 0x9E3779B97F4A7C15ULL);
    h = SplitMix64::mix((h ^ trial) + 0x9E3779B97F4A7C15ULL);
    h = SplitMix64::mix((h ^ stream) + 0x9E3779B97F4A7C15ULL);
    return SplitMix64(h);
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t trial, std::string_view stream_name) {
    return substream(seed, trial, fnv1a(stream_name));
}

}  // namespace netfail
