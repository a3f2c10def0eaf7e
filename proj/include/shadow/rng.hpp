#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace shadow {

/// Named, seedable random stream. All randomness in a run flows from one
/// master seed, fanned out to independent sub-streams ("haar", "born",
/// "lanczos-start", ...) so each component is reproducible on its own.
///
/// The engine is std::mt19937_64 (bit-exact across platforms by the
/// standard); doubles are produced by the 53-bit mapping below rather than
/// std::uniform_real_distribution, whose output is implementation-defined.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view name)
        : engine_(derive_seed(master_seed, name)) {}

    explicit RngStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1).
    double uniform_pm1() { return 2.0 * uniform() - 1.0; }

    std::uint64_t raw() { return engine_(); }

    static std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view name) {
        return splitmix64(master_seed ^ fnv1a64(name));
    }

private:
    // SplitMix64 finalizer; decorrelates nearby master seeds.
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t fnv1a64(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::mt19937_64 engine_;
};

} // namespace shadow
