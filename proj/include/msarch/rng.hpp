#pragma once

#include <cstdint>
#include <random>

namespace msarch {

/// Identifies a reproducible random sequence. Replicas use distinct streams.
struct SeedSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Sub-stream ids of the hidden processes within one SeedSpec.
enum class Component : std::uint64_t {
    RestartChain = 0,
    Endogenous = 1,
    Auxiliary = 2,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Engine seed for (seed, stream, component):
///   splitmix64(splitmix64(seed) ^ splitmix64(4 * stream + component + 1)).
std::uint64_t substream_seed(SeedSpec spec, Component component);

class Rng {
public:
    Rng(SeedSpec spec, Component component) : engine_(substream_seed(spec, component)) {}
    explicit Rng(std::uint64_t engine_seed) : engine_(engine_seed) {}

    /// Uniform on (0, 1), 53-bit resolution, never 0.
    double uniform() {
        std::uint64_t bits;
        do {
            bits = engine_() >> 11;
        } while (bits == 0);
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    /// Uniform on (-1, 1).
    double symmetric_uniform() { return 2.0 * uniform() - 1.0; }

    /// Standard normal via the Marsaglia polar method.
    double normal();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace msarch
