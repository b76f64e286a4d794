#pragma once

#include <cstdint>
#include <random>

namespace wps {

using Rng = std::mt19937_64;

/// Independent random streams inside one run. Keeping the channels apart means
/// a disturbance drawn in one channel never shifts the draws of another.
enum class Stream : std::uint32_t { Orders = 1, Perception = 2, Fault = 3, Slip = 4, Training = 5 };

inline Rng make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace wps
