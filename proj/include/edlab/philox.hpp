#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: every output block is
// a pure function of (key, counter), so any walker's draws can be produced in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace edlab::philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

constexpr Counter round(const Counter& c, const Key& k) {
    std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace detail

constexpr Counter philox4x32_10(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += detail::kWeyl0;
            k[1] += detail::kWeyl1;
        }
        c = detail::round(c, k);
    }
    return c;
}

/// Uniform double in [0, 1) from 53 bits of two output words.
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
}

struct UniformPair {
    double first;
    double second;
};

inline UniformPair uniforms(std::uint64_t stream, std::uint64_t index, std::uint64_t seed) {
    const Counter c{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    const Key k{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Counter out = philox4x32_10(c, k);
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

/// Standard normal via Box-Muller on one output block.
inline double normal(std::uint64_t stream, std::uint64_t index, std::uint64_t seed) {
    const auto [a, b] = uniforms(stream, index, seed);
    const double radius = std::sqrt(-2.0 * std::log(1.0 - a)); // 1 - a lies in (0, 1]
    return radius * std::cos(2.0 * std::numbers::pi * b);
}

} // namespace edlab::philox
