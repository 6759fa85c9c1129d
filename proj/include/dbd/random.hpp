#pragma once

#include <array>
#include <cstdint>

namespace dbd {

// Philox4x32-10 counter-based generator, as in Random123.
// Every draw is a pure function of (key, counter), so Monte Carlo samples do
// not depend on evaluation order or thread count.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static Block generate(Block counter, std::array<std::uint32_t, 2> key);

    // Next 128-bit block of this stream.
    Block next_block();
    // Uniform on (0, 1) with 52 random bits.
    double uniform();
    // Standard normal by Box–Muller from one block (cosine branch).
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
};

// 52-bit uniform on (0, 1) from two words.
double uniform_from(std::uint32_t hi, std::uint32_t lo);
double normal_from(const Philox4x32::Block& b);

}  // namespace dbd
