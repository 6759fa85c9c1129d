#include "dbd/random.hpp"

#include <cmath>

#include "dbd/units.hpp"

namespace dbd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

Philox4x32::Block Philox4x32::next_block() {
    const Block counter{static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    ++position_;
    return generate(counter, key_);
}

double uniform_from(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi >> 6) << 26) | (lo >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double normal_from(const Philox4x32::Block& b) {
    const double u1 = uniform_from(b[0], b[1]);
    const double u2 = uniform_from(b[2], b[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double Philox4x32::uniform() {
    const Block b = next_block();
    return uniform_from(b[0], b[1]);
}

double Philox4x32::normal() { return normal_from(next_block()); }

}  // namespace dbd
