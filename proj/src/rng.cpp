#include "fiberlink/rng.hpp"

#include <cmath>

namespace fiberlink::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

Block philox4x64(const std::array<std::uint64_t, 4>& counter,
                 const std::array<std::uint64_t, 2>& key) {
    std::uint64_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
    std::uint64_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, x0, hi0, lo0);
        mulhilo(kMul1, x2, hi1, lo1);
        x0 = hi1 ^ x1 ^ k0;
        x1 = lo1;
        x2 = hi0 ^ x3 ^ k1;
        x3 = lo0;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return Block{{x0, x1, x2, x3}};
}

double u64_to_unit_double(std::uint64_t x) {
    // 53-bit mantissa, offset by half an lsb so 0 and 1 are never produced.
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

Block Stream::block_at(std::uint64_t index) const {
    return philox4x64({index, instance_, 0, 0}, key_);
}

std::array<double, 2> Stream::gaussian_pair_at(std::uint64_t index) const {
    const Block b = block_at(index);
    const double u1 = u64_to_unit_double(b.v[0]);
    const double u2 = u64_to_unit_double(b.v[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

std::uint64_t Stream::next_u64() {
    if (buffered_ == 0) {
        buffer_ = block_at(block_index_++);
        buffered_ = 4;
    }
    return buffer_.v[4 - buffered_--];
}

double Stream::uniform() { return u64_to_unit_double(next_u64()); }

double Stream::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_gauss_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_gauss_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace fiberlink::rng
