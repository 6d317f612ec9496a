#pragma once

#include <array>
#include <cstdint>

namespace fiberlink::rng {

/// Philox4x64-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3", SC'11). Output is a pure function of
/// (key, counter), so streams can be split by key and indexed randomly by
/// counter without any shared state.
struct Block {
    std::array<std::uint64_t, 4> v;
};

Block philox4x64(const std::array<std::uint64_t, 4>& counter,
                 const std::array<std::uint64_t, 2>& key);

/// Maps a uint64 to a double in the open interval (0, 1).
double u64_to_unit_double(std::uint64_t x);

/// One deterministic substream of the generator. A stream is identified by
/// (seed, domain, instance); the block index is the running counter. Distinct
/// domains never collide, so modules can carve out independent streams from
/// one scenario seed.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t instance = 0)
        : key_{seed, domain}, instance_(instance) {}

    /// Raw block at an absolute index (random access).
    Block block_at(std::uint64_t index) const;

    /// Two independent standard-normal deviates from block `index`,
    /// via Box-Muller. Random access; does not disturb sequential state.
    std::array<double, 2> gaussian_pair_at(std::uint64_t index) const;

    // Sequential convenience API.
    std::uint64_t next_u64();
    double uniform();   ///< in (0, 1)
    double gaussian();  ///< standard normal

private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t instance_ = 0;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    int buffered_ = 0;   // remaining words in buffer_
    double spare_gauss_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fiberlink::rng
