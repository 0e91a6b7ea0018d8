#pragma once

#include <array>
#include <cstdint>

namespace vnet {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Randomness is addressed, not streamed: block (seed, stream, counter) ->
// 128 random bits. A Substream fixes (seed, stream) and walks the counter,
// so trial t of a simulation can draw from Substream(seed, t) regardless of
// which worker thread runs it — results are independent of scheduling.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class Substream {
  public:
    Substream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);
    // Exponential with the given mean.
    double exponential(double mean);
    // Poisson with the given mean. Knuth's product method below mean 10,
    // Hormann's PTRS transformed rejection above.
    std::uint64_t poisson(double mean);

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int avail_ = 0; // unconsumed 32-bit words in block_
    std::uint32_t next_u32();
};

} // namespace vnet
