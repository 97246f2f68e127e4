#pragma once

#include <array>
#include <cstdint>

namespace fkmatch::rng {

// Counter-based stream built on Philox4x32-10 (Salmon et al., SC 2011).
// A stream is addressed by (master_seed, stream_index); the k-th variate of
// a stream is a pure function of (master_seed, stream_index, k), so results
// are identical across runs and across any partition of streams over
// workers. Streams with distinct indices occupy disjoint counter lanes and
// are statistically independent.
//
// A stream is a single-owner object: concurrent use of one instance is not
// supported, concurrent use of distinct instances is the intended pattern.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    // Raw 64-bit draw.
    std::uint64_t next_u64();

    // Uniform on (0, 1] (never 0, so log() is safe).
    double uniform();

    // Standard normal via Box-Muller; generates pairs and caches the spare.
    double normal();

    // Gamma(shape, scale), shape > 0, via Marsaglia-Tsang squeeze.
    double gamma(double shape, double scale);

    // Poisson(mean), mean >= 0, exact (Knuth product method with halving
    // for large means).
    std::uint64_t poisson(double mean);

  private:
    std::array<std::uint32_t, 4> next_block();

    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t block_counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffer_pos_ = 2;  // in units of u64; 2 == empty
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Derives a sub-seed from a master seed and a job tag. Used to give
// independent jobs (identity checks, rerun attempts) disjoint stream
// universes while keeping a single user-facing seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag);

// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

}  // namespace fkmatch::rng
