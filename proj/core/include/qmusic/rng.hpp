#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace qmusic {

// Counter-seeded xoshiro256++ stream. Identical (seed, stream_id) pairs
// produce identical sequences on every platform; distinct stream_ids give
// independent streams, so Monte-Carlo trials can run in any order or in
// parallel without changing results.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi);

    // Standard normal via Box-Muller (pair-cached).
    double next_gaussian();

    // Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    std::complex<double> next_complex_gaussian(double variance);

    // Derive an independent sub-stream keyed by `tag`.
    RngStream substream(std::uint64_t tag) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_[4];
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

// i.i.d. CN(0, variance) vector. Throws std::invalid_argument on
// negative variance.
Eigen::VectorXcd sample_complex_gaussian(RngStream& rng, Eigen::Index n, double variance);

}  // namespace qmusic
