#include "qmusic/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmusic {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    // Fold the stream id through the seeding chain so nearby ids land far
    // apart in state space.
    std::uint64_t x = seed;
    std::uint64_t fold = stream_id ^ 0xD1B54A32D192ED03ULL;
    (void)splitmix64(fold);
    x ^= splitmix64(fold);
    state_[0] = splitmix64(x);
    state_[1] = splitmix64(x);
    state_[2] = splitmix64(x);
    state_[3] = splitmix64(x);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double RngStream::next_gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    double u1 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = r * std::sin(phi);
    has_cached_gaussian_ = true;
    return r * std::cos(phi);
}

std::complex<double> RngStream::next_complex_gaussian(double variance) {
    if (variance < 0.0) throw std::invalid_argument("complex Gaussian variance must be >= 0");
    if (variance == 0.0) {
        // Still consume one Box-Muller pair so the draw count is
        // independent of the variance.
        double u1 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        (void)next_double();
        return {0.0, 0.0};
    }
    double u1 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-std::log(u1) * variance);
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

RngStream RngStream::substream(std::uint64_t tag) const {
    std::uint64_t x = stream_id_ ^ 0x2545F4914F6CDD1DULL;
    const std::uint64_t mixed = splitmix64(x) ^ (tag * 0x9E3779B97F4A7C15ULL);
    return RngStream(seed_, mixed);
}

Eigen::VectorXcd sample_complex_gaussian(RngStream& rng, Eigen::Index n, double variance) {
    if (variance < 0.0) throw std::invalid_argument("complex Gaussian variance must be >= 0");
    Eigen::VectorXcd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.next_complex_gaussian(variance);
    return out;
}

}  // namespace qmusic
