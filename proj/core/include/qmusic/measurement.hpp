#pragma once

#include <Eigen/Dense>

#include "qmusic/rng.hpp"
#include "qmusic/scene.hpp"

namespace qmusic {

enum class PilotKind {
    unit_modulus_random_phase,  // constant-power pilots, well-conditioned S S^H
    complex_gaussian,
};

struct PilotMatrix {
    Eigen::MatrixXcd entries;  // K x P
    PilotKind kind = PilotKind::unit_modulus_random_phase;

    int user_count() const { return static_cast<int>(entries.rows()); }
    int snapshot_count() const { return static_cast<int>(entries.cols()); }
};

struct NoiseModel {
    double sigma_n_sq = 0.0;  // quantum shot noise power (atomic path)
    double sigma_t_sq = 0.0;  // Johnson-Nyquist thermal noise power (RF path)

    void validate() const;
};

using MagnitudePanel = Eigen::MatrixXd;  // M x P, z_{m,p} >= 0
using ComplexPanel = Eigen::MatrixXcd;   // M x P RF snapshots

// Random pilots with full row rank; cond(S S^H) <= 1e6 by construction
// (resampled on the rare bad draw). Throws std::invalid_argument if P < K.
PilotMatrix generate_pilots(RngStream& rng, int K, int P, PilotKind kind);

// Noiseless interior s_p^H a_m for every (m, p) -- the pre-bias,
// pre-noise signal panel shared by both receiver models.
Eigen::MatrixXcd signal_interior(const ChannelMatrix& A, const PilotMatrix& S);

// Atomic receiver: z_{m,p} = |s_p^H a_m + b_m + n_{m,p}|, n ~ CN(0, sigma_n^2).
// Phase is discarded; the noise enters before the magnitude.
MagnitudePanel synth_quantum_measurements(const ChannelMatrix& A, const PilotMatrix& S,
                                          const BiasVector& b, const NoiseModel& noise,
                                          RngStream& rng);

// Classical RF receiver over the same channel and pilots:
// Y[m,p] = (s_p^H a_m)^* + n_{m,p}, n ~ CN(0, sigma_t^2). The full complex
// observation is kept and no bias is needed.
ComplexPanel synth_rf_snapshots(const ChannelMatrix& A, const PilotMatrix& S,
                                const NoiseModel& noise, RngStream& rng);

}  // namespace qmusic
