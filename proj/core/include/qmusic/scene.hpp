#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qmusic/rng.hpp"

namespace qmusic {

// Atomic constants of the Rydberg transition. Defaults are the 52D_5/2 ->
// 53P_3/2 transition at a 2*pi*5 GHz carrier; the normalized() preset
// folds hbar and the dipole scale out of the channel entirely.
struct AtomicConstants {
    double hbar = 1.054571817e-34;     // J*s
    double electron_charge = 1.602e-19;  // C
    double bohr_radius = 5.292e-11;    // m
    Eigen::Vector3d dipole_moment;     // C*m
    double omega = 2.0 * 3.14159265358979323846 * 5e9;  // rad/s

    static AtomicConstants rydberg_52d_53p();
    static AtomicConstants normalized();

    void validate() const;
};

struct ArrayGeometry {
    int element_count = 32;
    double spacing = 0.5;     // meters
    double wavelength = 1.0;  // meters

    static ArrayGeometry ula(int element_count, double d_over_lambda);

    void validate() const;
};

struct UserSet {
    std::vector<double> angles_rad;  // pairwise separated
    double per_user_power = 1.0;     // P_k = sigma_s^2 / K, equal across users
    double channel_gain = 1.0;       // alpha

    int user_count() const { return static_cast<int>(angles_rad.size()); }
};

enum class PolarizationMode {
    per_user,  // one polarization draw per user, reused by every cell
    per_cell,  // independent draw per (cell, user); ablation only
};

struct ChannelMatrix {
    Eigen::MatrixXcd entries;            // M x K, a_{m,k}
    Eigen::MatrixXd polarization_gains;  // realized dipole projections (M x K or 1 x K)
};

struct BiasVector {
    Eigen::VectorXcd entries;  // length M, one fixed b_m per cell
    double bias_ratio = 0.0;
};

// ULA far-field steering vector: element m is
// (1/sqrt(M)) * exp(-j * 2*pi * m * d * sin(theta) / lambda).
Eigen::VectorXcd steering_vector(double theta_rad, const ArrayGeometry& geom);

// Dipole projection mu^T eps with eps_i ~ N(0, 1/3) i.i.d.
double dipole_projection_gain(RngStream& rng, const AtomicConstants& consts);

// Effective quantum wireless channel. Entry (m, k) is
// (1/hbar) * (mu^T eps) * sqrt(P_k) * alpha * exp(+j * 2*pi * m * d * sin(theta_k) / lambda),
// the conjugate of the steering-vector phase; the conjugate-transpose
// assembly of the recovered per-cell vectors puts the estimate back on
// the steering manifold.
ChannelMatrix generate_channel(RngStream& rng, const ArrayGeometry& geom, const UserSet& users,
                               const AtomicConstants& consts, PolarizationMode mode);

// Holographic bias: |b_m| = bias_ratio * signal_rms with i.i.d. uniform
// phase, fixed across all pilot snapshots.
BiasVector generate_bias(RngStream& rng, const ArrayGeometry& geom, double bias_ratio,
                         double signal_rms);

// Rabi oscillation: sin^2(Omega * t / 2).
double rabi_excitation_probability(double rabi_frequency, double t);

}  // namespace qmusic
