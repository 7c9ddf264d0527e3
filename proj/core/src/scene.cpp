#include "qmusic/scene.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qmusic {

AtomicConstants AtomicConstants::rydberg_52d_53p() {
    AtomicConstants c;
    c.dipole_moment = Eigen::Vector3d(0.0, 1785.9 * c.electron_charge * c.bohr_radius, 0.0);
    return c;
}

AtomicConstants AtomicConstants::normalized() {
    AtomicConstants c;
    c.hbar = 1.0;
    c.dipole_moment = Eigen::Vector3d(0.0, 1.0, 0.0);
    return c;
}

void AtomicConstants::validate() const {
    if (hbar <= 0.0) throw std::invalid_argument("AtomicConstants: hbar must be > 0");
    if (omega <= 0.0) throw std::invalid_argument("AtomicConstants: omega must be > 0");
    if (dipole_moment.isZero(0.0))
        throw std::invalid_argument("AtomicConstants: dipole moment must have a nonzero component");
}

ArrayGeometry ArrayGeometry::ula(int element_count, double d_over_lambda) {
    ArrayGeometry g;
    g.element_count = element_count;
    g.wavelength = 1.0;
    g.spacing = d_over_lambda;
    g.validate();
    return g;
}

void ArrayGeometry::validate() const {
    if (element_count < 1) throw std::invalid_argument("ArrayGeometry: element count must be >= 1");
    if (spacing <= 0.0) throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
    if (wavelength <= 0.0) throw std::invalid_argument("ArrayGeometry: wavelength must be > 0");
}

Eigen::VectorXcd steering_vector(double theta_rad, const ArrayGeometry& geom) {
    const int M = geom.element_count;
    const double phase_step =
        2.0 * std::numbers::pi * geom.spacing * std::sin(theta_rad) / geom.wavelength;
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    Eigen::VectorXcd a(M);
    for (int m = 0; m < M; ++m) a[m] = std::polar(scale, -phase_step * m);
    return a;
}

double dipole_projection_gain(RngStream& rng, const AtomicConstants& consts) {
    const double sigma = std::sqrt(1.0 / 3.0);
    Eigen::Vector3d eps;
    for (int i = 0; i < 3; ++i) eps[i] = sigma * rng.next_gaussian();
    return consts.dipole_moment.dot(eps);
}

ChannelMatrix generate_channel(RngStream& rng, const ArrayGeometry& geom, const UserSet& users,
                               const AtomicConstants& consts, PolarizationMode mode) {
    geom.validate();
    consts.validate();
    if (users.per_user_power <= 0.0 && users.user_count() > 0)
        throw std::invalid_argument("UserSet: per-user power must be > 0");

    const int M = geom.element_count;
    const int K = users.user_count();
    ChannelMatrix out;
    out.entries.resize(M, K);
    const int gain_rows = (mode == PolarizationMode::per_cell) ? M : 1;
    out.polarization_gains.resize(gain_rows, K);

    const double amp = users.channel_gain * std::sqrt(users.per_user_power) / consts.hbar;
    for (int k = 0; k < K; ++k) {
        const double phase_step = 2.0 * std::numbers::pi * geom.spacing *
                                  std::sin(users.angles_rad[k]) / geom.wavelength;
        double gain = 0.0;
        if (mode == PolarizationMode::per_user) {
            gain = dipole_projection_gain(rng, consts);
            out.polarization_gains(0, k) = gain;
        }
        for (int m = 0; m < M; ++m) {
            if (mode == PolarizationMode::per_cell) {
                gain = dipole_projection_gain(rng, consts);
                out.polarization_gains(m, k) = gain;
            }
            // gain may be negative; keep it as a signed real factor.
            const double arg = phase_step * m;
            out.entries(m, k) =
                amp * gain * std::complex<double>(std::cos(arg), std::sin(arg));
        }
    }
    return out;
}

BiasVector generate_bias(RngStream& rng, const ArrayGeometry& geom, double bias_ratio,
                         double signal_rms) {
    if (bias_ratio < 0.0) throw std::invalid_argument("generate_bias: bias_ratio must be >= 0");
    if (signal_rms <= 0.0) throw std::invalid_argument("generate_bias: signal_rms must be > 0");

    BiasVector out;
    out.bias_ratio = bias_ratio;
    out.entries.resize(geom.element_count);
    const double magnitude = bias_ratio * signal_rms;
    for (int m = 0; m < geom.element_count; ++m) {
        const double phi = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
        out.entries[m] = std::polar(magnitude, phi);
    }
    return out;
}

double rabi_excitation_probability(double rabi_frequency, double t) {
    if (t < 0.0) throw std::invalid_argument("rabi_excitation_probability: t must be >= 0");
    const double s = std::sin(0.5 * rabi_frequency * t);
    return s * s;
}

}  // namespace qmusic
