#include "qmusic/measurement.hpp"

#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qmusic/errors.hpp"
#include "qmusic/linalg.hpp"

namespace qmusic {

void NoiseModel::validate() const {
    if (sigma_n_sq < 0.0 || sigma_t_sq < 0.0)
        throw std::invalid_argument("NoiseModel: noise powers must be >= 0");
}

namespace {

double gram_condition(const Eigen::MatrixXcd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(S * S.adjoint(), Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    return (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
}

void check_panel_dims(const ChannelMatrix& A, const PilotMatrix& S) {
    if (A.entries.cols() != S.entries.rows()) {
        std::ostringstream msg;
        msg << "measurement synthesis: channel has K=" << A.entries.cols()
            << " users but pilot matrix has K=" << S.entries.rows() << " rows";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

PilotMatrix generate_pilots(RngStream& rng, int K, int P, PilotKind kind) {
    if (K < 1) throw std::invalid_argument("generate_pilots: K must be >= 1");
    if (P < K) {
        std::ostringstream msg;
        msg << "generate_pilots: P=" << P << " < K=" << K
            << " would make the channel least squares underdetermined";
        throw std::invalid_argument(msg.str());
    }

    PilotMatrix out;
    out.kind = kind;
    for (int attempt = 0; attempt < 16; ++attempt) {
        out.entries.resize(K, P);
        for (int k = 0; k < K; ++k) {
            for (int p = 0; p < P; ++p) {
                if (kind == PilotKind::unit_modulus_random_phase) {
                    out.entries(k, p) = std::polar(1.0, rng.next_uniform(0.0, 2.0 * std::numbers::pi));
                } else {
                    out.entries(k, p) = rng.next_complex_gaussian(1.0);
                }
            }
        }
        if (gram_condition(out.entries) <= 1e6) return out;
    }
    throw NumericalError("generate_pilots: could not draw a pilot matrix with cond(S S^H) <= 1e6");
}

Eigen::MatrixXcd signal_interior(const ChannelMatrix& A, const PilotMatrix& S) {
    check_panel_dims(A, S);
    // s_p^H a_m over all (m, p): row m of A holds a_m^T.
    return A.entries * S.entries.conjugate();
}

MagnitudePanel synth_quantum_measurements(const ChannelMatrix& A, const PilotMatrix& S,
                                          const BiasVector& b, const NoiseModel& noise,
                                          RngStream& rng) {
    noise.validate();
    check_panel_dims(A, S);
    if (b.entries.size() != A.entries.rows()) {
        std::ostringstream msg;
        msg << "measurement synthesis: bias has " << b.entries.size() << " cells but channel has M="
            << A.entries.rows() << " rows";
        throw std::invalid_argument(msg.str());
    }

    const Eigen::MatrixXcd interior = signal_interior(A, S);
    const Eigen::Index M = interior.rows();
    const Eigen::Index P = interior.cols();
    MagnitudePanel z(M, P);
    for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index p = 0; p < P; ++p)
            z(m, p) = std::abs(interior(m, p) + b.entries[m] + rng.next_complex_gaussian(noise.sigma_n_sq));
    return z;
}

ComplexPanel synth_rf_snapshots(const ChannelMatrix& A, const PilotMatrix& S,
                                const NoiseModel& noise, RngStream& rng) {
    noise.validate();
    check_panel_dims(A, S);

    const Eigen::MatrixXcd interior = signal_interior(A, S);
    const Eigen::Index M = interior.rows();
    const Eigen::Index P = interior.cols();
    ComplexPanel y(M, P);
    for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index p = 0; p < P; ++p)
            y(m, p) = std::conj(interior(m, p)) + rng.next_complex_gaussian(noise.sigma_t_sq);
    return y;
}

}  // namespace qmusic
