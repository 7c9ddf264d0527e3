#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qmusic/linalg.hpp"
#include "qmusic/measurement.hpp"

namespace qmusic {

// One alternating-minimization iterate for a single cell. `objective` is
// || z o exp(j*angle) - S^H a - b ||_2^2 evaluated at the phases used to
// produce `a`; it never increases across steps.
struct GsState {
    Eigen::VectorXcd a;
    int iteration = 0;
    double objective = 0.0;
};

// Expanded system [S^H, b_m]^H for one cell: pilot rows stacked on the
// constant bias row, so |S_bar^H [a; 1]| matches the measurement model.
struct ExpandedSystem {
    Eigen::MatrixXcd s_bar;  // (K+1) x P
    std::complex<double> bias;
};

struct GsOptions {
    // Stop early once the objective improves by less than this; the
    // reference procedure runs a fixed iteration count, so disabled by
    // default.
    bool early_exit = false;
    double early_exit_tol = 1e-14;
    // Ablation: divide the truncated initializer by the expanded vector's
    // last entry instead of truncating verbatim.
    bool normalize_by_last_entry = false;
};

ExpandedSystem make_expanded_system(const Eigen::MatrixXcd& S, std::complex<double> b_m);

// Spectral initializer, full expanded vector: principal eigenvector of
// R_bar = sum_p z_p s_bar_p s_bar_p^H, rescaled by
// r_bar = (|v^H S_bar| z) / ||S_bar^H v||^2. Throws NumericalError when
// ||S_bar^H v|| vanishes (degenerate pilots).
Eigen::VectorXcd spectral_init_expanded(const ExpandedSystem& sys, const Eigen::VectorXd& z_m);

// First K entries of the expanded initializer (a_m^0).
Eigen::VectorXcd spectral_init(const ExpandedSystem& sys, const Eigen::VectorXd& z_m,
                               const GsOptions& opts = {});

// One GS step: phase update from the current iterate, then the row-space
// least squares for the new iterate.
GsState gs_step(const GsState& state, const RowSpaceSolver& solver, std::complex<double> b_m,
                const Eigen::VectorXd& z_m);
GsState gs_step(const GsState& state, const Eigen::MatrixXcd& S, std::complex<double> b_m,
                const Eigen::VectorXd& z_m);

// Spectral init followed by N GS steps for one cell.
Eigen::VectorXcd recover_cell_channel(const Eigen::MatrixXcd& S, std::complex<double> b_m,
                                      const Eigen::VectorXd& z_m, int iterations,
                                      const GsOptions& opts = {});

// Recovers every cell and assembles A_hat = [a_hat_1 ... a_hat_M]^H,
// an M x K matrix whose row m is a_hat_m^H.
Eigen::MatrixXcd recover_channel_matrix(const PilotMatrix& S, const BiasVector& b,
                                        const MagnitudePanel& Z, int iterations,
                                        const GsOptions& opts = {});

}  // namespace qmusic
