#include "qmusic/phase_retrieval.hpp"

#include <cmath>
#include <sstream>

#include "qmusic/errors.hpp"

namespace qmusic {

namespace {

// Phase of 0 is defined as 0 so degenerate interiors stay deterministic.
inline std::complex<double> unit_phase(std::complex<double> x) {
    const double a = std::abs(x);
    return (a > 0.0) ? x / a : std::complex<double>(1.0, 0.0);
}

double gs_objective(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& S,
                    std::complex<double> b_m, const Eigen::VectorXd& z_m,
                    const Eigen::VectorXcd& phases) {
    Eigen::VectorXcd model = S.adjoint() * a;
    model.array() += b_m;
    const Eigen::VectorXcd resid = z_m.cast<std::complex<double>>().cwiseProduct(phases) - model;
    return resid.squaredNorm();
}

Eigen::VectorXcd interior_phases(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& S,
                                 std::complex<double> b_m) {
    Eigen::VectorXcd model = S.adjoint() * a;
    model.array() += b_m;
    for (Eigen::Index p = 0; p < model.size(); ++p) model[p] = unit_phase(model[p]);
    return model;
}

}  // namespace

ExpandedSystem make_expanded_system(const Eigen::MatrixXcd& S, std::complex<double> b_m) {
    ExpandedSystem sys;
    sys.bias = b_m;
    sys.s_bar.resize(S.rows() + 1, S.cols());
    sys.s_bar.topRows(S.rows()) = S;
    sys.s_bar.row(S.rows()).setConstant(std::conj(b_m));
    return sys;
}

Eigen::VectorXcd spectral_init_expanded(const ExpandedSystem& sys, const Eigen::VectorXd& z_m) {
    const Eigen::Index P = sys.s_bar.cols();
    if (z_m.size() != P) {
        std::ostringstream msg;
        msg << "spectral_init: measurement length " << z_m.size() << " does not match P=" << P;
        throw std::invalid_argument(msg.str());
    }
    if (!z_m.allFinite()) throw std::invalid_argument("spectral_init: non-finite measurements");

    const Eigen::Index Kp1 = sys.s_bar.rows();
    Eigen::MatrixXcd R_bar = Eigen::MatrixXcd::Zero(Kp1, Kp1);
    for (Eigen::Index p = 0; p < P; ++p)
        R_bar.noalias() += z_m[p] * sys.s_bar.col(p) * sys.s_bar.col(p).adjoint();

    const Eigen::VectorXcd v = principal_eigenvector(R_bar);
    const Eigen::VectorXcd proj = sys.s_bar.adjoint() * v;  // S_bar^H v
    const double denom = proj.squaredNorm();
    if (denom <= 0.0) throw NumericalError("spectral_init: ||S_bar^H v|| = 0 (degenerate pilots)");
    const double r_bar = proj.cwiseAbs().dot(z_m) / denom;
    return r_bar * v;
}

Eigen::VectorXcd spectral_init(const ExpandedSystem& sys, const Eigen::VectorXd& z_m,
                               const GsOptions& opts) {
    const Eigen::VectorXcd a_bar = spectral_init_expanded(sys, z_m);
    const Eigen::Index K = sys.s_bar.rows() - 1;
    Eigen::VectorXcd a0 = a_bar.head(K);
    if (opts.normalize_by_last_entry) {
        const std::complex<double> last = a_bar[K];
        if (std::abs(last) > 0.0) a0 /= last;
    }
    return a0;
}

GsState gs_step(const GsState& state, const RowSpaceSolver& solver, std::complex<double> b_m,
                const Eigen::VectorXd& z_m) {
    const Eigen::MatrixXcd& S = solver.matrix();
    const Eigen::VectorXcd phases = interior_phases(state.a, S, b_m);
    Eigen::VectorXcd rhs = z_m.cast<std::complex<double>>().cwiseProduct(phases);
    rhs.array() -= b_m;

    GsState next;
    next.a = solver.solve(rhs);
    next.iteration = state.iteration + 1;
    next.objective = gs_objective(next.a, S, b_m, z_m, phases);
    return next;
}

GsState gs_step(const GsState& state, const Eigen::MatrixXcd& S, std::complex<double> b_m,
                const Eigen::VectorXd& z_m) {
    return gs_step(state, RowSpaceSolver(S), b_m, z_m);
}

Eigen::VectorXcd recover_cell_channel(const Eigen::MatrixXcd& S, std::complex<double> b_m,
                                      const Eigen::VectorXd& z_m, int iterations,
                                      const GsOptions& opts) {
    const RowSpaceSolver solver(S);
    const ExpandedSystem sys = make_expanded_system(S, b_m);

    GsState state;
    state.a = spectral_init(sys, z_m, opts);
    state.iteration = 0;
    state.objective = gs_objective(state.a, S, b_m, z_m, interior_phases(state.a, S, b_m));

    for (int n = 0; n < iterations; ++n) {
        const GsState next = gs_step(state, solver, b_m, z_m);
        const double improvement = state.objective - next.objective;
        state = next;
        if (opts.early_exit && improvement < opts.early_exit_tol) break;
    }
    return state.a;
}

Eigen::MatrixXcd recover_channel_matrix(const PilotMatrix& S, const BiasVector& b,
                                        const MagnitudePanel& Z, int iterations,
                                        const GsOptions& opts) {
    const Eigen::Index M = Z.rows();
    const Eigen::Index K = S.entries.rows();
    if (Z.cols() != S.entries.cols()) {
        std::ostringstream msg;
        msg << "recover_channel_matrix: panel has P=" << Z.cols() << " snapshots but pilots have P="
            << S.entries.cols();
        throw std::invalid_argument(msg.str());
    }
    if (b.entries.size() != M) {
        std::ostringstream msg;
        msg << "recover_channel_matrix: bias has " << b.entries.size() << " cells but panel has M="
            << M << " rows";
        throw std::invalid_argument(msg.str());
    }

    Eigen::MatrixXcd A_hat(M, K);
    for (Eigen::Index m = 0; m < M; ++m) {
        try {
            const Eigen::VectorXcd a_m =
                recover_cell_channel(S.entries, b.entries[m], Z.row(m).transpose(), iterations, opts);
            A_hat.row(m) = a_m.adjoint();
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "recover_channel_matrix: cell " << m << ": " << e.what();
            throw NumericalError(msg.str());
        }
    }
    return A_hat;
}

}  // namespace qmusic
