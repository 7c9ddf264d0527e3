#include "qmusic/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qmusic {

namespace {

// Largest-magnitude entry made real nonnegative. First index wins ties.
void fix_column_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            imax = i;
        }
    }
    if (best <= 0.0) return;
    const std::complex<double> rot = std::conj(v[imax]) / best;
    v *= rot;
}

}  // namespace

HermitianEigenResult hermitian_eig(const Eigen::MatrixXcd& R) {
    if (R.rows() != R.cols()) {
        std::ostringstream msg;
        msg << "hermitian_eig: matrix must be square, got " << R.rows() << "x" << R.cols();
        throw std::invalid_argument(msg.str());
    }
    const Eigen::MatrixXcd H = 0.5 * (R + R.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver failed to converge");

    const Eigen::Index n = R.rows();
    HermitianEigenResult out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) fix_column_phase(out.eigenvectors.col(j));
    return out;
}

Eigen::VectorXcd principal_eigenvector(const Eigen::MatrixXcd& R) {
    return hermitian_eig(R).eigenvectors.col(0);
}

RowSpaceSolver::RowSpaceSolver(Eigen::MatrixXcd S) : S_(std::move(S)) {
    const Eigen::Index K = S_.rows();
    const Eigen::Index P = S_.cols();
    if (K < 1 || P < K) {
        std::ostringstream msg;
        msg << "least squares: need P >= K >= 1, got K=" << K << " P=" << P;
        throw std::invalid_argument(msg.str());
    }
    const Eigen::MatrixXcd gram = S_ * S_.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    cond_ = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(cond_ <= 1e12)) {
        std::ostringstream msg;
        msg << "least squares: pilot matrix S (" << K << "x" << P
            << ") is rank deficient, cond(S S^H) = " << cond_;
        throw NumericalError(msg.str());
    }
    ldlt_.compute(gram);
}

Eigen::VectorXcd RowSpaceSolver::solve(const Eigen::VectorXcd& rhs) const {
    if (rhs.size() != S_.cols()) {
        std::ostringstream msg;
        msg << "least squares: rhs length " << rhs.size() << " does not match P=" << S_.cols();
        throw std::invalid_argument(msg.str());
    }
    return ldlt_.solve(S_ * rhs);
}

Eigen::VectorXcd least_squares_solve(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& rhs) {
    return RowSpaceSolver(S).solve(rhs);
}

}  // namespace qmusic
