#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qmusic/errors.hpp"

namespace qmusic {

// Dense Hermitian eigendecomposition, eigenvalues sorted descending.
// Column j of `eigenvectors` pairs with eigenvalues[j]; each column's
// global phase is fixed by making its largest-magnitude entry real
// nonnegative, so results are reproducible.
struct HermitianEigenResult {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
};

// Symmetrizes R as (R + R^H)/2 before decomposing. Throws
// std::invalid_argument on non-square input.
HermitianEigenResult hermitian_eig(const Eigen::MatrixXcd& R);

// Unit-norm eigenvector of the largest eigenvalue, phase-fixed as above.
Eigen::VectorXcd principal_eigenvector(const Eigen::MatrixXcd& R);

// Minimizer a of ||S^H a - rhs||_2 for a wide full-row-rank S (K x P,
// P >= K), computed as (S S^H)^{-1} S rhs. Factors S S^H once so the
// Gerchberg-Saxton loop can reuse it.
class RowSpaceSolver {
public:
    explicit RowSpaceSolver(Eigen::MatrixXcd S);

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

    const Eigen::MatrixXcd& matrix() const { return S_; }
    double condition_number() const { return cond_; }

private:
    Eigen::MatrixXcd S_;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt_;
    double cond_;
};

Eigen::VectorXcd least_squares_solve(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& rhs);

}  // namespace qmusic
