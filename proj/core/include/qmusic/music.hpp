#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qmusic/linalg.hpp"
#include "qmusic/measurement.hpp"
#include "qmusic/scene.hpp"

namespace qmusic {

struct SubspaceSplit {
    Eigen::MatrixXcd signal_basis;  // M x K
    Eigen::MatrixXcd noise_basis;   // M x (M-K)
    Eigen::VectorXd eigenvalues;    // descending
};

// Uniform angular grid, endpoints inclusive.
struct AngleGrid {
    double min_rad = 0.0;
    double max_rad = 0.0;
    int size = 2;

    double angle(int i) const {
        return min_rad + (max_rad - min_rad) * static_cast<double>(i) / (size - 1);
    }
    double step() const { return (max_rad - min_rad) / (size - 1); }

    void validate() const;
};

struct Pseudospectrum {
    AngleGrid grid;
    Eigen::VectorXd values;  // positive, denominator clamped at 1e-12
};

struct AoAEstimate {
    std::vector<double> angles_rad;  // exactly K, ascending
    bool padded = false;             // fewer than K local maxima were found
};

// Precomputed steering vectors for every grid angle (G x M); reused
// across trials sharing a geometry and grid.
struct SteeringGrid {
    AngleGrid grid;
    Eigen::MatrixXcd rows;  // row i = a(theta_i)^T

    static SteeringGrid build(const ArrayGeometry& geom, const AngleGrid& grid);
};

// (1/P) A_hat A_hat^H, exactly as the recovery pipeline defines it.
Eigen::MatrixXcd channel_covariance(const Eigen::MatrixXcd& A_hat, int P);

// Sample covariance (1/P) Y Y^H of an RF snapshot panel.
Eigen::MatrixXcd snapshot_covariance(const ComplexPanel& Y);

// Top-K eigenvectors form the signal basis, the rest the noise basis.
// Requires 1 <= K < M.
SubspaceSplit subspace_split(const Eigen::MatrixXcd& R, int K);

Pseudospectrum pseudospectrum(const SubspaceSplit& split, const SteeringGrid& steering);
Pseudospectrum pseudospectrum(const SubspaceSplit& split, const ArrayGeometry& geom,
                              const AngleGrid& grid);

// K highest strict local maxima, ascending by angle. Plateaus resolve to
// their leftmost index; endpoints compare against their single neighbor.
// If fewer than K maxima exist the result is padded with the highest
// remaining grid values and flagged.
AoAEstimate find_peaks(const Pseudospectrum& spec, int K);

AoAEstimate estimate_aoa_from_channel(const Eigen::MatrixXcd& A_hat, int K, int P,
                                      const SteeringGrid& steering);
AoAEstimate estimate_aoa_from_snapshots(const ComplexPanel& Y, int K,
                                        const SteeringGrid& steering);

}  // namespace qmusic
