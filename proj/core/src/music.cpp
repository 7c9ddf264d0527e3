#include "qmusic/music.hpp"

#include <algorithm>
#include <sstream>

#include "qmusic/errors.hpp"

namespace qmusic {

void AngleGrid::validate() const {
    if (size < 2) throw std::invalid_argument("AngleGrid: need at least 2 grid points");
    if (!(max_rad > min_rad)) throw std::invalid_argument("AngleGrid: empty angle range");
}

SteeringGrid SteeringGrid::build(const ArrayGeometry& geom, const AngleGrid& grid) {
    grid.validate();
    geom.validate();
    SteeringGrid out;
    out.grid = grid;
    out.rows.resize(grid.size, geom.element_count);
    for (int i = 0; i < grid.size; ++i)
        out.rows.row(i) = steering_vector(grid.angle(i), geom).transpose();
    return out;
}

Eigen::MatrixXcd channel_covariance(const Eigen::MatrixXcd& A_hat, int P) {
    if (P < 1) throw std::invalid_argument("channel_covariance: P must be >= 1");
    return (A_hat * A_hat.adjoint()) / static_cast<double>(P);
}

Eigen::MatrixXcd snapshot_covariance(const ComplexPanel& Y) {
    if (Y.cols() < 1) throw std::invalid_argument("snapshot_covariance: P must be >= 1");
    return (Y * Y.adjoint()) / static_cast<double>(Y.cols());
}

SubspaceSplit subspace_split(const Eigen::MatrixXcd& R, int K) {
    const Eigen::Index M = R.rows();
    if (K < 1 || K >= M) {
        std::ostringstream msg;
        msg << "subspace_split: need 1 <= K < M, got K=" << K << " M=" << M
            << " (no noise subspace otherwise)";
        throw std::invalid_argument(msg.str());
    }
    const HermitianEigenResult eig = hermitian_eig(R);
    SubspaceSplit split;
    split.eigenvalues = eig.eigenvalues;
    split.signal_basis = eig.eigenvectors.leftCols(K);
    split.noise_basis = eig.eigenvectors.rightCols(M - K);
    return split;
}

Pseudospectrum pseudospectrum(const SubspaceSplit& split, const SteeringGrid& steering) {
    constexpr double kDenominatorClamp = 1e-12;

    Pseudospectrum spec;
    spec.grid = steering.grid;
    // ||U_N^H a(theta)||^2 for the whole grid in one product.
    const Eigen::MatrixXcd proj = steering.rows.conjugate() * split.noise_basis;
    spec.values = proj.rowwise().squaredNorm().cwiseMax(kDenominatorClamp).cwiseInverse();
    return spec;
}

Pseudospectrum pseudospectrum(const SubspaceSplit& split, const ArrayGeometry& geom,
                              const AngleGrid& grid) {
    return pseudospectrum(split, SteeringGrid::build(geom, grid));
}

AoAEstimate find_peaks(const Pseudospectrum& spec, int K) {
    const Eigen::VectorXd& v = spec.values;
    const int G = static_cast<int>(v.size());
    if (G <= 2 * K) throw std::invalid_argument("find_peaks: grid too small for K peaks");

    struct Peak {
        int index;
        double value;
    };
    std::vector<Peak> peaks;
    int i = 0;
    while (i < G) {
        // Leftmost index of a run of equal values.
        int j = i;
        while (j + 1 < G && v[j + 1] == v[i]) ++j;
        const bool rises_left = (i == 0) || (v[i] > v[i - 1]);
        const bool falls_right = (j == G - 1) || (v[i] > v[j + 1]);
        // A flat run spanning the whole grid has no peak.
        const bool interior_plateau = (i == 0 && j == G - 1);
        if (rises_left && falls_right && !interior_plateau) {
            peaks.push_back({i, v[i]});
        }
        i = j + 1;
    }

    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.value > b.value; });

    AoAEstimate out;
    std::vector<int> chosen;
    for (int k = 0; k < K && k < static_cast<int>(peaks.size()); ++k) chosen.push_back(peaks[k].index);

    if (static_cast<int>(chosen.size()) < K) {
        // Not enough local maxima: pad with the highest remaining grid
        // values and flag the estimate.
        out.padded = true;
        std::vector<int> rest;
        rest.reserve(G);
        for (int g = 0; g < G; ++g)
            if (std::find(chosen.begin(), chosen.end(), g) == chosen.end()) rest.push_back(g);
        std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return v[a] > v[b]; });
        for (int r = 0; static_cast<int>(chosen.size()) < K; ++r) chosen.push_back(rest[r]);
    }

    out.angles_rad.reserve(K);
    for (int idx : chosen) out.angles_rad.push_back(spec.grid.angle(idx));
    std::sort(out.angles_rad.begin(), out.angles_rad.end());
    return out;
}

AoAEstimate estimate_aoa_from_channel(const Eigen::MatrixXcd& A_hat, int K, int P,
                                      const SteeringGrid& steering) {
    const Eigen::MatrixXcd R = channel_covariance(A_hat, P);
    return find_peaks(pseudospectrum(subspace_split(R, K), steering), K);
}

AoAEstimate estimate_aoa_from_snapshots(const ComplexPanel& Y, int K,
                                        const SteeringGrid& steering) {
    const Eigen::MatrixXcd R = snapshot_covariance(Y);
    return find_peaks(pseudospectrum(subspace_split(R, K), steering), K);
}

}  // namespace qmusic
