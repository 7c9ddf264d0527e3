#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qmusic/measurement.hpp"
#include "qmusic/rng.hpp"
#include "qmusic/scene.hpp"

using namespace qmusic;
using Cplx = std::complex<double>;

namespace {

ChannelMatrix channel_from(const Eigen::MatrixXcd& entries) {
    ChannelMatrix A;
    A.entries = entries;
    return A;
}

PilotMatrix pilots_from(const Eigen::MatrixXcd& entries) {
    PilotMatrix S;
    S.entries = entries;
    return S;
}

BiasVector bias_from(const Eigen::VectorXcd& entries) {
    BiasVector b;
    b.entries = entries;
    return b;
}

}  // namespace

TEST_CASE("generate_pilots: unit-modulus entries and full row rank") {
    RngStream rng(1, 1);
    const PilotMatrix tiny = generate_pilots(rng, 1, 1, PilotKind::unit_modulus_random_phase);
    CHECK(std::abs(std::abs(tiny.entries(0, 0)) - 1.0) <= 1e-15);

    RngStream rng2(1, 2);
    const PilotMatrix S = generate_pilots(rng2, 3, 100, PilotKind::unit_modulus_random_phase);
    for (int k = 0; k < 3; ++k)
        for (int p = 0; p < 100; ++p) CHECK(std::abs(std::abs(S.entries(k, p)) - 1.0) <= 1e-15);
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S.entries);
    CHECK(svd.singularValues()[2] > 1e-6 * svd.singularValues()[0]);
    // conditioning contract on S S^H
    const double cond = std::pow(svd.singularValues()[0] / svd.singularValues()[2], 2);
    CHECK(cond <= 1e6);
}

TEST_CASE("generate_pilots: gaussian kind has unit entry variance") {
    RngStream rng(1, 3);
    const PilotMatrix S = generate_pilots(rng, 2, 5000, PilotKind::complex_gaussian);
    const double m2 = S.entries.squaredNorm() / static_cast<double>(S.entries.size());
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("generate_pilots: underdetermined request rejected, determinism holds") {
    RngStream rng(1, 4);
    CHECK_THROWS_AS(generate_pilots(rng, 5, 3, PilotKind::unit_modulus_random_phase),
                    std::invalid_argument);
    RngStream a(1, 5), b(1, 5);
    CHECK(generate_pilots(a, 2, 10, PilotKind::complex_gaussian).entries ==
          generate_pilots(b, 2, 10, PilotKind::complex_gaussian).entries);
}

TEST_CASE("quantum synthesis: degenerate and hand-evaluated panels") {
    RngStream rng(2, 1);
    const NoiseModel quiet{0.0, 0.0};

    const auto zero = synth_quantum_measurements(channel_from(Eigen::MatrixXcd::Zero(3, 2)),
                                                 pilots_from(Eigen::MatrixXcd::Ones(2, 4)),
                                                 bias_from(Eigen::VectorXcd::Zero(3)), quiet, rng);
    CHECK(zero.norm() == 0.0);

    Eigen::MatrixXcd a(1, 1);
    a(0, 0) = Cplx(3.0, 4.0);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Ones(1, 1);
    const auto z5 = synth_quantum_measurements(channel_from(a), pilots_from(s),
                                               bias_from(Eigen::VectorXcd::Zero(1)), quiet, rng);
    CHECK(z5(0, 0) == doctest::Approx(5.0));

    Eigen::VectorXcd b(1);
    b[0] = Cplx(10.0, 0.0);
    const auto z = synth_quantum_measurements(channel_from(a), pilots_from(s), bias_from(b), quiet, rng);
    CHECK(z(0, 0) == doctest::Approx(std::sqrt(185.0)));
}

TEST_CASE("quantum synthesis: dimension mismatches are named") {
    RngStream rng(2, 2);
    const NoiseModel quiet{0.0, 0.0};
    CHECK_THROWS_WITH_AS(
        synth_quantum_measurements(channel_from(Eigen::MatrixXcd::Zero(3, 2)),
                                   pilots_from(Eigen::MatrixXcd::Ones(3, 4)),
                                   bias_from(Eigen::VectorXcd::Zero(3)), quiet, rng),
        doctest::Contains("users"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        synth_quantum_measurements(channel_from(Eigen::MatrixXcd::Zero(3, 2)),
                                   pilots_from(Eigen::MatrixXcd::Ones(2, 4)),
                                   bias_from(Eigen::VectorXcd::Zero(4)), quiet, rng),
        doctest::Contains("bias"), std::invalid_argument);
}

TEST_CASE("quantum synthesis: global unit-modulus factor is invisible") {
    RngStream rng(2, 3), rng_pilots(2, 4);
    const ArrayGeometry geom = ArrayGeometry::ula(6, 0.5);
    UserSet users;
    users.angles_rad = {0.2, -0.5};
    ChannelMatrix A = generate_channel(rng, geom, users, AtomicConstants::normalized(),
                                       PolarizationMode::per_user);
    const PilotMatrix S = generate_pilots(rng_pilots, 2, 20, PilotKind::unit_modulus_random_phase);
    BiasVector b;
    b.entries = Eigen::VectorXcd::Constant(6, Cplx(2.0, 1.0));
    const NoiseModel quiet{0.0, 0.0};

    RngStream n1(2, 5), n2(2, 5);
    const auto z1 = synth_quantum_measurements(A, S, b, quiet, n1);
    const Cplx rot = std::polar(1.0, 1.234);
    ChannelMatrix A2 = A;
    A2.entries *= rot;
    BiasVector b2 = b;
    b2.entries *= rot;
    const auto z2 = synth_quantum_measurements(A2, S, b2, quiet, n2);
    CHECK((z1 - z2).norm() <= 1e-12 * z1.norm());
}

TEST_CASE("quantum synthesis: bias shifts magnitudes by at most |b_m|") {
    RngStream rng(2, 6), rng_pilots(2, 7);
    const ArrayGeometry geom = ArrayGeometry::ula(5, 0.5);
    UserSet users;
    users.angles_rad = {0.3};
    const ChannelMatrix A = generate_channel(rng, geom, users, AtomicConstants::normalized(),
                                             PolarizationMode::per_user);
    const PilotMatrix S = generate_pilots(rng_pilots, 1, 15, PilotKind::unit_modulus_random_phase);
    const NoiseModel quiet{0.0, 0.0};

    RngStream rb(2, 8);
    const BiasVector b = generate_bias(rb, geom, 3.0, 1.0);
    RngStream n1(2, 9), n2(2, 9);
    const auto with_bias = synth_quantum_measurements(A, S, b, quiet, n1);
    const auto without = synth_quantum_measurements(A, S, bias_from(Eigen::VectorXcd::Zero(5)),
                                                    quiet, n2);
    for (int m = 0; m < 5; ++m)
        for (int p = 0; p < 15; ++p)
            CHECK(std::abs(with_bias(m, p) - without(m, p)) <= std::abs(b.entries[m]) + 1e-12);
}

TEST_CASE("rf synthesis: zero channel, loop oracle, determinism") {
    RngStream rng(3, 1);
    const NoiseModel quiet{0.0, 0.0};
    const auto zero = synth_rf_snapshots(channel_from(Eigen::MatrixXcd::Zero(3, 2)),
                                         pilots_from(Eigen::MatrixXcd::Ones(2, 4)), quiet, rng);
    CHECK(zero.norm() == 0.0);

    RngStream rng_a(3, 2), rng_s(3, 3);
    const ArrayGeometry geom = ArrayGeometry::ula(4, 0.5);
    UserSet users;
    users.angles_rad = {0.1, -0.7};
    const ChannelMatrix A = generate_channel(rng_a, geom, users, AtomicConstants::normalized(),
                                             PolarizationMode::per_user);
    const PilotMatrix S = generate_pilots(rng_s, 2, 9, PilotKind::unit_modulus_random_phase);
    RngStream n(3, 4);
    const auto Y = synth_rf_snapshots(A, S, quiet, n);
    // receiver-side snapshots: Y[m,p] = conj(s_p^H a_m) = a_m^H s_p
    for (int m = 0; m < 4; ++m)
        for (int p = 0; p < 9; ++p) {
            Cplx acc = 0.0;
            for (int k = 0; k < 2; ++k) acc += std::conj(A.entries(m, k)) * S.entries(k, p);
            CHECK(std::abs(Y(m, p) - acc) <= 1e-12);
        }

    const NoiseModel noisy{0.0, 0.5};
    RngStream n1(3, 5), n2(3, 5);
    CHECK(synth_rf_snapshots(A, S, noisy, n1) == synth_rf_snapshots(A, S, noisy, n2));
}

TEST_CASE("quantum and rf paths share the envelope statistics when unbiased") {
    RngStream rng_a(3, 6), rng_s(3, 7);
    const ArrayGeometry geom = ArrayGeometry::ula(8, 0.5);
    UserSet users;
    users.angles_rad = {0.4};
    const ChannelMatrix A = generate_channel(rng_a, geom, users, AtomicConstants::normalized(),
                                             PolarizationMode::per_user);
    const PilotMatrix S = generate_pilots(rng_s, 1, 2000, PilotKind::unit_modulus_random_phase);
    const NoiseModel matched{0.25, 0.25};
    RngStream n1(3, 8), n2(3, 8);
    const auto z = synth_quantum_measurements(A, S, bias_from(Eigen::VectorXcd::Zero(8)), matched, n1);
    const auto y = synth_rf_snapshots(A, S, matched, n2);
    const double mz = z.squaredNorm() / z.size();
    const double my = y.cwiseAbs().squaredNorm() / y.size();
    CHECK(mz == doctest::Approx(my).epsilon(0.05));
}

TEST_CASE("noise model rejects negative powers") {
    CHECK_THROWS_AS((NoiseModel{-1.0, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NoiseModel{0.0, -1.0}.validate()), std::invalid_argument);
}
