#include <benchmark/benchmark.h>

#include <numbers>

#include "qmusic/harness.hpp"
#include "qmusic/measurement.hpp"
#include "qmusic/music.hpp"
#include "qmusic/phase_retrieval.hpp"
#include "qmusic/rng.hpp"
#include "qmusic/scene.hpp"

using namespace qmusic;

namespace {

ScenarioConfig default_config() {
    ScenarioConfig cfg;  // M=32, K=3, P=100, N=50, grid 2^14
    return cfg;
}

void BM_SteeringGridBuild(benchmark::State& state) {
    const ScenarioConfig cfg = default_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(SteeringGrid::build(cfg.geometry(), cfg.grid()));
    }
}
BENCHMARK(BM_SteeringGridBuild);

void BM_CellRecovery(benchmark::State& state) {
    RngStream rng(1, 1);
    const int K = 3, P = 100;
    const Eigen::MatrixXcd S =
        generate_pilots(rng, K, P, PilotKind::unit_modulus_random_phase).entries;
    const Eigen::VectorXcd a = sample_complex_gaussian(rng, K, 1.0);
    const std::complex<double> b = 5.0 * a.norm();
    const Eigen::VectorXd z =
        (S.adjoint() * a + Eigen::VectorXcd::Constant(P, b)).cwiseAbs();
    for (auto _ : state) {
        benchmark::DoNotOptimize(recover_cell_channel(S, b, z, 50));
    }
}
BENCHMARK(BM_CellRecovery);

void BM_Pseudospectrum(benchmark::State& state) {
    const ScenarioConfig cfg = default_config();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    const ArrayGeometry geom = cfg.geometry();
    UserSet users;
    users.angles_rad = {-0.5, 0.0, 0.5};
    users.per_user_power = 1.0 / 3.0;
    RngStream rng(1, 2);
    const ChannelMatrix A = generate_channel(rng, geom, users, AtomicConstants::normalized(),
                                             PolarizationMode::per_user);
    const SubspaceSplit split =
        subspace_split(channel_covariance(A.entries.conjugate(), cfg.P), cfg.K);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pseudospectrum(split, steering));
    }
}
BENCHMARK(BM_Pseudospectrum);

void BM_QuantumTrial(benchmark::State& state) {
    const ScenarioConfig cfg = default_config();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    std::uint32_t trial = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trial(cfg, 0, trial++, Method::quantum_music, steering));
    }
}
BENCHMARK(BM_QuantumTrial);

void BM_RfTrial(benchmark::State& state) {
    const ScenarioConfig cfg = default_config();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    std::uint32_t trial = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trial(cfg, 0, trial++, Method::rf_music, steering));
    }
}
BENCHMARK(BM_RfTrial);

}  // namespace

BENCHMARK_MAIN();
