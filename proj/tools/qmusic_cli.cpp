// Command-line front end for the Quantum-MUSIC simulator.
//
// Subcommands:
//   spectrum    pseudospectrum dump, one seeded realization per K
//   rmse-power  RMSE vs transmit power, quantum vs RF
//   rmse-users  RMSE vs number of users
//   trial       single verbose end-to-end run
//   selftest    quick invariant suite
//
// Exit codes: 0 success, 1 invalid config, 2 numerical failure, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmusic/errors.hpp"
#include "qmusic/harness.hpp"
#include "qmusic/phase_retrieval.hpp"

using namespace qmusic;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out_path;
    std::string format = "csv";
    std::optional<int> workers;
    std::string method = "both";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_method = true) {
    cmd->add_option("--config", args.config_path, "Scenario config file (key = value)");
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--trials", args.trials, "Monte-Carlo trials per sweep point");
    cmd->add_option("--out", args.out_path, "Output file (default: stdout)");
    cmd->add_option("--format", args.format, "Output format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--workers", args.workers, "Worker thread count (env QMUSIC_WORKERS)");
    if (with_method)
        cmd->add_option("--method", args.method, "quantum|rf|both")
            ->check(CLI::IsMember({"quantum", "rf", "both"}));
}

ScenarioConfig make_config(const CommonArgs& args) {
    ScenarioConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.trials) cfg.trials = *args.trials;
    if (args.workers) cfg.workers = *args.workers;
    cfg.validate();
    return cfg;
}

std::vector<Method> pick_methods(const std::string& name) {
    if (name == "quantum") return {Method::quantum_music};
    if (name == "rf") return {Method::rf_music};
    return {Method::quantum_music, Method::rf_music};
}

OutputFormat pick_format(const std::string& name) {
    return name == "jsonl" ? OutputFormat::jsonl : OutputFormat::csv;
}

void deliver(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

int run_verbose_trial(const ScenarioConfig& cfg, const std::vector<Method>& methods) {
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    for (Method m : methods) {
        const TrialResult r = run_trial(cfg, 0, 0, m, steering);
        std::printf("method: %s\n", method_name(m));
        std::printf("  %-12s %-12s %s\n", "truth_deg", "estimate_deg", "error_deg");
        for (std::size_t k = 0; k < r.truth_deg.size(); ++k)
            std::printf("  %-12.6f %-12.6f %+.6f\n", r.truth_deg[k], r.estimate_deg[k],
                        r.estimate_deg[k] - r.truth_deg[k]);
        const double e = std::sqrt(trial_mse(r.estimate_deg, r.truth_deg, cfg.optimal_pairing));
        std::printf("  per-trial rmse: %.6f deg%s\n", e, r.flagged ? "  [flagged: padded peaks]" : "");
    }
    return 0;
}

int run_selftest(const ScenarioConfig& base) {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    // Deterministic streams.
    {
        RngStream a(42, 7), b(42, 7);
        bool ok = true;
        for (int i = 0; i < 64; ++i) ok = ok && a.next_u64() == b.next_u64();
        check("rng determinism", ok);
    }
    // Steering vector normalization.
    {
        const ArrayGeometry geom = ArrayGeometry::ula(16, 0.5);
        bool ok = true;
        for (double deg : {35.0, 90.0, 144.0})
            ok = ok && std::abs(steering_vector(deg * std::numbers::pi / 180.0, geom).norm() - 1.0) < 1e-12;
        check("steering vector unit norm", ok);
    }
    // GS descent on a handful of random instances.
    {
        bool ok = true;
        for (int inst = 0; inst < 20 && ok; ++inst) {
            RngStream rng(base.seed, 900 + inst);
            const int K = 1 + inst % 4, P = 50;
            PilotMatrix S = generate_pilots(rng, K, P, PilotKind::unit_modulus_random_phase);
            Eigen::VectorXcd a_true = sample_complex_gaussian(rng, K, 1.0);
            const std::complex<double> b_m = 5.0 * std::polar(1.0, rng.next_uniform(0.0, 6.28));
            Eigen::VectorXcd interior = S.entries.adjoint() * a_true;
            Eigen::VectorXd z(P);
            for (int p = 0; p < P; ++p)
                z[p] = std::abs(interior[p] + b_m + rng.next_complex_gaussian(0.01));
            const RowSpaceSolver solver(S.entries);
            GsState state;
            state.a = spectral_init(make_expanded_system(S.entries, b_m), z);
            state.objective = 1e300;
            for (int n = 0; n < 30; ++n) {
                const GsState next = gs_step(state, solver, b_m, z);
                if (next.objective > state.objective + 1e-12) ok = false;
                state = next;
            }
        }
        check("gs objective descent", ok);
    }
    // Noiseless end-to-end pipeline.
    {
        ScenarioConfig cfg = base;
        cfg.K = 3;
        cfg.sigma_n_sq = 0.0;
        cfg.sigma_t_sq = 0.0;
        const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
        bool ok = true;
        for (Method m : {Method::quantum_music, Method::rf_music}) {
            const TrialResult r = run_trial(cfg, 0, 1, m, steering);
            for (std::size_t k = 0; k < r.truth_deg.size(); ++k)
                if (std::abs(r.estimate_deg[k] - r.truth_deg[k]) >
                    1.5 * cfg.grid().step() * 180.0 / std::numbers::pi)
                    ok = false;
        }
        check("noiseless pipeline hits grid resolution", ok);
    }
    // Reproducible trials.
    {
        const SteeringGrid steering = SteeringGrid::build(base.geometry(), base.grid());
        const TrialResult r1 = run_trial(base, 3, 5, Method::quantum_music, steering);
        const TrialResult r2 = run_trial(base, 3, 5, Method::quantum_music, steering);
        check("trial reproducibility", r1.estimate_deg == r2.estimate_deg &&
                                           r1.truth_deg == r2.truth_deg);
    }

    std::printf("%s\n", failures == 0 ? "selftest: all checks passed" : "selftest: FAILURES");
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-MUSIC: multi-user AoA estimation from magnitude-only atomic-receiver measurements"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, power_args, users_args, trial_args, selftest_args;
    CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "Pseudospectrum dump per K");
    add_common(cmd_spectrum, spectrum_args, false);
    CLI::App* cmd_power = app.add_subcommand("rmse-power", "RMSE vs transmit power sweep");
    add_common(cmd_power, power_args);
    CLI::App* cmd_users = app.add_subcommand("rmse-users", "RMSE vs user count sweep");
    add_common(cmd_users, users_args);
    CLI::App* cmd_trial = app.add_subcommand("trial", "Single verbose run");
    add_common(cmd_trial, trial_args);
    CLI::App* cmd_selftest = app.add_subcommand("selftest", "Quick invariant suite");
    add_common(cmd_selftest, selftest_args, false);

    try {
        app.parse(argc, argv);

        if (cmd_spectrum->parsed()) {
            const ScenarioConfig cfg = make_config(spectrum_args);
            deliver(format_spectra(run_spectrum_dump(cfg), pick_format(spectrum_args.format)),
                    spectrum_args.out_path);
        } else if (cmd_power->parsed()) {
            const ScenarioConfig cfg = make_config(power_args);
            deliver(format_records(run_power_sweep(cfg, pick_methods(power_args.method)),
                                   pick_format(power_args.format)),
                    power_args.out_path);
        } else if (cmd_users->parsed()) {
            const ScenarioConfig cfg = make_config(users_args);
            deliver(format_records(run_user_sweep(cfg, pick_methods(users_args.method)),
                                   pick_format(users_args.format)),
                    users_args.out_path);
        } else if (cmd_trial->parsed()) {
            return run_verbose_trial(make_config(trial_args), pick_methods(trial_args.method));
        } else if (cmd_selftest->parsed()) {
            return run_selftest(make_config(selftest_args));
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
