#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmusic/measurement.hpp"
#include "qmusic/music.hpp"
#include "qmusic/scene.hpp"

namespace qmusic {

enum class Method { quantum_music, rf_music };

const char* method_name(Method m);

// Complete experiment description. Field names match the config-file keys.
struct ScenarioConfig {
    int M = 32;
    int K = 3;
    int P = 100;
    int N = 50;                    // GS iterations
    int grid_size = 1 << 14;
    double angle_range_min_deg = 30.0;
    double angle_range_max_deg = 150.0;
    double sigma_s_sq = 1e-18;     // total transmit power
    double sigma_n_sq = 7.943282347242789e-20;  // QSN, -191 dBm
    double sigma_t_sq = 2.5118864315095718e-18; // JNTN, -176 dBm
    double d_over_lambda = 0.5;
    double alpha = 1.0;
    double bias_ratio = 5.0;
    PilotKind pilot_kind = PilotKind::unit_modulus_random_phase;
    PolarizationMode polarization_mode = PolarizationMode::per_user;
    int trials = 200;              // desk-scale default; the full study uses 2000
    std::uint64_t seed = 1;
    double min_separation_deg = 2.0;
    bool optimal_pairing = false;  // RMSE pairing: ascending sort by default
    int workers = 0;               // 0 -> QMUSIC_WORKERS env, else 1

    // Sweep definitions (Figs. of merit).
    std::vector<double> power_sweep_dbm = {-190, -185, -180, -175, -170, -165, -160};
    std::vector<int> user_sweep_k = {1, 2, 3, 4};
    std::vector<int> spectrum_k = {1, 2, 3, 4};
    double spectrum_snr_db = 10.0;

    ArrayGeometry geometry() const { return ArrayGeometry::ula(M, d_over_lambda); }
    AngleGrid grid() const;
    int effective_workers() const;

    void validate() const;
};

// "key = value" text with dotted nesting; powers accept a dBm suffix.
ScenarioConfig load_config(const std::string& path);
void apply_config_line(ScenarioConfig& cfg, const std::string& key, const std::string& value);

// "-191dBm" -> 10^-19.1, plain numbers pass through as linear power.
double parse_power(const std::string& text);

struct TrialResult {
    std::vector<double> truth_deg;     // ascending
    std::vector<double> estimate_deg;  // ascending, exactly K
    bool flagged = false;              // peak search had to pad
};

struct RmseRecord {
    std::string sweep_var;
    double sweep_value = 0.0;
    Method method = Method::quantum_music;
    int K = 0, M = 0, P = 0, N = 0;
    double sigma_s_sq = 0.0, sigma_n_sq = 0.0, sigma_t_sq = 0.0;
    int trials = 0;
    double rmse_deg = 0.0;
    int flagged_trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> per_trial_mse;  // diagnostics only, not serialized
};

struct SpectrumTable {
    int K = 0;
    std::vector<double> truth_deg;
    Pseudospectrum spectrum;
};

// Eq.-style RMSE in degrees: within-trial angles paired by ascending sort
// (or optimal assignment), then sqrt((1/(QK)) sum |err|^2).
double rmse(const std::vector<std::vector<double>>& estimates,
            const std::vector<std::vector<double>>& truths, bool optimal_pairing = false);
double trial_mse(const std::vector<double>& estimate, const std::vector<double>& truth,
                 bool optimal_pairing = false);

// One end-to-end Monte-Carlo draw. Deterministic given (cfg.seed,
// sweep_tag, trial_id); the scene streams do not depend on the method, so
// both receivers see the same channel, pilots, and angles.
TrialResult run_trial(const ScenarioConfig& cfg, std::uint32_t sweep_tag, std::uint32_t trial_id,
                      Method method, const SteeringGrid& steering,
                      std::optional<double> scale_to_snr_db = std::nullopt);

std::vector<RmseRecord> run_power_sweep(const ScenarioConfig& cfg, const std::vector<Method>& methods);
std::vector<RmseRecord> run_user_sweep(const ScenarioConfig& cfg, const std::vector<Method>& methods);

// One seeded realization per K, full pseudospectrum grid.
std::vector<SpectrumTable> run_spectrum_dump(const ScenarioConfig& cfg);

enum class OutputFormat { csv, jsonl };

std::string format_records(const std::vector<RmseRecord>& records, OutputFormat format);
std::string format_spectra(const std::vector<SpectrumTable>& spectra, OutputFormat format);
std::vector<RmseRecord> parse_records(const std::string& text, OutputFormat format);

// Throws IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

// Deterministic worker pool: results are aggregated by index, so output
// is identical for every worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace qmusic
