#include "qmusic/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cctype>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qmusic/errors.hpp"
#include "qmusic/phase_retrieval.hpp"
#include "qmusic/rng.hpp"

namespace qmusic {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Configured angles put broadside at 90 degrees so the [30, 150] range is
// unambiguous for a half-wavelength ULA; the steering manifold works in
// broadside-relative radians internally.
constexpr double kBroadsideDeg = 90.0;

double to_internal_rad(double configured_deg) { return (configured_deg - kBroadsideDeg) / kDegPerRad; }
double to_configured_deg(double internal_rad) { return internal_rad * kDegPerRad + kBroadsideDeg; }

enum StreamPurpose : std::uint64_t {
    kAngles = 1,
    kPolarization = 2,
    kPilots = 3,
    kBias = 4,
    kQuantumNoise = 5,
    kRfNoise = 6,
};

std::uint64_t stream_id(std::uint32_t sweep_tag, std::uint32_t trial, StreamPurpose purpose) {
    return (static_cast<std::uint64_t>(sweep_tag) << 40) |
           (static_cast<std::uint64_t>(trial) << 8) | static_cast<std::uint64_t>(purpose);
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

const char* method_name(Method m) {
    return m == Method::quantum_music ? "quantum_music" : "rf_music";
}

AngleGrid ScenarioConfig::grid() const {
    AngleGrid g;
    g.min_rad = to_internal_rad(angle_range_min_deg);
    g.max_rad = to_internal_rad(angle_range_max_deg);
    g.size = grid_size;
    return g;
}

int ScenarioConfig::effective_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("QMUSIC_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void ScenarioConfig::validate() const {
    if (M < 1 || K < 1 || P < 1 || N < 0 || trials < 1 || grid_size < 2)
        throw std::invalid_argument("config: counts must be positive");
    if (K >= M) throw std::invalid_argument("config: need K < M for a noise subspace");
    if (P < K) throw std::invalid_argument("config: need P >= K pilot snapshots");
    if (!(angle_range_min_deg > 0.0 && angle_range_max_deg < 180.0 &&
          angle_range_min_deg < angle_range_max_deg))
        throw std::invalid_argument("config: angle range must lie within (0, 180) degrees");
    if (sigma_s_sq <= 0.0) throw std::invalid_argument("config: sigma_s_sq must be > 0");
    if (sigma_n_sq < 0.0 || sigma_t_sq < 0.0)
        throw std::invalid_argument("config: noise powers must be >= 0");
    if (d_over_lambda <= 0.0) throw std::invalid_argument("config: d_over_lambda must be > 0");
    if (bias_ratio < 0.0) throw std::invalid_argument("config: bias_ratio must be >= 0");
    if (min_separation_deg < 0.0)
        throw std::invalid_argument("config: min_separation_deg must be >= 0");
}

double parse_power(const std::string& text) {
    std::string t = text;
    bool dbm = false;
    if (t.size() > 3) {
        std::string suffix = t.substr(t.size() - 3);
        for (auto& c : suffix) c = static_cast<char>(std::tolower(c));
        if (suffix == "dbm") {
            dbm = true;
            t = t.substr(0, t.size() - 3);
        }
    }
    std::size_t pos = 0;
    double value;
    try {
        value = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: cannot parse power value '" + text + "'");
    }
    while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
    if (pos != t.size()) throw std::invalid_argument("config: cannot parse power value '" + text + "'");
    return dbm ? std::pow(10.0, value / 10.0) : value;
}

namespace {

std::vector<double> parse_double_list(const std::string& value, bool as_power) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        std::istringstream ws(item);
        std::string tok;
        while (ws >> tok) out.push_back(as_power ? parse_power(tok) : std::stod(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (double x : parse_double_list(value, false)) out.push_back(static_cast<int>(x));
    return out;
}

}  // namespace

void apply_config_line(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "M") cfg.M = std::stoi(value);
        else if (key == "K") cfg.K = std::stoi(value);
        else if (key == "P") cfg.P = std::stoi(value);
        else if (key == "N") cfg.N = std::stoi(value);
        else if (key == "grid_size") cfg.grid_size = std::stoi(value);
        else if (key == "angle_range.min_deg") cfg.angle_range_min_deg = std::stod(value);
        else if (key == "angle_range.max_deg") cfg.angle_range_max_deg = std::stod(value);
        else if (key == "sigma_s_sq") cfg.sigma_s_sq = parse_power(value);
        else if (key == "sigma_n_sq") cfg.sigma_n_sq = parse_power(value);
        else if (key == "sigma_t_sq") cfg.sigma_t_sq = parse_power(value);
        else if (key == "d_over_lambda") cfg.d_over_lambda = std::stod(value);
        else if (key == "alpha") cfg.alpha = std::stod(value);
        else if (key == "bias_ratio") cfg.bias_ratio = std::stod(value);
        else if (key == "trials") cfg.trials = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "min_separation_deg") cfg.min_separation_deg = std::stod(value);
        else if (key == "workers") cfg.workers = std::stoi(value);
        else if (key == "spectrum_snr_db") cfg.spectrum_snr_db = std::stod(value);
        else if (key == "power_sweep_dbm") cfg.power_sweep_dbm = parse_double_list(value, false);
        else if (key == "user_sweep_k") cfg.user_sweep_k = parse_int_list(value);
        else if (key == "spectrum_k") cfg.spectrum_k = parse_int_list(value);
        else if (key == "pilot_kind") {
            if (value == "unit_modulus_random_phase") cfg.pilot_kind = PilotKind::unit_modulus_random_phase;
            else if (value == "complex_gaussian") cfg.pilot_kind = PilotKind::complex_gaussian;
            else throw std::invalid_argument("config: unknown pilot_kind '" + value + "'");
        } else if (key == "polarization_mode") {
            if (value == "per_user") cfg.polarization_mode = PolarizationMode::per_user;
            else if (value == "per_cell") cfg.polarization_mode = PolarizationMode::per_cell;
            else throw std::invalid_argument("config: unknown polarization_mode '" + value + "'");
        } else if (key == "pairing") {
            if (value == "sort") cfg.optimal_pairing = false;
            else if (value == "optimal") cfg.optimal_pairing = true;
            else throw std::invalid_argument("config: unknown pairing '" + value + "'");
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: cannot parse value '" + value + "' for key '" + key + "'");
    }
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream check(line);
            std::string tok;
            if (check >> tok) {
                std::ostringstream msg;
                msg << "config: " << path << ":" << lineno << ": expected 'key = value'";
                throw std::invalid_argument(msg.str());
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

double trial_mse(const std::vector<double>& estimate, const std::vector<double>& truth,
                 bool optimal_pairing) {
    if (estimate.size() != truth.size())
        throw std::invalid_argument("rmse: estimate/truth K mismatch within a trial");
    const std::size_t K = truth.size();
    if (K == 0) return 0.0;

    std::vector<double> est = estimate;
    std::vector<double> tru = truth;
    std::sort(est.begin(), est.end());
    std::sort(tru.begin(), tru.end());

    auto cost = [&](const std::vector<double>& e) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += (e[k] - tru[k]) * (e[k] - tru[k]);
        return s;
    };

    double best = cost(est);
    if (optimal_pairing) {
        std::vector<double> perm = est;
        while (std::next_permutation(perm.begin(), perm.end())) best = std::min(best, cost(perm));
    }
    return best / static_cast<double>(K);
}

double rmse(const std::vector<std::vector<double>>& estimates,
            const std::vector<std::vector<double>>& truths, bool optimal_pairing) {
    if (estimates.size() != truths.size())
        throw std::invalid_argument("rmse: estimate/truth trial counts differ");
    if (estimates.empty()) throw std::invalid_argument("rmse: no trials");
    double acc = 0.0;
    for (std::size_t q = 0; q < estimates.size(); ++q)
        acc += trial_mse(estimates[q], truths[q], optimal_pairing);
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

namespace {

std::vector<double> sample_angles(RngStream& rng, const ScenarioConfig& cfg, int K) {
    const double lo = to_internal_rad(cfg.angle_range_min_deg);
    const double hi = to_internal_rad(cfg.angle_range_max_deg);
    const double min_sep = cfg.min_separation_deg / kDegPerRad;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<double> angles(K);
        for (int k = 0; k < K; ++k) angles[k] = rng.next_uniform(lo, hi);
        std::sort(angles.begin(), angles.end());
        bool ok = true;
        for (int k = 0; k + 1 < K; ++k)
            if (angles[k + 1] - angles[k] < min_sep) ok = false;
        if (ok) return angles;
    }
    throw NumericalError("sample_angles: minimum separation cannot be satisfied");
}

struct Scene {
    UserSet users;
    ChannelMatrix A;
    PilotMatrix S;
    BiasVector bias;
    Eigen::MatrixXcd interior;  // noiseless s_p^H a_m panel
};

Scene make_scene(const ScenarioConfig& cfg, std::uint32_t sweep_tag, std::uint32_t trial_id,
                 int K, double sigma_s_sq, std::optional<double> scale_to_snr_db) {
    Scene scene;
    RngStream rng_angles(cfg.seed, stream_id(sweep_tag, trial_id, kAngles));
    RngStream rng_pol(cfg.seed, stream_id(sweep_tag, trial_id, kPolarization));
    RngStream rng_pilots(cfg.seed, stream_id(sweep_tag, trial_id, kPilots));
    RngStream rng_bias(cfg.seed, stream_id(sweep_tag, trial_id, kBias));

    scene.users.angles_rad = sample_angles(rng_angles, cfg, K);
    scene.users.per_user_power = sigma_s_sq / K;
    scene.users.channel_gain = cfg.alpha;

    const ArrayGeometry geom = cfg.geometry();
    scene.A = generate_channel(rng_pol, geom, scene.users, AtomicConstants::normalized(),
                               cfg.polarization_mode);
    scene.S = generate_pilots(rng_pilots, K, cfg.P, cfg.pilot_kind);
    scene.interior = signal_interior(scene.A, scene.S);

    if (scale_to_snr_db) {
        // Rescale the transmit power so the mean per-cell pre-noise signal
        // power sits at the requested SNR above the quantum noise floor.
        const double mean_power = scene.interior.squaredNorm() /
                                  static_cast<double>(scene.interior.size());
        const double target = std::pow(10.0, *scale_to_snr_db / 10.0) * cfg.sigma_n_sq;
        if (mean_power > 0.0) {
            const double c = std::sqrt(target / mean_power);
            scene.A.entries *= c;
            scene.interior *= c;
        }
    }

    double rms = std::sqrt(scene.interior.squaredNorm() / static_cast<double>(scene.interior.size()));
    if (rms <= 0.0) rms = 1.0;  // degenerate all-zero scene; keep the bias finite
    scene.bias = generate_bias(rng_bias, geom, cfg.bias_ratio, rms);
    return scene;
}

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, std::uint32_t sweep_tag, std::uint32_t trial_id,
                      Method method, const SteeringGrid& steering,
                      std::optional<double> scale_to_snr_db) {
    try {
        const Scene scene = make_scene(cfg, sweep_tag, trial_id, cfg.K, cfg.sigma_s_sq,
                                       scale_to_snr_db);
        const NoiseModel noise{cfg.sigma_n_sq, cfg.sigma_t_sq};

        AoAEstimate est;
        if (method == Method::quantum_music) {
            RngStream rng_noise(cfg.seed, stream_id(sweep_tag, trial_id, kQuantumNoise));
            const MagnitudePanel Z =
                synth_quantum_measurements(scene.A, scene.S, scene.bias, noise, rng_noise);
            const Eigen::MatrixXcd A_hat =
                recover_channel_matrix(scene.S, scene.bias, Z, cfg.N);
            est = estimate_aoa_from_channel(A_hat, cfg.K, cfg.P, steering);
        } else {
            RngStream rng_noise(cfg.seed, stream_id(sweep_tag, trial_id, kRfNoise));
            const ComplexPanel Y = synth_rf_snapshots(scene.A, scene.S, noise, rng_noise);
            est = estimate_aoa_from_snapshots(Y, cfg.K, steering);
        }

        TrialResult out;
        out.flagged = est.padded;
        out.truth_deg.reserve(cfg.K);
        for (double a : scene.users.angles_rad) out.truth_deg.push_back(to_configured_deg(a));
        out.estimate_deg.reserve(cfg.K);
        for (double a : est.angles_rad) out.estimate_deg.push_back(to_configured_deg(a));
        std::sort(out.estimate_deg.begin(), out.estimate_deg.end());
        return out;
    } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "trial " << trial_id << " (" << method_name(method) << "): " << e.what();
        throw NumericalError(msg.str());
    }
}

namespace {

RmseRecord run_point(const ScenarioConfig& cfg, const std::string& sweep_var, double sweep_value,
                     std::uint32_t sweep_tag, Method method, const SteeringGrid& steering) {
    const int Q = cfg.trials;
    std::vector<TrialResult> results(Q);
    parallel_for(Q, cfg.effective_workers(), [&](int q) {
        results[q] = run_trial(cfg, sweep_tag, static_cast<std::uint32_t>(q), method, steering);
    });

    RmseRecord rec;
    rec.sweep_var = sweep_var;
    rec.sweep_value = sweep_value;
    rec.method = method;
    rec.K = cfg.K;
    rec.M = cfg.M;
    rec.P = cfg.P;
    rec.N = cfg.N;
    rec.sigma_s_sq = cfg.sigma_s_sq;
    rec.sigma_n_sq = cfg.sigma_n_sq;
    rec.sigma_t_sq = cfg.sigma_t_sq;
    rec.trials = Q;
    rec.seed = cfg.seed;
    rec.per_trial_mse.resize(Q);
    double acc = 0.0;
    for (int q = 0; q < Q; ++q) {
        rec.per_trial_mse[q] =
            trial_mse(results[q].estimate_deg, results[q].truth_deg, cfg.optimal_pairing);
        acc += rec.per_trial_mse[q];
        if (results[q].flagged) ++rec.flagged_trials;
    }
    rec.rmse_deg = std::sqrt(acc / Q);
    return rec;
}

}  // namespace

std::vector<RmseRecord> run_power_sweep(const ScenarioConfig& cfg,
                                        const std::vector<Method>& methods) {
    cfg.validate();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    std::vector<RmseRecord> records;
    for (std::size_t i = 0; i < cfg.power_sweep_dbm.size(); ++i) {
        ScenarioConfig point = cfg;
        point.sigma_s_sq = std::pow(10.0, cfg.power_sweep_dbm[i] / 10.0);
        const std::uint32_t tag = 0x100000u + static_cast<std::uint32_t>(i);
        for (Method m : methods)
            records.push_back(run_point(point, "sigma_s_sq_dbm", cfg.power_sweep_dbm[i], tag, m,
                                        steering));
    }
    return records;
}

std::vector<RmseRecord> run_user_sweep(const ScenarioConfig& cfg,
                                       const std::vector<Method>& methods) {
    cfg.validate();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    std::vector<RmseRecord> records;
    for (std::size_t i = 0; i < cfg.user_sweep_k.size(); ++i) {
        ScenarioConfig point = cfg;
        point.K = cfg.user_sweep_k[i];
        point.validate();
        const std::uint32_t tag = 0x200000u + static_cast<std::uint32_t>(i);
        for (Method m : methods)
            records.push_back(
                run_point(point, "K", static_cast<double>(point.K), tag, m, steering));
    }
    return records;
}

std::vector<SpectrumTable> run_spectrum_dump(const ScenarioConfig& cfg) {
    cfg.validate();
    const SteeringGrid steering = SteeringGrid::build(cfg.geometry(), cfg.grid());
    std::vector<SpectrumTable> tables;
    for (std::size_t i = 0; i < cfg.spectrum_k.size(); ++i) {
        ScenarioConfig point = cfg;
        point.K = cfg.spectrum_k[i];
        point.validate();
        const std::uint32_t tag = 0x300000u + static_cast<std::uint32_t>(i);

        const Scene scene = make_scene(point, tag, 0, point.K, point.sigma_s_sq,
                                       cfg.spectrum_snr_db);
        const NoiseModel noise{point.sigma_n_sq, point.sigma_t_sq};
        RngStream rng_noise(point.seed, stream_id(tag, 0, kQuantumNoise));
        const MagnitudePanel Z =
            synth_quantum_measurements(scene.A, scene.S, scene.bias, noise, rng_noise);
        const Eigen::MatrixXcd A_hat = recover_channel_matrix(scene.S, scene.bias, Z, point.N);
        const Eigen::MatrixXcd R = channel_covariance(A_hat, point.P);

        SpectrumTable table;
        table.K = point.K;
        for (double a : scene.users.angles_rad) table.truth_deg.push_back(to_configured_deg(a));
        table.spectrum = pseudospectrum(subspace_split(R, point.K), steering);
        tables.push_back(std::move(table));
    }
    return tables;
}

std::string format_records(const std::vector<RmseRecord>& records, OutputFormat format) {
    std::ostringstream out;
    if (format == OutputFormat::csv) {
        out << "sweep_var,sweep_value,method,K,M,P,N,sigma_s_sq,sigma_n_sq,sigma_t_sq,"
               "trials,rmse_deg,flagged_trials,seed\n";
        for (const auto& r : records) {
            out << r.sweep_var << ',' << fmt_double(r.sweep_value) << ',' << method_name(r.method)
                << ',' << r.K << ',' << r.M << ',' << r.P << ',' << r.N << ','
                << fmt_double(r.sigma_s_sq) << ',' << fmt_double(r.sigma_n_sq) << ','
                << fmt_double(r.sigma_t_sq) << ',' << r.trials << ',' << fmt_double(r.rmse_deg)
                << ',' << r.flagged_trials << ',' << r.seed << '\n';
        }
    } else {
        for (const auto& r : records) {
            nlohmann::ordered_json j;
            j["sweep_var"] = r.sweep_var;
            j["sweep_value"] = r.sweep_value;
            j["method"] = method_name(r.method);
            j["K"] = r.K;
            j["M"] = r.M;
            j["P"] = r.P;
            j["N"] = r.N;
            j["sigma_s_sq"] = r.sigma_s_sq;
            j["sigma_n_sq"] = r.sigma_n_sq;
            j["sigma_t_sq"] = r.sigma_t_sq;
            j["trials"] = r.trials;
            j["rmse_deg"] = r.rmse_deg;
            j["flagged_trials"] = r.flagged_trials;
            j["seed"] = r.seed;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

std::string format_spectra(const std::vector<SpectrumTable>& spectra, OutputFormat format) {
    std::ostringstream out;
    if (format == OutputFormat::csv) {
        out << "K,theta_deg,p_q_value\n";
        for (const auto& t : spectra)
            for (int i = 0; i < t.spectrum.grid.size; ++i)
                out << t.K << ',' << fmt_double(to_configured_deg(t.spectrum.grid.angle(i))) << ','
                    << fmt_double(t.spectrum.values[i]) << '\n';
    } else {
        for (const auto& t : spectra)
            for (int i = 0; i < t.spectrum.grid.size; ++i) {
                nlohmann::ordered_json j;
                j["K"] = t.K;
                j["theta_deg"] = to_configured_deg(t.spectrum.grid.angle(i));
                j["p_q_value"] = t.spectrum.values[i];
                out << j.dump() << '\n';
            }
    }
    return out.str();
}

std::vector<RmseRecord> parse_records(const std::string& text, OutputFormat format) {
    std::vector<RmseRecord> records;
    std::istringstream in(text);
    std::string line;
    bool header_skipped = (format == OutputFormat::jsonl);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        RmseRecord r;
        if (format == OutputFormat::csv) {
            std::vector<std::string> fields;
            std::istringstream fs(line);
            std::string field;
            while (std::getline(fs, field, ',')) fields.push_back(field);
            if (fields.size() != 14) throw IoError("parse_records: malformed CSV row: " + line);
            r.sweep_var = fields[0];
            r.sweep_value = std::stod(fields[1]);
            r.method = (fields[2] == "quantum_music") ? Method::quantum_music : Method::rf_music;
            r.K = std::stoi(fields[3]);
            r.M = std::stoi(fields[4]);
            r.P = std::stoi(fields[5]);
            r.N = std::stoi(fields[6]);
            r.sigma_s_sq = std::stod(fields[7]);
            r.sigma_n_sq = std::stod(fields[8]);
            r.sigma_t_sq = std::stod(fields[9]);
            r.trials = std::stoi(fields[10]);
            r.rmse_deg = std::stod(fields[11]);
            r.flagged_trials = std::stoi(fields[12]);
            r.seed = std::stoull(fields[13]);
        } else {
            const auto j = nlohmann::json::parse(line);
            r.sweep_var = j.at("sweep_var").get<std::string>();
            r.sweep_value = j.at("sweep_value").get<double>();
            r.method = (j.at("method").get<std::string>() == "quantum_music")
                           ? Method::quantum_music
                           : Method::rf_music;
            r.K = j.at("K").get<int>();
            r.M = j.at("M").get<int>();
            r.P = j.at("P").get<int>();
            r.N = j.at("N").get<int>();
            r.sigma_s_sq = j.at("sigma_s_sq").get<double>();
            r.sigma_n_sq = j.at("sigma_n_sq").get<double>();
            r.sigma_t_sq = j.at("sigma_t_sq").get<double>();
            r.trials = j.at("trials").get<int>();
            r.rmse_deg = j.at("rmse_deg").get<double>();
            r.flagged_trials = j.at("flagged_trials").get<int>();
            r.seed = j.at("seed").get<std::uint64_t>();
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace qmusic
