// experiments.hpp - seeded Monte Carlo kernels and the experiment runner
//
// Every trial draws from its own counter-derived stream, results land in a
// slot indexed by trial, and reductions run in trial order afterwards.  The
// parallel and serial kernels therefore agree bit for bit.

#pragma once

#include "isac/channel.hpp"
#include "isac/comms.hpp"
#include "isac/sensing.hpp"
#include "isac/waveform.hpp"

#include "json.hpp"
#include <filesystem>
#include <span>
#include <string>

namespace isac::cli {

using waveform::ChirpMode;
using waveform::WaveformConfig;

// ---- sensing Monte Carlo -------------------------------------------------

enum class SensingScheme {
    Chirp,      // chirp alone
    AAC,        // affine chirp + data
    CM,         // chirp-multiplied data, full template known (monostatic)
    OFDM,       // every resource element known (monostatic)
    OFDMPilot,  // comb pilots only, data unknown
    CMPilot,    // comb pilots chirp-multiplied, data unknown
};

std::string to_string(SensingScheme s);
SensingScheme sensing_scheme_from_string(const std::string& s);

struct SensingSetup {
    WaveformConfig cfg;                         // cfg.alpha drives AAC
    SensingScheme scheme = SensingScheme::AAC;
    ChirpMode placement = ChirpMode::PerSymbol; // PerSymbol or PerSlot
    int chirp_symbols = 1;                      // PerSymbol: chirped symbols from symbol 0
    int pilot_step = 4;
    double range_m = 50.0;
    double velocity_mps = 0.0;
    double cfo_hz = 0.0;
    double timing_drift_s = 0.0;
};

struct SensingFrame {
    waveform::TimeSignal tx;
    waveform::TimeSignal tmpl;  // frame-length reference known to the sensing receiver
    std::size_t window = 0;     // lags searched
};

SensingFrame make_sensing_frame(const SensingSetup& s, std::mt19937_64& eng);

// One noisy trial; returns the estimate.
double range_trial(const SensingSetup& s, double snr_db, std::uint64_t seed, std::uint64_t trial);
double velocity_trial(const SensingSetup& s, double snr_db, std::uint64_t seed, std::uint64_t trial);

double rmse_range(const SensingSetup& s, double snr_db, int trials, std::uint64_t seed);
double rmse_range_serial(const SensingSetup& s, double snr_db, int trials, std::uint64_t seed);
double rmse_velocity(const SensingSetup& s, double snr_db, int trials, std::uint64_t seed);
double rmse_velocity_serial(const SensingSetup& s, double snr_db, int trials, std::uint64_t seed);

// ---- PAPR ----------------------------------------------------------------

struct PaprSeries {
    std::string scheme;
    double alpha = 0.0;
    std::vector<double> papr_db;  // one value per symbol
};

// OFDM, CM and AAC at each alpha over the same random symbols, one-symbol
// frames with a full-band chirp.
std::vector<PaprSeries> papr_batch(int n_subcarriers, const std::vector<double>& alphas, std::size_t n_symbols,
                                   std::uint64_t seed);
std::vector<PaprSeries> papr_batch_serial(int n_subcarriers, const std::vector<double>& alphas,
                                          std::size_t n_symbols, std::uint64_t seed);

// Smallest t with fraction(values > t) <= p, for each level p.
std::vector<double> ccdf(std::span<const double> values, std::span<const double> levels);

// ---- experiment runner ----------------------------------------------------

enum class Experiment { PaprCcdf, Ber, SpectralEfficiency, RmseRange, RmseVelocity, Ambiguity, Limits, Complexity };

const std::vector<std::string>& experiment_names();
Experiment experiment_from_string(const std::string& s);
std::string to_string(Experiment e);

struct LimitsBlock {
    std::string name;
    int n = 1;
    int m = 1;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Limits;
    WaveformConfig waveform;
    channel::ChannelRealization channel;  // template; seed and snr set per trial
    std::string channel_profile = "target"; // target | multipath | flat
    double range_m = 50.0;
    double velocity_mps = 0.0;
    std::vector<std::string> schemes;
    std::vector<double> alphas;
    std::vector<double> snr_grid_db;
    std::vector<std::string> placements;   // symbol | slot | hybrid
    int trials = 200;
    std::uint64_t seed = 1;
    int pilot_step = 4;
    std::vector<double> ccdf_levels;
    std::vector<LimitsBlock> blocks;
    int fine_steps_per_sample = 16;
    nlohmann::json source;                  // parsed input
};

// Config diagnostics carry "<path>:<line>: " prefixes.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json resolved_json(const ExperimentConfig& cfg);

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string format_number(double v);
std::string to_csv(const CsvTable& t);

std::vector<CsvTable> run_experiment(const ExperimentConfig& cfg);

// Writes each table as <name>.csv plus run.json.
void write_outputs(const ExperimentConfig& cfg, const std::vector<CsvTable>& tables,
                   const std::filesystem::path& out_dir);

} // namespace isac::cli
