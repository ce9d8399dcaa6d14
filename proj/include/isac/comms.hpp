// comms.hpp - receiver chain (dechirp, demodulate, equalize, FEC) and link metrics
//
// Equalization and AAC chirp cancellation use genie CSI: the receiver is
// handed the true path taps.

#pragma once

#include "isac/channel.hpp"
#include "isac/types.hpp"
#include "isac/waveform.hpp"
#include <span>

namespace isac::comms {

using channel::PathTap;
using waveform::ChirpPlan;
using waveform::ResourceGrid;
using waveform::Scheme;
using waveform::TimeSignal;
using waveform::WaveformConfig;

struct CodecConfig {
    int constraint_length = 7;
    unsigned g0 = 0171;
    unsigned g1 = 0133;
    double rate = 0.5;
};

inline constexpr int kTailBits = 6;

struct LinkResult {
    std::uint64_t bits_tx = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    double ber = 0.0;
    double se_bits_per_s_per_hz = 0.0;
    double ebn0_db = 0.0;
};

Bits conv_encode(std::span<const std::uint8_t> bits);
Bits viterbi_decode(std::span<const std::uint8_t> coded);

// M x N channel frequency response seen by each symbol after CP removal.
CVector genie_csi(const std::vector<PathTap>& taps, const WaveformConfig& cfg);

// Returns the OFDM component as it arrived through the channel described by
// `csi`, so the result demodulates with the same per-subcarrier gains.
TimeSignal dechirp(const TimeSignal& rx, const ChirpPlan& plan, Scheme scheme, double alpha,
                   const std::vector<PathTap>& csi, const WaveformConfig& cfg);

struct DemodResult {
    ResourceGrid grid;
    std::vector<std::uint8_t> erasures;  // 1 where the csi gain was zero
};

// csi: M x N gains, or empty for unit gains.
DemodResult ofdm_demodulate(const TimeSignal& x, const WaveformConfig& cfg, std::span<const Complex> csi);

double spectral_efficiency(const LinkResult& result, double data_fraction, int bits_per_symbol,
                           double code_rate);

double ebn0_to_snr_db(double ebn0_db, int bits_per_symbol, double code_rate, double n_active, int N);

// Frame layout: comb pilots on every pilot_step-th subcarrier of every
// symbol (0 = no pilots), data elsewhere.
struct LinkSetup {
    WaveformConfig cfg;
    Scheme scheme = Scheme::OFDM;
    ChirpPlan plan;
    int pilot_step = 0;
    bool multipath = true;  // five-path profile, else a flat unit channel
};

std::size_t data_elements(const WaveformConfig& cfg, int pilot_step);
std::size_t info_bits_per_frame(const WaveformConfig& cfg, int pilot_step);
double data_fraction(const WaveformConfig& cfg, int pilot_step);

ResourceGrid build_data_grid(std::span<const std::uint8_t> coded, const WaveformConfig& cfg, int pilot_step);
CVector extract_data(const ResourceGrid& grid, const ResourceGrid& layout);

struct FrameOutcome {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
};

FrameOutcome simulate_frame(const LinkSetup& setup, double snr_db, std::uint64_t seed, std::uint64_t frame);

// Frames fan out over OpenMP threads; totals are integer sums.
LinkResult simulate_link(const LinkSetup& setup, double ebn0_db, int n_frames, std::uint64_t seed);
LinkResult simulate_link_serial(const LinkSetup& setup, double ebn0_db, int n_frames, std::uint64_t seed);

} // namespace isac::comms
