// channel.hpp - delay-Doppler multipath, AWGN and sync impairments
//
// y(l) = sum_i xi_i x(l - d_i) exp(j 2 pi f_d,i l / fs) + n(l)
//
// Integer delays shift samples; fractional delays apply a DFT-domain
// phase ramp on a zero-padded copy so nothing wraps into the frame.

#pragma once

#include "isac/types.hpp"
#include "isac/waveform.hpp"
#include <limits>

namespace isac::channel {

using waveform::TimeSignal;
using waveform::WaveformConfig;

struct PathTap {
    double gain_db = 0.0;
    double delay_samples = 0.0;
    double doppler_hz = 0.0;
    double phase_rad = 0.0;
};

struct ChannelRealization {
    std::vector<PathTap> taps;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    double cfo_hz = 0.0;          // epsilon
    double timing_drift_s = 0.0;  // delta t
};

Complex tap_gain(const PathTap& tap);

// Five-path profile: 0/-8/-17/-21/-25 dB at 0/3/5/6/8 samples, phases drawn from seed.
std::vector<PathTap> multipath_profile(std::uint64_t seed);

// Single reflector at range_m moving at velocity_mps (monostatic convention).
PathTap target_tap(double range_m, double velocity_mps, const WaveformConfig& cfg, double phase_rad = 0.0);

TimeSignal delay_signal(const TimeSignal& x, double delay_samples);

// Propagation only: no noise, no impairments.
TimeSignal apply_paths(const TimeSignal& x, const std::vector<PathTap>& taps);

TimeSignal apply_channel(const TimeSignal& x, const ChannelRealization& ch, const WaveformConfig& cfg);

// Noise variance = mean |x|^2 / 10^(snr/10).
TimeSignal add_awgn(const TimeSignal& x, double snr_db, std::uint64_t seed);
TimeSignal add_awgn(const TimeSignal& x, double snr_db, std::uint64_t seed, double signal_power);

// Mean power over the useful (non-CP) samples of each whole symbol.
double useful_power(const TimeSignal& x, const WaveformConfig& cfg);

TimeSignal apply_cfo(const TimeSignal& x, double epsilon_hz);
TimeSignal apply_timing_drift(const TimeSignal& x, double dt_s);

} // namespace isac::channel
