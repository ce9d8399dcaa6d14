// sensing.hpp - matched-filter range profiles and range/velocity estimation
//
// Correlation convention: Y(tau) = sum_l rx(l + tau) conj(tmpl(l)), so an
// echo delayed by d samples peaks at tau = d.  Range is c tau / 2.

#pragma once

#include "isac/types.hpp"
#include "isac/waveform.hpp"
#include <span>
#include <utility>

namespace isac::sensing {

using waveform::TimeSignal;
using waveform::WaveformConfig;

struct RangeProfile {
    CVector correlation;
    std::vector<double> lag_axis_s;
    int symbol_index = 0;
};

struct SensingEstimate {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    int peak_bin = 0;
    double doppler_hz = 0.0;
};

struct RangeEstimate {
    double range_m = 0.0;
    int peak_bin = 0;
    double fractional_bin = 0.0;
    bool tie = false;  // several bins share the maximum; smallest lag kept
};

struct SensingLimits {
    double range_resolution_m = 0.0;
    double max_unambiguous_range_m = 0.0;
    double max_unambiguous_velocity_mps = 0.0;
};

enum class PeakRule {
    GlobalMax,
    EarliestAboveMedian,  // first local max above factor x median off-peak level
};

struct PeakOptions {
    PeakRule rule = PeakRule::GlobalMax;
    double median_factor = 5.0;
    bool interpolate = false;  // parabolic refinement on |Y|
    std::size_t max_lag = 0;   // search lags [0, max_lag); 0 = whole profile
};

enum class ComplexityScheme { AAC, CM, OFDM_PRS };

// Per-symbol circular correlation after CP removal.  A template of N
// samples is reused for every symbol (its spectrum is computed once); a
// frame-length template supplies a separate reference for each symbol.
std::vector<RangeProfile> matched_filter(const TimeSignal& rx, const TimeSignal& tmpl,
                                         const WaveformConfig& cfg);

// Linear correlation of tmpl against rx[start + tau ...] for tau in [0, n_lags).
RangeProfile correlate_window(const TimeSignal& rx, std::span<const Complex> tmpl, std::size_t start,
                              std::size_t n_lags);

// Reference O(N^2) circular correlation.
CVector circular_correlation_direct(std::span<const Complex> rx, std::span<const Complex> tmpl);

RangeEstimate estimate_range(const RangeProfile& profile, double fs, const PeakOptions& opt = {});

double estimate_doppler(std::span<const Complex> z, const WaveformConfig& cfg);
double estimate_velocity(std::span<const Complex> z, const WaveformConfig& cfg);

SensingLimits sensing_limits(int n, int m, const WaveformConfig& cfg);

std::int64_t complexity_counts(int N, int M, ComplexityScheme scheme);

double rmse_aggregate(std::span<const std::pair<double, double>> estimates);

} // namespace isac::sensing
