// ambiguity.hpp - delay-Doppler ambiguity functions
//
//   chi(tau, fd) = int x(t) conj(x(t - tau)) exp(j 2 pi fd t) dt
//
// Closed forms work on a continuous-time model of the frame: a list of
// pieces, each a finite sum of atoms g exp(j (a2 t^2 + a1 t)) on [t0, t1).
// OFDM atoms have a2 = 0, chirp atoms a2 = pi beta.  Every cross term of two
// atoms over an overlap window is then one quadratic-phase integral, done
// with sinc when the quadratic parts cancel and Fresnel integrals otherwise.
//
// The numeric evaluator is the plain sampled sum and serves as the oracle.

#pragma once

#include "isac/fresnel.hpp"
#include "isac/types.hpp"
#include "isac/waveform.hpp"
#include <span>

namespace isac::ambiguity {

using waveform::ChirpPlan;
using waveform::ResourceGrid;
using waveform::TimeSignal;
using waveform::WaveformConfig;

enum class Cut { ZeroDoppler, ZeroDelay };

struct AmbiguitySurface {
    std::vector<double> magnitude;  // [doppler][delay], max 1
    std::vector<double> delay_axis_s;
    std::vector<double> doppler_axis_hz;
    double peak = 0.0;  // max |chi| before normalization

    double at(std::size_t i_doppler, std::size_t i_delay) const {
        return magnitude[i_doppler * delay_axis_s.size() + i_delay];
    }
};

struct OverlapWindow {
    double t_d = 0.0;  // half length
    double t_a = 0.0;  // midpoint
    bool empty = true;
};

OverlapWindow overlap_window(int m, int m_prime, double tau, double T_o);

// [a0, a1) against [b0 + tau, b1 + tau)
OverlapWindow interval_overlap(double a0, double a1, double b0, double b1, double tau);

// int_lo^hi exp(j (A t^2 + B t)) dt
Complex quad_phase_integral(double A, double B, double lo, double hi);

// sin(x) / x
double sinc(double x);

struct Atom {
    Complex g;
    double a2 = 0.0;
    double a1 = 0.0;
};

struct Piece {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<Atom> atoms;
};

struct ContinuousWaveform {
    std::vector<Piece> pieces;

    Complex eval(double t) const;
    double duration() const;
};

ContinuousWaveform ofdm_model(const ResourceGrid& grid, const WaveformConfig& cfg);
ContinuousWaveform chirp_model(const ChirpPlan& plan, const WaveformConfig& cfg);
ContinuousWaveform cm_model(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg);
ContinuousWaveform aac_model(const ResourceGrid& grid, const ChirpPlan& plan, const WaveformConfig& cfg,
                             double alpha);

// int a(t) conj(b(t - tau)) exp(j 2 pi fd t) dt
Complex cross_ambiguity(const ContinuousWaveform& a, const ContinuousWaveform& b, double tau, double fd);

// The four terms of the affine sum and their weighted combination.
struct AacTerms {
    Complex chirp;      // c with c
    Complex ofdm_chirp; // s with c
    Complex chirp_ofdm; // c with s
    Complex ofdm;       // s with s
};

class AacAmbiguity {
public:
    AacAmbiguity(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid, double alpha);
    AacTerms terms(double tau, double fd) const;
    Complex operator()(double tau, double fd) const;

private:
    ContinuousWaveform s_, c_;
    double alpha_;
};

Complex aac_ambiguity_analytic(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid,
                               double alpha, double tau, double fd);
Complex cm_ambiguity_analytic(const WaveformConfig& cfg, const ChirpPlan& plan, const ResourceGrid& grid,
                              double tau, double fd);

// Samples at midpoints t = (l + 1/2) h over the whole model support.
TimeSignal sample_model(const ContinuousWaveform& w, double sample_rate_hz);

// Unnormalized sum (1/fs) sum_l x(l) conj(x(l - d)) exp(j 2 pi fd (t0 + l/fs)),
// d = tau fs which must be an integer.  Layout [doppler][delay].
CVector ambiguity_numeric_raw(const TimeSignal& x, std::span<const double> delay_axis_s,
                              std::span<const double> doppler_axis_hz);
CVector ambiguity_numeric_raw_serial(const TimeSignal& x, std::span<const double> delay_axis_s,
                                     std::span<const double> doppler_axis_hz);

AmbiguitySurface ambiguity_numeric(const TimeSignal& x, std::span<const double> delay_axis_s,
                                   std::span<const double> doppler_axis_hz);

// Analytic model on a grid, self-ambiguity of w.
CVector analytic_raw(const ContinuousWaveform& w, std::span<const double> delay_axis_s,
                     std::span<const double> doppler_axis_hz);
CVector analytic_raw_serial(const ContinuousWaveform& w, std::span<const double> delay_axis_s,
                            std::span<const double> doppler_axis_hz);

AmbiguitySurface make_surface(const CVector& raw, std::span<const double> delay_axis_s,
                              std::span<const double> doppler_axis_hz);

// Delay step 1/fs over one symbol each side, Doppler +-2/T_o with 128 points.
std::vector<double> default_delay_axis(const WaveformConfig& cfg);
std::vector<double> default_doppler_axis(const WaveformConfig& cfg);

// Half-power full width of a cut through the origin, interpolated in power.
double mainlobe_width(const AmbiguitySurface& surface, Cut cut);

} // namespace isac::ambiguity
