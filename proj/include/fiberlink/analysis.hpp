#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fiberlink/series.hpp"

namespace fiberlink::analysis {

/// Pi-type (unweighted gate average) counter with zero dead time and an
/// optional single-pole pre-filter on phase.
struct CounterModel {
    double gate_s = 1.0;
    double measurement_bandwidth_hz = 0.0;  ///< <= 0 or >= Nyquist: no pre-filter
};

/// y_k = (phi((k+1)T) - phi(kT)) / (2*pi*carrier*T) over contiguous gates.
FrequencySeries counter_read(const PhaseSeries& phase, double carrier_hz,
                             const CounterModel& counter);

struct AdevPoint {
    double tau_s = 0.0;
    double adev = 0.0;
    std::size_t n_samples = 0;  ///< number of squared differences averaged
    double error_bar = 0.0;     ///< adev / sqrt(n_samples)
};

struct PsdBin {
    double f_hz = 0.0;
    double psd = 0.0;  ///< rad^2/Hz for phase input
};

struct StabilityResult {
    std::vector<AdevPoint> adev;
    std::vector<PsdBin> psd;
};

/// Allan deviation of fractional-frequency data at the requested averaging
/// times. Non-overlapping estimator by default (Pi-counter practice);
/// overlapping variant by flag. Taus that the series cannot support are
/// omitted rather than failing.
StabilityResult adev(const FrequencySeries& y, std::span<const double> taus_s,
                     bool overlapping = false);

/// Residual-to-free-running PSD ratio of ideal round-trip compensation with
/// uniformly distributed fiber noise: 10*log10((1/3)*(2*pi*f*tau)^2).
/// Valid for 0 < f < 1/(4*tau).
double rejection_theory_db(double f_hz, double tau_s);

/// Welch PSD, one-sided, Hann window, 50% overlap, segment length n/nseg.
/// Calibrated so the integral over f recovers the variance (white input).
std::vector<PsdBin> psd_welch(const PhaseSeries& phase, std::size_t nseg);

struct SlipEvent {
    double t_s = 0.0;
    double magnitude_ps = 0.0;  ///< signed step, picoseconds of delay
};

/// Steps in a phase record exceeding threshold_ps of delay at the carrier.
/// Uses a ramp-immune second-difference-of-means detector (equivalent to a
/// piecewise-linear detrend), window 0.4 s.
std::vector<SlipEvent> detect_cycle_slips(const PhaseSeries& phase, double carrier_hz,
                                          double threshold_ps);

struct RejectionBin {
    double f_hz = 0.0;
    double rejection_db = 0.0;  ///< 10*log10(comp/free); positive = excess noise
};

/// Pointwise PSD ratio on a common frequency grid. Bins where the reference
/// is zero are dropped.
std::vector<RejectionBin> measure_rejection(std::span<const PsdBin> psd_free,
                                            std::span<const PsdBin> psd_comp);

}  // namespace fiberlink::analysis
