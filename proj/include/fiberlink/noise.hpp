#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "fiberlink/series.hpp"

namespace fiberlink::noise {

/// Discrete spectral feature (e.g. a seismic line below a few Hz), modeled as
/// a Lorentzian of the given FWHM added on top of the power-law background.
struct SpectralPeak {
    double center_hz = 0.0;
    double height_rad2_per_hz = 0.0;
    double width_hz = 0.0;
};

/// Free-running fiber phase-noise model: S_phi(f) = sum b_alpha * f^alpha
/// plus Lorentzian peaks, with a slow diurnal delay drift on top.
struct NoiseModel {
    /// (exponent alpha in [-4, 0], level b_alpha in rad^2/Hz at 1 Hz).
    std::vector<std::pair<int, double>> power_law;
    std::vector<SpectralPeak> peaks;
    double drift_span_s = 0.0;  ///< peak-to-peak delay excursion per day, seconds
    std::uint64_t seed = 0;

    void validate() const;
    bool is_zero() const;
};

/// Closed-form evaluation of the configured S_phi(f), rad^2/Hz. f must be > 0.
double psd_model_eval(const NoiseModel& model, double f_hz);

/// Deterministic colored-noise synthesis by spectral shaping of white
/// Gaussian noise. The target spectrum is evaluated on the warped frequency
/// grid f~ = (rate/pi)*sin(pi*f/rate), which makes the discrete series the
/// exact discrete-time counterpart of the continuous process (in particular,
/// the increments of an f^-2 series come out white). For f << rate/4 the warp
/// is negligible and the Welch PSD of the output matches the model.
PhaseSeries synth_power_law(const NoiseModel& model, double rate_hz, std::size_t n,
                            std::uint64_t seed);

/// Same spectral draw returned twice: once plain, once with the amplitude
/// response H(f) applied in the spectral domain before transforming. Both
/// series share the noise realization exactly, so filtered-vs-free
/// comparisons carry no statistical mismatch.
std::pair<PhaseSeries, PhaseSeries> synth_power_law_filtered(
    const NoiseModel& model, double rate_hz, std::size_t n, std::uint64_t seed,
    const std::function<double(double)>& amplitude_response);

/// Slow delay drift: a low-pass-filtered random walk plus a 24 h sinusoid of
/// half the drift_span amplitude. Peak-to-peak over one simulated day lands
/// within a factor 2 of drift_span.
DelaySeries synth_delay_drift(const NoiseModel& model, double rate_hz, std::size_t n,
                              std::uint64_t seed);

/// Named fiber-noise presets ("quiet-spool", "urban", "intercity"). Levels
/// are calibration values chosen so a free-running 150 km segment shows an
/// Allan deviation near 1e-14 at 1 s; they are representative, not measured.
NoiseModel preset(std::string_view name);

}  // namespace fiberlink::noise
