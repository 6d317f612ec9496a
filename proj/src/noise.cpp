#include "fiberlink/noise.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "fiberlink/fft.hpp"
#include "fiberlink/rng.hpp"

namespace fiberlink::noise {

namespace {

constexpr std::uint64_t kDomainSpectrum = 0x5350454354525541ULL;  // stream tags
constexpr std::uint64_t kDomainDrift = 0x4452494654000000ULL;

constexpr double kDaySeconds = 86400.0;

double lorentzian(const SpectralPeak& p, double f) {
    const double hw = 0.5 * p.width_hz;
    const double d = f - p.center_hz;
    return p.height_rad2_per_hz * hw * hw / (d * d + hw * hw);
}

}  // namespace

void NoiseModel::validate() const {
    for (const auto& [alpha, level] : power_law) {
        if (alpha < -4 || alpha > 0)
            throw std::invalid_argument("NoiseModel: exponent must be in [-4, 0]");
        if (!(level >= 0.0) || !std::isfinite(level))
            throw std::invalid_argument("NoiseModel: levels must be finite and >= 0");
    }
    for (const auto& p : peaks) {
        if (!(p.center_hz > 0.0) || !(p.width_hz > 0.0))
            throw std::invalid_argument("NoiseModel: peaks need center_f > 0 and width > 0");
        if (!(p.height_rad2_per_hz >= 0.0) || !std::isfinite(p.height_rad2_per_hz))
            throw std::invalid_argument("NoiseModel: peak height must be finite and >= 0");
    }
    if (!(drift_span_s >= 0.0) || !std::isfinite(drift_span_s))
        throw std::invalid_argument("NoiseModel: drift_span must be finite and >= 0");
}

bool NoiseModel::is_zero() const {
    for (const auto& [alpha, level] : power_law)
        if (level > 0.0) return false;
    for (const auto& p : peaks)
        if (p.height_rad2_per_hz > 0.0) return false;
    return true;
}

double psd_model_eval(const NoiseModel& model, double f_hz) {
    if (!(f_hz > 0.0)) throw std::invalid_argument("psd_model_eval: f must be > 0");
    model.validate();
    double s = 0.0;
    for (const auto& [alpha, level] : model.power_law) s += level * std::pow(f_hz, alpha);
    for (const auto& p : model.peaks) s += lorentzian(p, f_hz);
    return s;
}

namespace {

/// Gaussian half-spectrum with E|X_k|^2 = S(f_k) * rate * nfft / 2, which
/// makes the periodogram of the inverse transform an unbiased estimate of S.
std::vector<std::complex<double>> draw_spectrum(const NoiseModel& model, double rate_hz,
                                                std::size_t nfft, std::uint64_t seed) {
    const double df = rate_hz / static_cast<double>(nfft);
    const rng::Stream stream(seed, kDomainSpectrum);
    std::vector<std::complex<double>> spectrum(nfft / 2 + 1, {0.0, 0.0});
    for (std::size_t k = 1; k < nfft / 2; ++k) {
        const double f = static_cast<double>(k) * df;
        const double fw = (rate_hz / M_PI) * std::sin(M_PI * f / rate_hz);
        const double amp = std::sqrt(psd_model_eval(model, fw) * rate_hz *
                                     static_cast<double>(nfft) / 2.0);
        const auto g = stream.gaussian_pair_at(k);
        spectrum[k] = {amp * g[0] * M_SQRT1_2, amp * g[1] * M_SQRT1_2};
    }
    {   // Nyquist bin is real-valued.
        const std::size_t k = nfft / 2;
        const double fw = (rate_hz / M_PI) * std::sin(M_PI * 0.5);
        const double amp = std::sqrt(psd_model_eval(model, fw) * rate_hz *
                                     static_cast<double>(nfft) / 2.0);
        spectrum[k] = {amp * stream.gaussian_pair_at(k)[0], 0.0};
    }
    return spectrum;
}

void check_synth_args(const NoiseModel& model, double rate_hz, std::size_t n) {
    model.validate();
    if (n < 2) throw std::invalid_argument("synth_power_law: n must be >= 2");
    if (!(rate_hz > 0.0)) throw std::invalid_argument("synth_power_law: rate must be > 0");
}

}  // namespace

PhaseSeries synth_power_law(const NoiseModel& model, double rate_hz, std::size_t n,
                            std::uint64_t seed) {
    check_synth_args(model, rate_hz, n);
    PhaseSeries out;
    out.rate_hz = rate_hz;
    if (model.is_zero()) {
        out.samples.assign(n, 0.0);
        return out;
    }
    const std::size_t nfft = std::max<std::size_t>(fft::next_pow2(n), 4);
    auto spectrum = draw_spectrum(model, rate_hz, nfft, seed);
    std::vector<double> x = fft::irfft(spectrum, nfft);
    x.resize(n);
    out.samples = std::move(x);
    return out;
}

std::pair<PhaseSeries, PhaseSeries> synth_power_law_filtered(
    const NoiseModel& model, double rate_hz, std::size_t n, std::uint64_t seed,
    const std::function<double(double)>& amplitude_response) {
    check_synth_args(model, rate_hz, n);
    PhaseSeries plain, filtered;
    plain.rate_hz = filtered.rate_hz = rate_hz;
    if (model.is_zero()) {
        plain.samples.assign(n, 0.0);
        filtered.samples.assign(n, 0.0);
        return {std::move(plain), std::move(filtered)};
    }
    const std::size_t nfft = std::max<std::size_t>(fft::next_pow2(n), 4);
    const double df = rate_hz / static_cast<double>(nfft);
    auto spectrum = draw_spectrum(model, rate_hz, nfft, seed);

    std::vector<double> x = fft::irfft(spectrum, nfft);
    x.resize(n);
    plain.samples = std::move(x);

    for (std::size_t k = 1; k < spectrum.size(); ++k)
        spectrum[k] *= amplitude_response(static_cast<double>(k) * df);
    std::vector<double> y = fft::irfft(spectrum, nfft);
    y.resize(n);
    filtered.samples = std::move(y);
    return {std::move(plain), std::move(filtered)};
}

DelaySeries synth_delay_drift(const NoiseModel& model, double rate_hz, std::size_t n,
                              std::uint64_t seed) {
    model.validate();
    if (n < 2) throw std::invalid_argument("synth_delay_drift: n must be >= 2");
    if (!(rate_hz > 0.0)) throw std::invalid_argument("synth_delay_drift: rate must be > 0");

    DelaySeries out;
    out.rate_hz = rate_hz;
    out.samples.assign(n, 0.0);
    if (model.drift_span_s <= 0.0) return out;

    rng::Stream stream(seed, kDomainDrift);
    const double dt = 1.0 / rate_hz;

    // Random-walk component sized so its expected daily range is about a
    // quarter of drift_span (E[range of BM over T] = sqrt(8T/pi) * sigma).
    const double steps_per_day = kDaySeconds * rate_hz;
    const double sigma_step = (model.drift_span_s / 4.0) /
                              (std::sqrt(8.0 / M_PI) * std::sqrt(steps_per_day));
    // One-pole smoothing well below 1 mHz keeps the walk band-limited.
    const double fc = 2e-4;
    const double alpha = 1.0 - std::exp(-2.0 * M_PI * fc * dt);

    const double sin_amp = 0.5 * model.drift_span_s;
    const double sin_phase = 2.0 * M_PI * stream.uniform();

    double walk = 0.0, smooth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        walk += sigma_step * stream.gaussian();
        smooth += alpha * (walk - smooth);
        const double t = static_cast<double>(i) * dt;
        out.samples[i] = smooth + sin_amp * std::sin(2.0 * M_PI * t / kDaySeconds + sin_phase);
    }
    return out;
}

NoiseModel preset(std::string_view name) {
    NoiseModel m;
    if (name == "quiet-spool") {
        m.power_law = {{-2, 7.6}};
        m.drift_span_s = 0.3e-9;
    } else if (name == "urban") {
        m.power_law = {{-2, 60.0}, {-3, 25.0}, {0, 2e-3}};
        m.peaks = {{1.3, 40.0, 0.4}, {3.1, 15.0, 0.8}};
        m.drift_span_s = 1.5e-9;
    } else if (name == "intercity") {
        m.power_law = {{-2, 250.0}, {-3, 120.0}, {0, 5e-3}};
        m.peaks = {{0.9, 200.0, 0.3}, {2.4, 80.0, 0.7}, {4.2, 40.0, 1.0}};
        m.drift_span_s = 3e-9;
    } else {
        throw std::invalid_argument("unknown noise preset: " + std::string(name));
    }
    return m;
}

}  // namespace fiberlink::noise
