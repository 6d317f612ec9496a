#include "fiberlink/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "fiberlink/fft.hpp"

namespace fiberlink::analysis {

FrequencySeries counter_read(const PhaseSeries& phase, double carrier_hz,
                             const CounterModel& counter) {
    check_series(phase, "counter_read");
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("counter_read: carrier must be > 0");
    if (counter.gate_s < 2.0 / phase.rate_hz)
        throw std::invalid_argument("counter_read: gate shorter than 2 samples");

    std::vector<double> phi = phase.samples;
    const double bw = counter.measurement_bandwidth_hz;
    if (bw > 0.0 && bw < 0.5 * phase.rate_hz) {
        const double a = 1.0 - std::exp(-2.0 * M_PI * bw / phase.rate_hz);
        double state = phi.front();
        for (double& v : phi) {
            state += a * (v - state);
            v = state;
        }
    }

    const std::size_t m = static_cast<std::size_t>(std::llround(counter.gate_s * phase.rate_hz));
    const double gate = static_cast<double>(m) / phase.rate_hz;
    FrequencySeries y;
    y.rate_hz = 1.0 / gate;
    y.t0_s = phase.t0_s;
    for (std::size_t k = 0; (k + 1) * m < phi.size(); ++k)
        y.samples.push_back((phi[(k + 1) * m] - phi[k * m]) / (2.0 * M_PI * carrier_hz * gate));
    if (y.samples.size() < 2)
        throw std::invalid_argument("counter_read: series too short for the gate");
    return y;
}

StabilityResult adev(const FrequencySeries& y, std::span<const double> taus_s,
                     bool overlapping) {
    check_series(y, "adev");
    const double tau0 = 1.0 / y.rate_hz;
    const std::size_t n = y.samples.size();

    StabilityResult result;
    for (double tau : taus_s) {
        const auto m = static_cast<std::size_t>(std::llround(tau / tau0));
        if (m < 1 || 2 * m >= n) continue;  // insufficient data: omit the point

        double sum = 0.0;
        std::size_t count = 0;
        if (!overlapping) {
            // Block averages, then the two-sample variance of adjacent blocks.
            const std::size_t blocks = n / m;
            if (blocks < 2) continue;
            std::vector<double> avg(blocks, 0.0);
            for (std::size_t b = 0; b < blocks; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) s += y.samples[b * m + i];
                avg[b] = s / static_cast<double>(m);
            }
            for (std::size_t b = 0; b + 1 < blocks; ++b) {
                const double d = avg[b + 1] - avg[b];
                sum += d * d;
                ++count;
            }
        } else {
            // Overlapping estimator via the phase record x_i = tau0 * cumsum(y).
            std::vector<double> x(n + 1, 0.0);
            for (std::size_t i = 0; i < n; ++i) x[i + 1] = x[i] + y.samples[i] * tau0;
            for (std::size_t i = 0; i + 2 * m < x.size(); ++i) {
                const double d = (x[i + 2 * m] - 2.0 * x[i + m] + x[i]) /
                                 (static_cast<double>(m) * tau0);
                sum += d * d;
                ++count;
            }
        }
        if (count == 0) continue;
        AdevPoint p;
        p.tau_s = static_cast<double>(m) * tau0;
        p.adev = std::sqrt(sum / (2.0 * static_cast<double>(count)));
        p.n_samples = count;
        p.error_bar = p.adev / std::sqrt(static_cast<double>(count));
        result.adev.push_back(p);
    }
    return result;
}

double rejection_theory_db(double f_hz, double tau_s) {
    if (!(tau_s > 0.0)) throw std::invalid_argument("rejection_theory: tau must be > 0");
    if (!(f_hz > 0.0) || !(f_hz < 1.0 / (4.0 * tau_s)))
        throw std::invalid_argument("rejection_theory: f outside (0, 1/(4*tau))");
    const double w = 2.0 * M_PI * f_hz * tau_s;
    return 10.0 * std::log10(w * w / 3.0);
}

std::vector<PsdBin> psd_welch(const PhaseSeries& phase, std::size_t nseg) {
    check_series(phase, "psd_welch");
    if (nseg < 1) throw std::invalid_argument("psd_welch: nseg must be >= 1");
    const std::size_t n = phase.samples.size();
    if (n < 2 * nseg) throw std::invalid_argument("psd_welch: series length must be >= 2*nseg");

    const std::size_t seg_len = n / nseg;
    const std::size_t hop = std::max<std::size_t>(seg_len / 2, 1);

    std::vector<double> window(seg_len);
    double wsq = 0.0;
    for (std::size_t i = 0; i < seg_len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                          static_cast<double>(seg_len)));
        wsq += window[i] * window[i];
    }

    const std::size_t nbins = seg_len / 2 + 1;
    std::vector<double> acc(nbins, 0.0);
    std::size_t windows = 0;
    std::vector<double> buf(seg_len);
    for (std::size_t start = 0; start + seg_len <= n; start += hop) {
        for (std::size_t i = 0; i < seg_len; ++i)
            buf[i] = phase.samples[start + i] * window[i];
        const auto spec = fft::rfft(buf);
        for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(spec[k]);
        ++windows;
    }

    // One-sided normalization: P_k = 2 |X_k|^2 / (fs * sum w^2); the DC and
    // Nyquist bins are not doubled.
    const double norm = 1.0 / (phase.rate_hz * wsq * static_cast<double>(windows));
    std::vector<PsdBin> out(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        const bool edge = (k == 0) || (seg_len % 2 == 0 && k == nbins - 1);
        out[k].f_hz = static_cast<double>(k) * phase.rate_hz / static_cast<double>(seg_len);
        out[k].psd = (edge ? 1.0 : 2.0) * acc[k] * norm;
    }
    return out;
}

std::vector<SlipEvent> detect_cycle_slips(const PhaseSeries& phase, double carrier_hz,
                                          double threshold_ps) {
    check_series(phase, "detect_cycle_slips");
    if (!(threshold_ps > 0.0))
        throw std::invalid_argument("detect_cycle_slips: threshold must be > 0");

    const std::size_t n = phase.samples.size();
    const auto w = std::max<std::size_t>(
        static_cast<std::size_t>(std::llround(0.4 * phase.rate_hz)), 2);
    std::vector<SlipEvent> events;
    if (n < 4 * w + 1) return events;

    // Prefix sums for O(1) window means.
    std::vector<double> pre(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + phase.samples[i];
    auto mean = [&](std::size_t a, std::size_t b) {  // [a, b)
        return (pre[b] - pre[a]) / static_cast<double>(b - a);
    };

    // Second difference of window means: zero for any linear trend, equal to
    // the step size at a step.
    const double threshold_rad = threshold_ps * 1e-12 * 2.0 * M_PI * carrier_hz;
    std::vector<double> stat(n, 0.0);
    for (std::size_t i = 2 * w; i + 2 * w <= n; ++i) {
        const double a = mean(i - 2 * w, i - w);
        const double b = mean(i - w, i);
        const double c = mean(i, i + w);
        const double d = mean(i + w, i + 2 * w);
        stat[i] = (c - b) - 0.5 * ((b - a) + (d - c));
    }

    // Local maxima of |stat| above threshold, merged within one window.
    std::size_t i = 2 * w;
    while (i + 2 * w <= n) {
        if (std::abs(stat[i]) >= threshold_rad) {
            std::size_t best = i;
            std::size_t j = i;
            while (j + 2 * w <= n && std::abs(stat[j]) >= threshold_rad * 0.5 &&
                   j < i + 4 * w) {
                if (std::abs(stat[j]) > std::abs(stat[best])) best = j;
                ++j;
            }
            SlipEvent ev;
            ev.t_s = phase.t0_s + static_cast<double>(best) / phase.rate_hz;
            ev.magnitude_ps = stat[best] / (2.0 * M_PI * carrier_hz) * 1e12;
            events.push_back(ev);
            i = j + w;
        } else {
            ++i;
        }
    }
    return events;
}

std::vector<RejectionBin> measure_rejection(std::span<const PsdBin> psd_free,
                                            std::span<const PsdBin> psd_comp) {
    if (psd_free.size() != psd_comp.size())
        throw std::invalid_argument("measure_rejection: frequency grids differ in length");
    std::vector<RejectionBin> out;
    out.reserve(psd_free.size());
    for (std::size_t i = 0; i < psd_free.size(); ++i) {
        const double f = psd_free[i].f_hz;
        if (std::abs(f - psd_comp[i].f_hz) > 1e-9 * std::max(1.0, std::abs(f)))
            throw std::invalid_argument("measure_rejection: frequency grids do not match");
        if (!(psd_free[i].psd > 0.0)) continue;
        out.push_back({f, 10.0 * std::log10(psd_comp[i].psd / psd_free[i].psd)});
    }
    return out;
}

}  // namespace fiberlink::analysis
