#include "fiberlink/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fiberlink/fft.hpp"
#include "fiberlink/noise.hpp"
#include "fiberlink/rng.hpp"

namespace fiberlink::cascade {

namespace {

constexpr std::uint64_t kSeedTap = 0x7461700000000000ULL;
constexpr std::uint64_t kSeedDrift = 0x6472696674000000ULL;
constexpr std::uint64_t kSeedLaser = 0x6c61736572000000ULL;
constexpr std::uint64_t kSeedRef = 0x7265660000000000ULL;

/// Deterministic substream seed from (run seed, model seed, tag).
std::uint64_t sub_seed(std::uint64_t run_seed, std::uint64_t model_seed, std::uint64_t tag) {
    return rng::philox4x64({tag, model_seed, 0, 0}, {run_seed, 0}).v[0];
}

noise::NoiseModel white_fm_from_linewidth(double linewidth_hz) {
    noise::NoiseModel m;
    if (linewidth_hz > 0.0) m.power_law = {{-2, linewidth_hz / M_PI}};
    return m;
}

void check_event(const Scenario& sc, const EventSpec& ev) {
    if (!(ev.t_s >= 0.0) || !(ev.t_s <= sc.run.duration_s))
        throw std::invalid_argument("event: time outside the run duration");
    if (!std::isfinite(ev.magnitude)) throw std::invalid_argument("event: magnitude not finite");
    if (ev.kind == EventSpec::Kind::PhaseJump) {
        if (ev.segment < 0 || ev.segment >= static_cast<int>(sc.segments.size()))
            throw std::invalid_argument("event: segment index out of range");
        const int taps = sc.segments[static_cast<std::size_t>(ev.segment)].noise_taps;
        if (ev.tap < -1 || ev.tap >= taps)
            throw std::invalid_argument("event: tap index out of range");
    } else {
        if (ev.station < 0 || ev.station >= static_cast<int>(sc.stations.size()))
            throw std::invalid_argument("event: station index out of range");
    }
}

struct PowerTimeline {
    // (sample index, dB step) per station, applied cumulatively.
    std::vector<std::vector<std::pair<std::size_t, double>>> steps;
    std::vector<double> offset;
    std::vector<std::size_t> cursor;

    PowerTimeline(std::size_t n_stations, const Scenario& sc, double rate) {
        steps.resize(n_stations);
        offset.assign(n_stations, 0.0);
        cursor.assign(n_stations, 0);
        for (const auto& ev : sc.events) {
            if (ev.kind != EventSpec::Kind::PowerStep) continue;
            steps[static_cast<std::size_t>(ev.station)].push_back(
                {static_cast<std::size_t>(std::llround(ev.t_s * rate)), ev.magnitude});
        }
        for (auto& v : steps)
            std::sort(v.begin(), v.end());
    }

    double at(std::size_t station, std::size_t n) {
        auto& c = cursor[station];
        const auto& v = steps[station];
        while (c < v.size() && v[c].first <= n) offset[station] += v[c++].second;
        return offset[station];
    }
};

}  // namespace

void Scenario::validate() const {
    if (segments.empty()) throw std::invalid_argument("Scenario: need at least one segment");
    if (stations.size() != segments.size())
        throw std::invalid_argument("Scenario: one station per segment required");
    for (const auto& s : segments) s.validate();
    for (const auto& st : stations) st.plan.validate();
    if (!(run.rate_hz > 0.0)) throw std::invalid_argument("Scenario: run.rate must be > 0");
    if (!(run.duration_s > 0.0)) throw std::invalid_argument("Scenario: run.duration must be > 0");
    if (!(run.carrier_hz > 0.0)) throw std::invalid_argument("Scenario: carrier must be > 0");
    if (!(run.tau_scale > 0.0)) throw std::invalid_argument("Scenario: tau_scale must be > 0");
    for (const auto& ev : events) check_event(*this, ev);
}

void inject_event(Scenario& scenario, const EventSpec& event) {
    check_event(scenario, event);
    scenario.events.push_back(event);
}

PhaseSeries correction_phase(const CorrectionSeries& c) {
    PhaseSeries p;
    p.rate_hz = c.rate_hz;
    p.samples.resize(c.hz.size());
    double acc = 0.0;
    const double dt = 1.0 / c.rate_hz;
    for (std::size_t i = 0; i < c.hz.size(); ++i) {
        acc += 2.0 * M_PI * c.hz[i] * dt;
        p.samples[i] = acc;
    }
    return p;
}

RunOutput run(const Scenario& scenario) {
    return scenario.run.mode == RunMode::Full ? run_full(scenario) : run_envelope(scenario);
}

RunOutput run_full(const Scenario& sc) {
    sc.validate();
    if (sc.run.mode != RunMode::Full)
        throw std::invalid_argument("run_full: scenario mode is not full");
    const double rate = sc.run.rate_hz;
    const double dt = 1.0 / rate;
    const double carrier = sc.run.carrier_hz;
    const auto n_samples = static_cast<std::size_t>(std::llround(sc.run.duration_s * rate));
    if (n_samples < 16) throw std::invalid_argument("run_full: duration too short");
    const std::size_t n_seg = sc.segments.size();

    double max_bw = 0.0;
    for (std::size_t i = 0; i < n_seg; ++i) {
        const auto& st = sc.stations[i];
        double bw2 = st.pll2_bandwidth_hz;
        if (bw2 <= 0.0)
            bw2 = 1.0 / (32.0 * channel::one_way_delay_s(sc.segments[i]) * sc.run.tau_scale);
        max_bw = std::max({max_bw, st.pll1_fast_bandwidth_hz, st.pll1_slow_bandwidth_hz,
                           st.tracking_bandwidth_hz, bw2});
    }
    if (rate < 10.0 * max_bw)
        throw std::invalid_argument(
            "run_full: rate must be at least 10x the fastest loop bandwidth (" +
            std::to_string(max_bw) + " Hz); raise run.rate or scale bandwidths down");

    // Memory estimate before any synthesis.
    std::size_t bytes = (3 + 2 * n_seg) * n_samples * sizeof(double);
    for (const auto& seg : sc.segments)
        if (!seg.noise.is_zero())
            bytes += static_cast<std::size_t>(seg.noise_taps) * n_samples * sizeof(float);
    if (bytes > sc.run.memory_budget_bytes)
        throw std::invalid_argument("run_full: rate*duration exceeds the memory budget (" +
                                    std::to_string(bytes) + " bytes needed)");

    // --- noise synthesis ---------------------------------------------------
    std::vector<std::vector<std::vector<float>>> taps(n_seg);
    std::vector<std::vector<double>> drift(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i) {
        const auto& seg = sc.segments[i];
        auto per_tap = seg.noise;
        per_tap.drift_span_s = 0.0;
        const auto k_taps = static_cast<std::size_t>(seg.noise_taps);
        for (auto& [alpha, level] : per_tap.power_law) level /= static_cast<double>(k_taps);
        for (auto& p : per_tap.peaks) p.height_rad2_per_hz /= static_cast<double>(k_taps);
        taps[i].resize(k_taps);
        if (!per_tap.is_zero()) {
            for (std::size_t k = 0; k < k_taps; ++k) {
                const auto ps = noise::synth_power_law(
                    per_tap, rate, n_samples,
                    sub_seed(sc.run.seed, seg.noise.seed, kSeedTap + (i << 16) + k));
                taps[i][k].assign(ps.samples.begin(), ps.samples.end());
            }
        }
        if (seg.noise.drift_span_s > 0.0)
            drift[i] = noise::synth_delay_drift(
                           seg.noise, rate, n_samples,
                           sub_seed(sc.run.seed, seg.noise.seed, kSeedDrift + i))
                           .samples;
    }

    // Reference laser fed to the input station.
    std::vector<double> ref(n_samples, 0.0);
    if (sc.input_laser.linewidth_hz > 0.0) {
        const auto ps = noise::synth_power_law(white_fm_from_linewidth(sc.input_laser.linewidth_hz),
                                               rate, n_samples, sub_seed(sc.run.seed, 0, kSeedRef));
        ref = ps.samples;
    }
    if (sc.input_laser.drift_hz_per_s != 0.0)
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double t = static_cast<double>(n) * dt;
            ref[n] += M_PI * sc.input_laser.drift_hz_per_s * t * t;
        }

    std::vector<std::vector<double>> laser(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i)
        if (sc.stations[i].laser_linewidth_hz > 0.0)
            laser[i] = noise::synth_power_law(
                           white_fm_from_linewidth(sc.stations[i].laser_linewidth_hz), rate,
                           n_samples, sub_seed(sc.run.seed, 0, kSeedLaser + i))
                           .samples;

    // --- channel lines and stations ----------------------------------------
    std::vector<channel::SegmentLine> lines;
    lines.reserve(n_seg);
    std::vector<station::Station> stations;
    stations.reserve(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i) {
        std::vector<std::span<const float>> tap_spans;
        for (auto& arr : taps[i]) tap_spans.emplace_back(arr);
        lines.emplace_back(sc.segments[i], rate, carrier, std::move(tap_spans),
                           std::span<const double>(drift[i]), sc.run.tau_scale);
        const double tau = lines.back().nominal_delay_s();
        const auto& next_plan =
            (i + 1 < n_seg) ? sc.stations[i + 1].plan : sc.stations[i].plan;
        stations.emplace_back(sc.stations[i], 2.0 * tau, dt,
                              next_plan.aom2_shift_hz.to_double());
    }

    // Phase-jump events become steps on the tap arrays' read path.
    for (const auto& ev : sc.events) {
        if (ev.kind != EventSpec::Kind::PhaseJump) continue;
        const auto seg = static_cast<std::size_t>(ev.segment);
        const auto tap = ev.tap >= 0 ? static_cast<std::size_t>(ev.tap)
                                     : static_cast<std::size_t>(sc.segments[seg].noise_taps / 2);
        lines[seg].add_tap_step(tap, static_cast<std::size_t>(std::llround(ev.t_s * rate)),
                                ev.magnitude * 1e-12 * 2.0 * M_PI * carrier);
    }

    // Beat powers from the budget margins, dB relative to nominal.
    std::vector<double> seg_power(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i)
        seg_power[i] = std::min(0.0, channel::link_budget(sc.segments[i], sc.budget).margin_db);
    PowerTimeline power(n_seg, sc, rate);

    const double terminal_aom2 = sc.stations.back().plan.aom2_shift_hz.to_double();
    auto aom2_ramp = [&](std::size_t i, double t) {
        // AOM2 of node i (station i, or the terminal when i == n_seg).
        const double nominal = i < n_seg ? sc.stations[i].plan.aom2_shift_hz.to_double()
                                         : terminal_aom2;
        const double frac = i < n_seg ? sc.stations[i].lo_fractional_offset
                                      : sc.terminal_lo_offset;
        return 2.0 * M_PI * nominal * frac * t;
    };

    // --- outputs ------------------------------------------------------------
    RunOutput out;
    out.seed = sc.run.seed;
    out.carrier_hz = carrier;
    out.end_to_end.rate_hz = rate;
    out.end_to_end.samples.resize(n_samples);
    out.corrections.resize(n_seg);
    out.free_running.resize(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i) {
        out.corrections[i].rate_hz = rate;
        out.corrections[i].hz.resize(n_samples);
        out.free_running[i].rate_hz = rate;
        out.free_running[i].samples.resize(n_samples);
        out.segment_delay_s.push_back(lines[i].nominal_delay_s());
    }

    std::vector<station::Mode> prev_mode(n_seg, station::Mode::Scanning);
    for (std::size_t i = 0; i < n_seg; ++i)
        out.modes.push_back({0.0, static_cast<int>(i), station::Mode::Scanning});

    std::vector<double> fwd_out(n_seg), bwd_out(n_seg);

    // --- main loop -----------------------------------------------------------
    for (std::size_t n = 0; n < n_samples; ++n) {
        const double t = static_cast<double>(n) * dt;
        for (std::size_t i = 0; i < n_seg; ++i) {
            fwd_out[i] = lines[i].read_forward(n);
            bwd_out[i] = lines[i].read_backward(n);
            out.free_running[i].samples[n] = lines[i].last_forward_accumulation();
        }

        for (std::size_t i = 0; i < n_seg; ++i) {
            const double psi = i == 0 ? ref[n] : fwd_out[i - 1] + aom2_ramp(i, t);
            const double beat1 = psi - stations[i].regen_phase();
            const double ret = bwd_out[i] + stations[i].aom1_phase();
            const double beat2 = ret - stations[i].regen_phase();
            const double p_in = i == 0 ? 0.0 : seg_power[i - 1] + power.at(i, n);
            const double p_rt = seg_power[i] + power.at(i, n);
            const auto outs = stations[i].step(beat1, beat2, p_in, p_rt,
                                               laser[i].empty() ? 0.0 : laser[i][n]);
            out.corrections[i].hz[n] = outs.aom1_dev_hz;
        }

        const double psi_end = fwd_out[n_seg - 1] + aom2_ramp(n_seg, t);
        out.end_to_end.samples[n] = psi_end - stations[0].regen_phase();

        for (std::size_t i = 0; i < n_seg; ++i) {
            const double launch = stations[i].regen_phase() + stations[i].aom1_phase();
            const double refl = i + 1 < n_seg ? fwd_out[i] + 2.0 * aom2_ramp(i + 1, t)
                                              : fwd_out[i] + 2.0 * aom2_ramp(n_seg, t);
            lines[i].push(n, launch, refl);
        }

        for (std::size_t i = 0; i < n_seg; ++i) {
            if (stations[i].mode() != prev_mode[i]) {
                prev_mode[i] = stations[i].mode();
                out.modes.push_back({t, static_cast<int>(i), prev_mode[i]});
            }
        }
    }

    // --- event log -----------------------------------------------------------
    for (const auto& ev : sc.events)
        out.events.push_back({ev.t_s,
                              ev.kind == EventSpec::Kind::PhaseJump ? "phase_jump" : "power_step",
                              ev.magnitude,
                              ev.kind == EventSpec::Kind::PhaseJump ? ev.segment : ev.station});
    for (std::size_t i = 0; i < n_seg; ++i) {
        const auto slips = analysis::detect_cycle_slips(correction_phase(out.corrections[i]),
                                                        carrier, sc.run.slip_threshold_ps);
        for (const auto& s : slips)
            out.events.push_back({s.t_s, "cycle_slip", s.magnitude_ps, static_cast<int>(i)});
    }
    for (std::size_t i = 0; i < n_seg; ++i) {
        const double ttl = stations[i].time_to_lock_s();
        if (ttl < 0.0 || ttl > sc.stations[i].acquisition_deadline_s)
            out.events.push_back({sc.stations[i].acquisition_deadline_s,
                                  "acquisition_deadline_exceeded", ttl, static_cast<int>(i)});
        if (stations[i].saturation_count() > 0)
            out.events.push_back({sc.run.duration_s, "saturation_count",
                                  static_cast<double>(stations[i].saturation_count()),
                                  static_cast<int>(i)});
    }
    std::sort(out.events.begin(), out.events.end(),
              [](const LoggedEvent& a, const LoggedEvent& b) { return a.t_s < b.t_s; });
    return out;
}

RunOutput run_envelope(const Scenario& sc) {
    sc.validate();
    if (sc.run.mode != RunMode::Envelope)
        throw std::invalid_argument("run_envelope: scenario mode is not envelope");
    if (sc.run.rate_hz > 10.0)
        throw std::invalid_argument("run_envelope: rate must be <= 10 Hz");
    for (const auto& ev : sc.events)
        if (ev.kind == EventSpec::Kind::PowerStep)
            throw std::invalid_argument(
                "run_envelope: power_step events are not supported (no power model)");

    const double rate = sc.run.rate_hz;
    const double dt = 1.0 / rate;
    const double carrier = sc.run.carrier_hz;
    const auto n_samples = static_cast<std::size_t>(std::llround(sc.run.duration_s * rate));
    if (n_samples < 4) throw std::invalid_argument("run_envelope: duration too short");
    const std::size_t n_seg = sc.segments.size();

    RunOutput out;
    out.seed = sc.run.seed;
    out.carrier_hz = carrier;
    out.end_to_end.rate_hz = rate;
    out.end_to_end.samples.assign(n_samples, 0.0);
    out.corrections.resize(n_seg);
    out.free_running.resize(n_seg);

    for (std::size_t i = 0; i < n_seg; ++i) {
        const auto& seg = sc.segments[i];
        const double tau = channel::one_way_delay_s(seg) * sc.run.tau_scale;
        out.segment_delay_s.push_back(tau);
        const auto delay_limit = [tau](double f) {
            return std::min(1.0, 2.0 * M_PI * f * tau / std::sqrt(3.0));
        };

        auto [free_pl, resid_pl] = noise::synth_power_law_filtered(
            seg.noise, rate, n_samples, sub_seed(sc.run.seed, seg.noise.seed, kSeedTap + i),
            delay_limit);

        // Drift and injected jumps share the same analytic response.
        std::vector<double> extra;
        if (seg.noise.drift_span_s > 0.0) {
            const auto d = noise::synth_delay_drift(
                seg.noise, rate, n_samples, sub_seed(sc.run.seed, seg.noise.seed, kSeedDrift + i));
            extra.assign(n_samples, 0.0);
            for (std::size_t n = 0; n < n_samples; ++n)
                extra[n] = -2.0 * M_PI * carrier * d.samples[n];
        }
        for (const auto& ev : sc.events) {
            if (ev.kind != EventSpec::Kind::PhaseJump ||
                ev.segment != static_cast<int>(i))
                continue;
            if (extra.empty()) extra.assign(n_samples, 0.0);
            const auto idx = static_cast<std::size_t>(std::llround(ev.t_s * rate));
            const double step = ev.magnitude * 1e-12 * 2.0 * M_PI * carrier;
            for (std::size_t n = idx; n < n_samples; ++n) extra[n] += step;
        }
        std::vector<double> extra_resid;
        if (!extra.empty()) extra_resid = fft::filter_amplitude(extra, rate, delay_limit);

        const double asym_scale = seg.backward_offset_hz / (2.0 * carrier);
        auto& free = out.free_running[i];
        free.rate_hz = rate;
        free.samples.resize(n_samples);
        auto& corr = out.corrections[i];
        corr.rate_hz = rate;
        corr.hz.resize(n_samples);

        double prev_diff = 0.0;
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double f_total = free_pl.samples[n] + (extra.empty() ? 0.0 : extra[n]);
            double r_total = resid_pl.samples[n] +
                             (extra_resid.empty() ? 0.0 : extra_resid[n]) +
                             asym_scale * f_total;
            free.samples[n] = f_total;
            out.end_to_end.samples[n] += r_total;
            const double diff = r_total - f_total;
            corr.hz[n] = (diff - prev_diff) / (2.0 * M_PI * dt);
            prev_diff = diff;
        }
    }

    for (std::size_t i = 0; i < n_seg; ++i)
        out.modes.push_back({0.0, static_cast<int>(i), station::Mode::Pll2Closed});

    for (const auto& ev : sc.events)
        out.events.push_back({ev.t_s, "phase_jump", ev.magnitude, ev.segment});
    for (std::size_t i = 0; i < n_seg; ++i) {
        const auto slips = analysis::detect_cycle_slips(correction_phase(out.corrections[i]),
                                                        carrier, sc.run.slip_threshold_ps);
        for (const auto& s : slips)
            out.events.push_back({s.t_s, "cycle_slip", s.magnitude_ps, static_cast<int>(i)});
    }
    std::sort(out.events.begin(), out.events.end(),
              [](const LoggedEvent& a, const LoggedEvent& b) { return a.t_s < b.t_s; });
    return out;
}

}  // namespace fiberlink::cascade
