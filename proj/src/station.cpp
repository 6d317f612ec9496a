#include "fiberlink/station.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberlink::station {

void FrequencyPlan::validate() const {
    if (!(pll1_offset_hz.to_double() > 0.0) || !(return_lock_hz.to_double() > 0.0) ||
        !(aom2_shift_hz.to_double() > 0.0))
        throw std::invalid_argument("FrequencyPlan: shifts must be > 0");
    if (divider_tracking < 1 || divider_lo < 1)
        throw std::invalid_argument("FrequencyPlan: divider ratios must be >= 1");
    // The two divided signals must meet at the same comparison frequency,
    // otherwise PLL2 has no fixed point at the declared return-lock offset.
    const Rational from_dividers =
        pll1_offset_hz * Rational(divider_tracking) / Rational(divider_lo);
    if (!(from_dividers == return_lock_hz))
        throw std::invalid_argument(
            "FrequencyPlan: return_lock must equal pll1_offset * divider_tracking / divider_lo");
}

Rational FrequencyPlan::aom1_nominal_hz(const FrequencyPlan& next) const {
    // PLL2 equilibrium: 2*aom1 + 2*aom2_next = return_lock.
    return return_lock_hz / Rational(2) - next.aom2_shift_hz;
}

Rational FrequencyPlan::divided_compare_hz() const {
    return pll1_offset_hz / Rational(divider_lo);
}

PlanSensitivity freq_plan_delivered_offset(const FrequencyPlan& plan, int n_stations) {
    if (n_stations < 1)
        throw std::invalid_argument("freq_plan_delivered_offset: need at least one station");
    return freq_plan_delivered_offset(
        std::vector<FrequencyPlan>(static_cast<std::size_t>(n_stations), plan));
}

PlanSensitivity freq_plan_delivered_offset(const std::vector<FrequencyPlan>& stations) {
    if (stations.empty())
        throw std::invalid_argument("freq_plan_delivered_offset: need at least one station");
    for (const auto& p : stations) {
        if (p.divider_tracking < 1 || p.divider_lo < 1)
            throw std::invalid_argument("freq_plan_delivered_offset: malformed plan");
    }

    PlanSensitivity s;
    s.nu_coefficient = Rational(1);  // all plan shifts are additive in nu
    s.lo_coefficients_hz.assign(stations.size() + 1, Rational(0));

    // Hop k: delivered' = delivered - pll1_k (own LO)
    //                    + aom1_k               (= return_lock_k/2 own LO  - aom2_{k+1} next LO)
    //                    + aom2_{k+1}           (next LO, single pass on the through path)
    for (std::size_t k = 0; k < stations.size(); ++k) {
        const FrequencyPlan& p = stations[k];
        const FrequencyPlan& next = (k + 1 < stations.size()) ? stations[k + 1] : stations[k];
        s.lo_coefficients_hz[k] =
            s.lo_coefficients_hz[k] - p.pll1_offset_hz + p.return_lock_hz / Rational(2);
        s.lo_coefficients_hz[k + 1] =
            s.lo_coefficients_hz[k + 1] - next.aom2_shift_hz + next.aom2_shift_hz;
    }
    return s;
}

double asymmetry_floor(double offset_hz, double carrier_hz, double free_running_instability) {
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("asymmetry_floor: carrier must be > 0");
    return (offset_hz / carrier_hz) * free_running_instability;
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Scanning: return "SCANNING";
        case Mode::Pll1Closing: return "PLL1_CLOSING";
        case Mode::Pll1Locked: return "PLL1_LOCKED";
        case Mode::TrackingClosed: return "TRACKING_CLOSED";
        case Mode::Pll2Closed: return "PLL2_CLOSED";
    }
    return "?";
}

Station::Station(const StationConfig& config, double pll2_loop_delay_s, double dt_s,
                 double next_aom2_nominal_hz)
    : config_(config),
      dt_(dt_s),
      div_tracking_(config.plan.divider_tracking),
      div_lo_(config.plan.divider_lo) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("Station: dt must be > 0");
    config_.plan.validate();
    aom1_nominal_hz_ = config_.plan.return_lock_hz.to_double() / 2.0 - next_aom2_nominal_hz;

    pll1_fast_ = control::PiFilter(control::design_pi(config.pll1_fast_bandwidth_hz, 0.0),
                                   config.aom_range_hz);
    // The slow path is a pure offload integrator; gains live in step().
    pll1_slow_ = control::PiFilter(control::PiGains{0.0, 1.0}, config.pzt_range_hz);
    tracker_ = control::TrackingOscillator(config.tracking_bandwidth_hz);

    // Default crossover well under the 1/(4*delay) ceiling: the PI zone can
    // then sit near crossover (45 deg margin with a strong integrator), which
    // keeps the in-band sensitivity far below the delay-limit law.
    double bw2 = config.pll2_bandwidth_hz;
    if (bw2 <= 0.0) bw2 = 1.0 / (16.0 * pll2_loop_delay_s);
    auto g2 = control::design_pi(bw2, pll2_loop_delay_s);
    // Plant seen by the PLL2 filter: AOM1 appears twice in the round trip and
    // the beat is divided before comparison.
    const double plant_scale = config.plan.divider_tracking / 2.0;
    g2.kp *= plant_scale;
    g2.ki *= plant_scale;
    pll2_ = control::PiFilter(g2, config.aom_range_hz);

    aom3_ = control::Actuator(control::Actuator::Kind::Aom, config.plan.aom3_center_hz.to_double(),
                              config.aom_range_hz, config.aom_actuator_bandwidth_hz);
    pzt_ = control::Actuator(control::Actuator::Kind::Pzt, 0.0, config.pzt_range_hz, 0.0);
    aom1_ = control::Actuator(control::Actuator::Kind::Aom, aom1_nominal_hz_,
                              config.aom_range_hz, config.aom_actuator_bandwidth_hz);
}

void Station::enter(Mode m) {
    mode_ = m;
    mode_entered_t_ = t_;
    ema_e1_ = ema_trk_ = ema_e2_ = 0.0;
    if (m == Mode::Scanning) {
        scan_phase_s_ = 0.0;
        pll1_fast_.reset();
        pll2_.reset();
        aom3_.reset();
        aom1_.reset();
        tracker_.reset();
        // PZT holds its current value; the sweep resumes around it.
        pll1_slow_.preset_integrator(pzt_.output_hz());
    }
    if (m == Mode::Pll2Closed && time_to_lock_ < 0.0) time_to_lock_ = t_;
}

long Station::saturation_count() const {
    return pll1_fast_.saturation_count() + pll2_.saturation_count() +
           aom3_.saturation_count() + pzt_.saturation_count() + aom1_.saturation_count();
}

StationOutputs Station::step(double beat1_phase_rad, double beat2_phase_rad, double power1_db,
                             double power2_db, double laser_free_phase_rad) {
    const double thr = config_.lock_threshold_db;

    // Loss-of-signal watchdog: either beat fading below threshold for longer
    // than the grace period sends the automaton back to the sweep. The return
    // beat only matters once the tracker is in play.
    bool power_ok = power1_db >= thr;
    if (mode_ == Mode::Pll1Locked || mode_ == Mode::TrackingClosed || mode_ == Mode::Pll2Closed)
        power_ok = power_ok && power2_db >= thr;
    if (mode_ != Mode::Scanning) {
        if (!power_ok) {
            if (low_power_since_ < 0.0) low_power_since_ = t_;
            if (t_ - low_power_since_ > config_.loss_of_signal_s) {
                low_power_since_ = -1.0;
                enter(Mode::Scanning);
            }
        } else {
            low_power_since_ = -1.0;
        }
    }

    // Reference phases synthesized from the (possibly detuned) local LO.
    const double ref1_f = lo_ramp_hz(config_.plan.pll1_offset_hz.to_double());
    const double ref1_phase = 2.0 * M_PI * ref1_f * t_;

    const double beat1_freq_est =
        have_prev_beat1_ ? (beat1_phase_rad - prev_beat1_) / (2.0 * M_PI * dt_) : 1e18;
    prev_beat1_ = beat1_phase_rad;
    have_prev_beat1_ = true;

    double pzt_cmd = pll1_slow_.integrator_hz();
    double aom3_dev = 0.0;
    double aom1_dev = 0.0;

    const double ema_a = std::min(1.0, dt_ / config_.settle_time_s);
    const bool settled_in_mode = t_ - mode_entered_t_ >= config_.settle_time_s;

    switch (mode_) {
        case Mode::Scanning: {
            // Triangular sweep around the held PZT value: 0 -> +range -> -range.
            // The capture test uses the beat produced by the previous step, so
            // the sweep step (scan rate x dt) has to stay under capture_range.
            if (power1_db >= thr &&
                std::abs(beat1_freq_est - ref1_f) <= config_.capture_range_hz) {
                pll1_slow_.preset_integrator(pzt_.output_hz());  // freeze where it was
                enter(Mode::Pll1Closing);
                break;
            }
            const double r = config_.pzt_range_hz;
            const double x = std::fmod(config_.scan_rate_hz_per_s * scan_phase_s_, 4.0 * r);
            const double tri = x < r ? x : (x < 3.0 * r ? 2.0 * r - x : x - 4.0 * r);
            scan_phase_s_ += dt_;
            pzt_cmd = pll1_slow_.integrator_hz() + tri;
            break;
        }
        case Mode::Pll1Closing:
        case Mode::Pll1Locked:
        case Mode::TrackingClosed:
        case Mode::Pll2Closed: {
            const double e1 = control::pfd(beat1_phase_rad, ref1_phase);
            aom3_dev = pll1_fast_.step(e1, dt_);
            // Offload: the PZT slowly absorbs whatever AOM3 is holding.
            const double k_off = 2.0 * M_PI * config_.pll1_slow_bandwidth_hz;
            pzt_cmd = pll1_slow_.step(k_off * aom3_.output_hz(), dt_);
            ema_e1_ += ema_a * (std::abs(e1) - ema_e1_);
            if (mode_ == Mode::Pll1Closing && settled_in_mode &&
                ema_e1_ < config_.lock_window_rad) {
                enter(Mode::Pll1Locked);
                tracker_.reset(beat2_phase_rad);
            }
            break;
        }
    }

    if (mode_ == Mode::Pll1Locked || mode_ == Mode::TrackingClosed ||
        mode_ == Mode::Pll2Closed) {
        tracker_.step(beat2_phase_rad, dt_);
        if (mode_ == Mode::Pll1Locked) {
            // Gate on the divided-beat error: the division is what makes the
            // raw beat noise tractable for PLL2.
            ema_trk_ += ema_a * (std::abs(tracker_.last_error()) /
                                     config_.plan.divider_tracking -
                                 ema_trk_);
            if (settled_in_mode && ema_trk_ < config_.lock_window_rad / 960.0 * 64.0)
                enter(Mode::TrackingClosed);
        }
    }

    if (mode_ == Mode::TrackingClosed || mode_ == Mode::Pll2Closed) {
        const double ref2_div = ref1_phase / config_.plan.divider_lo;
        const double e2 = control::pfd(ref2_div, div_tracking_.apply(tracker_.phase()));
        aom1_dev = pll2_.step(e2, dt_);
        ema_e2_ += ema_a * (std::abs(e2) * config_.plan.divider_tracking - ema_e2_);
        if (mode_ == Mode::TrackingClosed && settled_in_mode &&
            ema_e2_ < config_.lock_window_rad * 8.0)
            enter(Mode::Pll2Closed);
    }

    const double aom3_out = aom3_.step(aom3_dev, dt_);
    const double pzt_out = pzt_.step(pzt_cmd, dt_);
    const double aom1_out = aom1_.step(aom1_dev, dt_);

    const double actuator_f = config_.initial_detuning_hz + pzt_out + aom3_out;
    actuator_phase_ += 2.0 * M_PI * actuator_f * dt_;
    regen_phase_ = laser_free_phase_rad + actuator_phase_;
    aom1_phase_ += 2.0 * M_PI * aom1_out * dt_;

    t_ += dt_;

    StationOutputs out;
    out.aom3_hz = config_.plan.aom3_center_hz.to_double() + aom3_out;
    out.aom1_hz = aom1_nominal_hz_ + aom1_out;
    out.aom2_hz = config_.plan.aom2_shift_hz.to_double() * (1.0 + config_.lo_fractional_offset);
    out.laser_offset_hz = pzt_out;
    out.aom1_dev_hz = aom1_out;
    return out;
}

}  // namespace fiberlink::station
