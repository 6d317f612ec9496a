#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberlink/control.hpp"
#include "fiberlink/rational.hpp"

namespace fiberlink::station {

/// RF frequency plan of a repeater station. Every synthesized signal is an
/// exact rational multiple of the station's single local oscillator, so the
/// drift-immunity of the transfer can be checked symbolically.
///
/// The chain per hop: the local laser locks 75 MHz below the post-AOM2 input
/// (PLL1); PLL2 locks the beat of the returned light against the local laser
/// to 150 MHz by driving AOM1, whose equilibrium frequency is therefore
/// 75 MHz (own LO) minus the 35 MHz AOM2 shift of the next station. The
/// +-75 MHz pair comes from one oscillator and cancels exactly; each AOM2
/// shift cancels between its single pass on the through path and its double
/// pass in the round trip.
struct FrequencyPlan {
    Rational pll1_offset_hz{75'000'000};
    Rational return_lock_hz{150'000'000};
    Rational aom2_shift_hz{35'000'000};
    int divider_tracking = 960;  ///< on the tracked return beat
    int divider_lo = 480;        ///< on the local 75 MHz reference
    Rational aom3_center_hz{80'000'000};

    void validate() const;
    /// AOM1 equilibrium shift given the next station's plan.
    Rational aom1_nominal_hz(const FrequencyPlan& next) const;
    /// Frequency both divided signals meet at (the PLL2 comparison rate).
    Rational divided_compare_hz() const;
};

/// Sensitivity of the delivered frequency to the input frequency and to each
/// LO in the chain. lo_coefficients_hz[i] is the change of the delivered
/// frequency, in Hz, per unit fractional offset of LO i; the last entry is
/// the terminal node's LO (AOM2 only).
struct PlanSensitivity {
    Rational nu_coefficient;
    std::vector<Rational> lo_coefficients_hz;
    bool all_immune() const {
        if (!(nu_coefficient == Rational(1))) return false;
        for (const auto& c : lo_coefficients_hz)
            if (!c.is_zero()) return false;
        return true;
    }
};

/// Exact rational bookkeeping of the end-to-end delivered frequency across
/// n_stations hops (input station plus repeaters), all using `plan`.
PlanSensitivity freq_plan_delivered_offset(const FrequencyPlan& plan, int n_stations);
/// Same with per-station plans (stations.size() hops; a terminal node with
/// the last plan's AOM2 closes the chain).
PlanSensitivity freq_plan_delivered_offset(const std::vector<FrequencyPlan>& stations);

/// Fractional-frequency error floor from the forward/backward carrier offset:
/// (offset / carrier) * free-running instability.
double asymmetry_floor(double offset_hz, double carrier_hz, double free_running_instability);

enum class Mode {
    Scanning,
    Pll1Closing,
    Pll1Locked,
    TrackingClosed,
    Pll2Closed,
};

std::string to_string(Mode m);

struct StationConfig {
    FrequencyPlan plan;
    double lo_fractional_offset = 0.0;
    double laser_linewidth_hz = 0.0;  ///< free-running local-laser linewidth

    /// Defaults are scaled-model values for ~200 Hz runs; the real-hardware
    /// figures (100 kHz fast paths, tens of Hz PZT) need rates the full tier
    /// is not meant for at desk scale.
    double pll1_fast_bandwidth_hz = 15.0;  ///< AOM3 path
    double pll1_slow_bandwidth_hz = 1.0;   ///< laser PZT path
    double tracking_bandwidth_hz = 20.0;
    double pll2_bandwidth_hz = 0.0;  ///< 0: derive from segment delay

    double aom_range_hz = 2e6;
    double pzt_range_hz = 1e9;  ///< +-1 GHz of the ~2 GHz tuning range
    double aom_actuator_bandwidth_hz = 0.0;

    double lock_threshold_db = -30.0;  ///< beat power gate, dB re nominal
    double capture_range_hz = 10e6;
    double scan_rate_hz_per_s = 100e6;
    double loss_of_signal_s = 0.010;
    double lock_window_rad = 1.0;
    double settle_time_s = 0.05;
    double acquisition_deadline_s = 10.0;

    double initial_detuning_hz = 0.0;  ///< cold-start laser offset
};

struct StationOutputs {
    double aom1_hz = 0.0;  ///< absolute drive frequencies
    double aom2_hz = 0.0;
    double aom3_hz = 0.0;
    double laser_offset_hz = 0.0;  ///< PZT deviation from nominal lock point
    double aom1_dev_hz = 0.0;      ///< correction (deviation from plan)
};

/// One repeater station: PLL1 regeneration automaton plus the PLL2
/// compensation loop. Beat phases come in as unwrapped radians of deviation
/// from the plan's nominal beat frequencies; the station handles its own
/// reference-phase offsets when its LO is detuned.
class Station {
public:
    /// next_aom2_nominal_hz: the AOM2 shift of the station terminating the
    /// compensated segment (sets AOM1's nominal output frequency).
    Station(const StationConfig& config, double pll2_loop_delay_s, double dt_s,
            double next_aom2_nominal_hz);

    StationOutputs step(double beat1_phase_rad, double beat2_phase_rad, double power1_db,
                        double power2_db, double laser_free_phase_rad = 0.0);

    Mode mode() const { return mode_; }
    /// Phase deviation of the regenerated (laser + AOM3) output.
    double regen_phase() const { return regen_phase_; }
    /// Phase deviation accumulated by AOM1 (one pass).
    double aom1_phase() const { return aom1_phase_; }
    double time_s() const { return t_; }
    double time_to_lock_s() const { return time_to_lock_; }
    long saturation_count() const;
    const StationConfig& config() const { return config_; }

private:
    void enter(Mode m);
    double lo_ramp_hz(double nominal_hz) const {
        return nominal_hz * config_.lo_fractional_offset;
    }

    StationConfig config_;
    double dt_ = 0.0;
    double t_ = 0.0;
    double aom1_nominal_hz_ = 0.0;

    Mode mode_ = Mode::Scanning;
    double mode_entered_t_ = 0.0;
    double time_to_lock_ = -1.0;

    control::PiFilter pll1_fast_;
    control::PiFilter pll1_slow_;
    control::PiFilter pll2_;
    control::Actuator aom3_;
    control::Actuator pzt_;
    control::Actuator aom1_;
    control::TrackingOscillator tracker_;
    control::Divider div_tracking_;
    control::Divider div_lo_;

    double regen_phase_ = 0.0;
    double actuator_phase_ = 0.0;
    double aom1_phase_ = 0.0;
    double prev_beat1_ = 0.0;
    bool have_prev_beat1_ = false;

    double scan_phase_s_ = 0.0;  ///< time coordinate of the triangular sweep
    double low_power_since_ = -1.0;
    // Running averages of loop-error magnitudes (time constant = settle_time);
    // lock gates compare these against the lock window, so broadband beat
    // noise does not keep the automaton from sequencing.
    double ema_e1_ = 0.0;
    double ema_trk_ = 0.0;
    double ema_e2_ = 0.0;
};

}  // namespace fiberlink::station
