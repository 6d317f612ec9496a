#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace fiberlink::control {

/// Extended-range phase-frequency detector: cycle-counting, no +-pi wrap,
/// amplitude-independent. Phases are unwrapped real numbers throughout the
/// simulator, so the error is the exact difference.
inline double pfd(double phase_ref_rad, double phase_in_rad) {
    return phase_ref_rad - phase_in_rad;
}

struct PiGains {
    double kp = 0.0;  ///< Hz per rad
    double ki = 0.0;  ///< Hz per (rad * s)
};

/// PI gains for the nominal plant (frequency actuator = 2*pi/s integrator,
/// plus a pure loop delay). Places unity-gain crossover at the target
/// bandwidth; the PI corner is chosen to preserve phase margin, 45 deg where
/// the delay allows it. Bandwidths above 1/(4*delay) are rejected.
PiGains design_pi(double target_bandwidth_hz, double loop_delay_s);

/// PI loop filter with output clamping and integrator freeze while saturated.
class PiFilter {
public:
    PiFilter() = default;
    PiFilter(PiGains gains, double output_limit_hz)
        : gains_(gains), limit_hz_(output_limit_hz) {
        if (gains.kp < 0.0 || gains.ki < 0.0)
            throw std::invalid_argument("PiFilter: gains must be >= 0");
        if (!(output_limit_hz > 0.0))
            throw std::invalid_argument("PiFilter: output limit must be > 0");
    }

    double step(double error_rad, double dt_s);
    void reset() { integrator_ = 0.0; }
    void preset_integrator(double hz) { integrator_ = hz; }
    double integrator_hz() const { return integrator_; }
    long saturation_count() const { return saturation_count_; }

private:
    PiGains gains_;
    double limit_hz_ = std::numeric_limits<double>::infinity();
    double integrator_ = 0.0;
    long saturation_count_ = 0;
};

/// Frequency actuator (AOM VCO or laser PZT): range clamp plus a single-pole
/// response at the actuator bandwidth.
class Actuator {
public:
    enum class Kind { Aom, Pzt };

    Actuator() = default;
    Actuator(Kind kind, double center_hz, double range_hz, double bandwidth_hz)
        : kind_(kind), center_hz_(center_hz), range_hz_(range_hz), bandwidth_hz_(bandwidth_hz) {
        if (!(range_hz > 0.0)) throw std::invalid_argument("Actuator: range must be > 0");
    }

    /// Apply a commanded frequency deviation; returns the realized deviation.
    double step(double command_hz, double dt_s);
    void reset(double hz = 0.0) { state_hz_ = hz; }
    double output_hz() const { return state_hz_; }
    double center_hz() const { return center_hz_; }
    double range_hz() const { return range_hz_; }
    long saturation_count() const { return saturation_count_; }

private:
    Kind kind_ = Kind::Aom;
    double center_hz_ = 0.0;
    double range_hz_ = 1.0;
    double bandwidth_hz_ = 0.0;  // <= 0: instantaneous
    double state_hz_ = 0.0;
    long saturation_count_ = 0;
};

/// Exact digital frequency divider: output phase = input phase / ratio.
struct Divider {
    int ratio = 1;
    explicit Divider(int r) : ratio(r) {
        if (r < 1) throw std::invalid_argument("Divider: ratio must be >= 1");
    }
    double apply(double phase_rad) const { return phase_rad / ratio; }
};

/// Second-order PLL used as a narrowband filter on a noisy beat: tracks DC
/// and ramps exactly, low-passes at the configured -3 dB bandwidth.
class TrackingOscillator {
public:
    TrackingOscillator() = default;
    explicit TrackingOscillator(double bandwidth_hz);

    double step(double input_phase_rad, double dt_s);
    void reset(double phase_rad = 0.0);
    double phase() const { return phase_; }
    double last_error() const { return last_error_; }
    double bandwidth_hz() const { return bandwidth_hz_; }

private:
    double bandwidth_hz_ = 0.0;
    double kp_ = 0.0;  // 1/s
    double ki_ = 0.0;  // 1/s^2
    double phase_ = 0.0;
    double freq_ = 0.0;  // rad/s
    double last_error_ = 0.0;
};

}  // namespace fiberlink::control
