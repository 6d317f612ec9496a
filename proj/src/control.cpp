#include "fiberlink/control.hpp"

#include <algorithm>
#include <cmath>

namespace fiberlink::control {

PiGains design_pi(double target_bandwidth_hz, double loop_delay_s) {
    if (!(target_bandwidth_hz > 0.0))
        throw std::invalid_argument("design_pi: bandwidth must be > 0");
    if (loop_delay_s < 0.0) throw std::invalid_argument("design_pi: delay must be >= 0");
    if (loop_delay_s > 0.0 && target_bandwidth_hz > 1.0 / (4.0 * loop_delay_s))
        throw std::invalid_argument("design_pi: delay-limited bandwidth (target above 1/(4*delay))");

    const double wc = 2.0 * M_PI * target_bandwidth_hz;
    const double delay_phase = wc * loop_delay_s;  // rad of lag at crossover
    // Open loop: (kp + ki/s) * (2*pi/s) * exp(-s*T). Margin = atan(wc/wz) - delay.
    // Aim for 45 deg where the delay leaves room, otherwise take what is left.
    const double want = std::min(1.52, M_PI / 4.0 + delay_phase);  // cap atan at ~87 deg
    const double wz = wc / std::tan(want);
    PiGains g;
    g.kp = wc / (2.0 * M_PI * std::sqrt(1.0 + (wz / wc) * (wz / wc)));
    g.ki = g.kp * wz;
    return g;
}

double PiFilter::step(double error_rad, double dt_s) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("PiFilter: dt must be > 0");
    const double proposed = integrator_ + gains_.ki * error_rad * dt_s;
    double out = gains_.kp * error_rad + proposed;
    if (out > limit_hz_ || out < -limit_hz_) {
        ++saturation_count_;
        const double clamped = std::clamp(out, -limit_hz_, limit_hz_);
        // Integrate only if it unwinds the saturation.
        if (std::abs(gains_.kp * error_rad + proposed) <
            std::abs(gains_.kp * error_rad + integrator_))
            integrator_ = proposed;
        return clamped;
    }
    integrator_ = proposed;
    return out;
}

double Actuator::step(double command_hz, double dt_s) {
    double cmd = command_hz;
    if (cmd > range_hz_ || cmd < -range_hz_) {
        ++saturation_count_;
        cmd = std::clamp(cmd, -range_hz_, range_hz_);
    }
    if (bandwidth_hz_ > 0.0) {
        const double a = 1.0 - std::exp(-2.0 * M_PI * bandwidth_hz_ * dt_s);
        state_hz_ += a * (cmd - state_hz_);
    } else {
        state_hz_ = cmd;
    }
    return state_hz_;
}

TrackingOscillator::TrackingOscillator(double bandwidth_hz) : bandwidth_hz_(bandwidth_hz) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("TrackingOscillator: bandwidth must be > 0");
    // Second-order loop, zeta = 1/sqrt(2): f_3dB = 2.058 * wn / (2*pi).
    const double wn = 2.0 * M_PI * bandwidth_hz / 2.058;
    kp_ = 2.0 * M_SQRT1_2 * wn;
    ki_ = wn * wn;
}

double TrackingOscillator::step(double input_phase_rad, double dt_s) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("TrackingOscillator: dt must be > 0");
    last_error_ = input_phase_rad - phase_;
    freq_ += ki_ * last_error_ * dt_s;
    phase_ += (freq_ + kp_ * last_error_) * dt_s;
    return phase_;
}

void TrackingOscillator::reset(double phase_rad) {
    phase_ = phase_rad;
    freq_ = 0.0;
    last_error_ = 0.0;
}

}  // namespace fiberlink::control
