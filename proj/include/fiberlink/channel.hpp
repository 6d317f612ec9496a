#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fiberlink/noise.hpp"
#include "fiberlink/series.hpp"

namespace fiberlink::channel {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct EdfaUnit {
    double position_km = 0.0;
    double gain_db = 0.0;
};

struct FiberSpan {
    double length_km = 0.0;
    double group_index = 1.468;
    double loss_per_km_db = 0.25;
    int connectors = 0;
    int oadm_count = 0;
    std::vector<EdfaUnit> edfa;
    bool carries_data_traffic = false;

    void validate() const;
};

/// Ordered spans treated as one compensated unit, with K lumped noise taps
/// standing in for the uniformly distributed fiber noise.
struct LinkSegment {
    std::vector<FiberSpan> spans;
    noise::NoiseModel noise;
    int noise_taps = 16;
    /// Optional explicit tap positions (km from the segment input). Empty
    /// means uniform midpoints: (k + 0.5)/K of the total length.
    std::vector<double> tap_positions_km;
    /// Forward/backward carrier difference for the asymmetry floor.
    double backward_offset_hz = 70e6;

    void validate() const;
    double total_length_km() const;
    /// Tap positions as fractions of the one-way delay.
    std::vector<double> tap_fractions() const;
};

double one_way_delay_s(const LinkSegment& segment);

struct BudgetParams {
    double connector_loss_db = 0.5;  // non-paper default, documented
    double oadm_loss_db = 1.5;       // non-paper default, documented
    double extra_loss_db = 0.0;      // one-way patch/splice allowance
    double receiver_max_roundtrip_db = 90.0;
};

struct BudgetEntry {
    std::string label;
    double db = 0.0;  ///< positive = loss, negative = gain
};

struct LinkBudget {
    std::vector<BudgetEntry> items;
    double one_way_passive_db = 0.0;   ///< losses only
    double round_trip_passive_db = 0.0;
    double one_way_db = 0.0;           ///< net of amplifier gain
    double round_trip_db = 0.0;
    double margin_db = 0.0;            ///< receiver_max_roundtrip - round_trip_db
};

LinkBudget link_budget(const LinkSegment& segment, const BudgetParams& params = {});

enum class Direction { Forward, Backward };

/// Streaming bidirectional delay line for one segment. Both directions share
/// the same delay history and tap noise (the reciprocity assumption round-trip
/// compensation rests on); the backward pass scales tap and delay phases by
/// (carrier + backward_offset) / carrier. Fractional delays use 4-point
/// Lagrange interpolation.
///
/// Reads at step n consume history up to step n-1, so a closed loop can read
/// both directions, run its servos, and push the new boundary phases
/// afterwards. The one-way delay must be at least 4 samples.
class SegmentLine {
public:
    /// tap_noise: one array per tap, phase in rad at the forward carrier,
    /// sampled at `rate`. delay_fluct may be empty (constant delay).
    /// delay_scale multiplies the geometric delay (scaled-model runs).
    SegmentLine(const LinkSegment& segment, double rate_hz, double carrier_hz,
                std::vector<std::span<const float>> tap_noise,
                std::span<const double> delay_fluct, double delay_scale = 1.0);

    /// Phase leaving the far end at step n (input was pushed up to n-1).
    double read_forward(std::size_t n);
    /// Phase leaving the near end at step n for the reverse direction.
    double read_backward(std::size_t n) const;
    /// Store the phases entering the segment at step n on both ports.
    void push(std::size_t n, double forward_input, double backward_input);

    /// Step change on one tap (phase jump events), in radians, effective for
    /// reads at or after sample_index.
    void add_tap_step(std::size_t tap, std::size_t sample_index, double step_rad);

    /// Free-running accumulated phase at the far end (taps plus the
    /// delay-fluctuation carrier term) from the latest read_forward.
    double last_forward_accumulation() const { return fwd_accum_; }

    double nominal_delay_s() const { return tau0_; }
    double rate_hz() const { return rate_; }

private:
    struct History {
        std::vector<double> buf;
        std::size_t mask = 0;
        void init(std::size_t capacity_pow2);
        void push(std::size_t n, double v) { buf[n & mask] = v; }
        double read(double index, std::size_t newest) const;
    };
    struct TapStep {
        std::size_t tap;
        std::size_t index;
        double step_rad;
    };

    double tap_read(std::size_t tap, double index) const;
    double delay_at(std::size_t n) const;

    double rate_ = 0.0;
    double carrier_hz_ = 0.0;
    double tau0_ = 0.0;
    double backward_scale_ = 1.0;
    std::vector<double> tap_frac_;
    std::vector<std::span<const float>> taps_;
    std::vector<TapStep> tap_steps_;
    std::span<const double> delay_fluct_;
    History fwd_, bwd_;
    double fwd_accum_ = 0.0;
};

/// Batch transformation built on SegmentLine: output(t) = input(t - tau(t))
/// plus each tap applied with its residual delay to the segment exit.
/// Samples earlier than the series start read as the first sample.
PhaseSeries propagate(const PhaseSeries& input, const LinkSegment& segment,
                      Direction direction, const DelaySeries& delay_fluct,
                      std::span<const PhaseSeries> tap_noise, double carrier_hz);

}  // namespace fiberlink::channel
