#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberlink/analysis.hpp"
#include "fiberlink/channel.hpp"
#include "fiberlink/series.hpp"
#include "fiberlink/station.hpp"

namespace fiberlink::cascade {

struct LaserModel {
    double linewidth_hz = 0.0;    ///< white-FM (Lorentzian) linewidth
    double drift_hz_per_s = 0.0;  ///< linear frequency drift
};

enum class RunMode { Full, Envelope };

struct EventSpec {
    enum class Kind { PhaseJump, PowerStep };
    Kind kind = Kind::PhaseJump;
    double t_s = 0.0;
    double magnitude = 0.0;  ///< ps of delay for jumps, dB for power steps
    int segment = 0;         ///< jump target (0-based)
    int tap = -1;            ///< jump tap index; -1 = middle tap
    int station = 0;         ///< power-step target (0-based)
};

struct RunConfig {
    RunMode mode = RunMode::Envelope;
    double rate_hz = 1.0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    double carrier_hz = 194.4e12;  ///< 1542 nm band
    /// Multiplies all segment delays; scaled-model runs move the delay-limit
    /// knee into a cheap simulation band (documented in the README).
    double tau_scale = 1.0;
    double slip_threshold_ps = 100.0;
    std::size_t memory_budget_bytes = 1'500'000'000;
};

/// One end-to-end run: input station, N segments, N-1 repeaters plus a
/// terminal reflector node, event injection.
struct Scenario {
    std::vector<channel::LinkSegment> segments;
    std::vector<station::StationConfig> stations;  ///< one per segment
    LaserModel input_laser;
    RunConfig run;
    channel::BudgetParams budget;
    analysis::CounterModel counter;
    double terminal_lo_offset = 0.0;  ///< fractional offset of the end node's LO
    std::vector<EventSpec> events;

    void validate() const;
};

/// Validates an event against the scenario and appends it.
void inject_event(Scenario& scenario, const EventSpec& event);

struct ModeTransition {
    double t_s = 0.0;
    int station = 0;
    station::Mode mode = station::Mode::Scanning;
};

struct LoggedEvent {
    double t_s = 0.0;
    std::string kind;
    double value = 0.0;
    int index = 0;
};

/// AOM1 frequency deviation versus time; the in-band integral of the record
/// tracks the free-running fiber phase, which makes it the free-running
/// noise witness.
struct CorrectionSeries {
    std::vector<double> hz;
    double rate_hz = 0.0;
};

struct RunOutput {
    PhaseSeries end_to_end;  ///< delivered minus input-station laser, rad at carrier
    std::vector<CorrectionSeries> corrections;  ///< per segment
    std::vector<PhaseSeries> free_running;      ///< per-segment accumulated fiber phase
    std::vector<ModeTransition> modes;
    std::vector<LoggedEvent> events;
    std::uint64_t seed = 0;
    double carrier_hz = 0.0;
    std::vector<double> segment_delay_s;  ///< scaled one-way delays used in the run
};

/// Time-domain co-simulation of channels, stations, and loops.
RunOutput run_full(const Scenario& scenario);

/// Long-horizon tier: servos treated as ideal in-band cancellers; residual =
/// free-running fiber phase through the analytic delay-limit response plus
/// the carrier-asymmetry term. Station dynamics elided (assumed locked).
RunOutput run_envelope(const Scenario& scenario);

/// Dispatch on scenario.run.mode.
RunOutput run(const Scenario& scenario);

/// Integrated correction record as a phase series at the carrier (the form
/// slip detection and rejection references consume).
PhaseSeries correction_phase(const CorrectionSeries& c);

}  // namespace fiberlink::cascade
