#include "fiberlink/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fiberlink/toml.hpp"

namespace fiberlink::scenario {

namespace {

/// Typed, fail-closed view over a parsed document: every key that is read
/// gets marked, and anything left over at the end is rejected.
class Reader {
public:
    explicit Reader(const toml::Document& doc) : doc_(doc) {}

    bool has(const std::string& path) const { return doc_.has(path); }

    double number(const std::string& path, double fallback) {
        if (!doc_.has(path)) return fallback;
        consumed_.insert(path);
        try {
            return doc_.values.at(path).as_number();
        } catch (const std::exception&) {
            throw SchemaError(path, "expected a number");
        }
    }

    double required_number(const std::string& path) {
        if (!doc_.has(path)) throw SchemaError(path, "required key missing");
        return number(path, 0.0);
    }

    std::int64_t integer(const std::string& path, std::int64_t fallback) {
        if (!doc_.has(path)) return fallback;
        consumed_.insert(path);
        const auto& v = doc_.values.at(path);
        if (!v.is_int()) throw SchemaError(path, "expected an integer");
        return std::get<std::int64_t>(v.data);
    }

    bool boolean(const std::string& path, bool fallback) {
        if (!doc_.has(path)) return fallback;
        consumed_.insert(path);
        const auto& v = doc_.values.at(path);
        if (!v.is_bool()) throw SchemaError(path, "expected true or false");
        return std::get<bool>(v.data);
    }

    std::string text(const std::string& path, const std::string& fallback) {
        if (!doc_.has(path)) return fallback;
        consumed_.insert(path);
        const auto& v = doc_.values.at(path);
        if (!v.is_string()) throw SchemaError(path, "expected a string");
        return std::get<std::string>(v.data);
    }

    /// Numerically sorted child table names under prefix; must be 1..N.
    std::vector<int> numbered_children(const std::string& prefix) const {
        std::vector<int> out;
        for (const auto& name : doc_.children(prefix)) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(name, &used);
                if (used != name.size() || v < 1) throw std::invalid_argument(name);
                out.push_back(v);
            } catch (const std::exception&) {
                throw SchemaError(prefix + name, "table names under this prefix must be 1..N");
            }
        }
        std::sort(out.begin(), out.end());
        for (std::size_t i = 0; i < out.size(); ++i)
            if (out[i] != static_cast<int>(i) + 1)
                throw SchemaError(prefix, "tables must be numbered 1..N without gaps");
        return out;
    }

    void finish() const {
        for (const auto& [path, value] : doc_.values) {
            if (!consumed_.count(path))
                throw SchemaError(path, "unknown key (line " + std::to_string(value.line) + ")");
        }
    }

private:
    const toml::Document& doc_;
    std::set<std::string> consumed_;
};

noise::NoiseModel read_noise(Reader& r, const std::string& base) {
    // Either a preset name or an inline [*.noise] table (or neither: silent fiber).
    const std::string preset_name = r.text(base + ".noise_preset", "");
    const std::string noise_base = base + ".noise";
    const bool inline_noise = r.has(noise_base + ".b0") || r.has(noise_base + ".bm1") ||
                              r.has(noise_base + ".bm2") || r.has(noise_base + ".bm3") ||
                              r.has(noise_base + ".bm4") || r.has(noise_base + ".drift_span_ns") ||
                              !r.numbered_children(noise_base + ".peak.").empty();
    if (!preset_name.empty() && inline_noise)
        throw SchemaError(base, "give either noise_preset or an inline noise table, not both");

    noise::NoiseModel model;
    if (!preset_name.empty()) {
        try {
            model = noise::preset(preset_name);
        } catch (const std::exception& e) {
            throw SchemaError(base + ".noise_preset", e.what());
        }
        return model;
    }
    const std::pair<const char*, int> names[] = {
        {"b0", 0}, {"bm1", -1}, {"bm2", -2}, {"bm3", -3}, {"bm4", -4}};
    for (const auto& [key, alpha] : names) {
        const double level = r.number(noise_base + "." + key, 0.0);
        if (level != 0.0) model.power_law.push_back({alpha, level});
    }
    for (int p : r.numbered_children(noise_base + ".peak.")) {
        const std::string pb = noise_base + ".peak." + std::to_string(p);
        noise::SpectralPeak peak;
        peak.center_hz = r.required_number(pb + ".center_hz");
        peak.height_rad2_per_hz = r.required_number(pb + ".height");
        peak.width_hz = r.required_number(pb + ".width_hz");
        model.peaks.push_back(peak);
    }
    model.drift_span_s = r.number(noise_base + ".drift_span_ns", 0.0) * 1e-9;
    model.seed = static_cast<std::uint64_t>(r.integer(noise_base + ".seed", 0));
    return model;
}

channel::LinkSegment read_link(Reader& r, const std::string& base) {
    channel::LinkSegment seg;
    seg.noise = read_noise(r, base);
    seg.noise_taps = static_cast<int>(r.integer(base + ".taps", 16));
    seg.backward_offset_hz = r.number(base + ".backward_offset_hz", 70e6);
    const auto spans = r.numbered_children(base + ".span.");
    if (spans.empty()) throw SchemaError(base, "a link needs at least one span");
    for (int s : spans) {
        const std::string sb = base + ".span." + std::to_string(s);
        channel::FiberSpan span;
        span.length_km = r.required_number(sb + ".length_km");
        span.loss_per_km_db = r.number(sb + ".loss_per_km_db", 0.25);
        span.group_index = r.number(sb + ".group_index", 1.468);
        span.connectors = static_cast<int>(r.integer(sb + ".connectors", 0));
        span.oadm_count = static_cast<int>(r.integer(sb + ".oadm", 0));
        span.carries_data_traffic = r.boolean(sb + ".carries_data", false);
        for (int e : r.numbered_children(sb + ".edfa.")) {
            const std::string eb = sb + ".edfa." + std::to_string(e);
            channel::EdfaUnit edfa;
            edfa.position_km = r.required_number(eb + ".position_km");
            edfa.gain_db = r.required_number(eb + ".gain_db");
            span.edfa.push_back(edfa);
        }
        seg.spans.push_back(span);
    }
    return seg;
}

station::StationConfig read_station(Reader& r, const std::string& base) {
    station::StationConfig st;
    st.pll1_fast_bandwidth_hz = r.number(base + ".pll1_fast_bw_hz", st.pll1_fast_bandwidth_hz);
    st.pll1_slow_bandwidth_hz = r.number(base + ".pll1_slow_bw_hz", st.pll1_slow_bandwidth_hz);
    st.tracking_bandwidth_hz = r.number(base + ".tracking_bw_hz", st.tracking_bandwidth_hz);
    st.pll2_bandwidth_hz = r.number(base + ".pll2_bw_hz", 0.0);
    st.aom_range_hz = r.number(base + ".aom_range_hz", st.aom_range_hz);
    st.pzt_range_hz = r.number(base + ".pzt_range_hz", st.pzt_range_hz);
    st.aom_actuator_bandwidth_hz =
        r.number(base + ".aom_actuator_bw_hz", st.aom_actuator_bandwidth_hz);
    st.lock_threshold_db = r.number(base + ".lock_threshold_db", st.lock_threshold_db);
    st.capture_range_hz = r.number(base + ".capture_range_hz", st.capture_range_hz);
    st.scan_rate_hz_per_s = r.number(base + ".scan_rate_hz_per_s", st.scan_rate_hz_per_s);
    st.loss_of_signal_s = r.number(base + ".loss_of_signal_s", st.loss_of_signal_s);
    st.lock_window_rad = r.number(base + ".lock_window_rad", st.lock_window_rad);
    st.settle_time_s = r.number(base + ".settle_time_s", st.settle_time_s);
    st.acquisition_deadline_s =
        r.number(base + ".acquisition_deadline_s", st.acquisition_deadline_s);
    st.initial_detuning_hz = r.number(base + ".initial_detuning_hz", 0.0);
    st.lo_fractional_offset = r.number(base + ".lo_offset", 0.0);
    st.laser_linewidth_hz = r.number(base + ".laser_linewidth_hz", 0.0);

    st.plan.pll1_offset_hz =
        Rational(static_cast<std::int64_t>(r.integer(base + ".pll1_offset_hz", 75'000'000)));
    st.plan.return_lock_hz =
        Rational(static_cast<std::int64_t>(r.integer(base + ".return_lock_hz", 150'000'000)));
    st.plan.aom2_shift_hz =
        Rational(static_cast<std::int64_t>(r.integer(base + ".aom2_shift_hz", 35'000'000)));
    st.plan.divider_tracking = static_cast<int>(r.integer(base + ".divider_tracking", 960));
    st.plan.divider_lo = static_cast<int>(r.integer(base + ".divider_lo", 480));
    return st;
}

}  // namespace

cascade::Scenario from_toml(const std::string& text) {
    const toml::Document doc = toml::parse(text);
    Reader r(doc);
    cascade::Scenario sc;

    if (!r.has("run.mode")) throw SchemaError("run", "section missing or incomplete");
    const std::string mode = r.text("run.mode", "");
    if (mode == "full")
        sc.run.mode = cascade::RunMode::Full;
    else if (mode == "envelope")
        sc.run.mode = cascade::RunMode::Envelope;
    else
        throw SchemaError("run.mode", "must be \"full\" or \"envelope\"");
    sc.run.rate_hz = r.required_number("run.rate_hz");
    sc.run.duration_s = r.required_number("run.duration_s");
    const auto seed = r.integer("run.seed", 0);
    if (seed < 0) throw SchemaError("run.seed", "must be >= 0");
    sc.run.seed = static_cast<std::uint64_t>(seed);
    sc.run.carrier_hz = r.number("run.carrier_hz", sc.run.carrier_hz);
    sc.run.tau_scale = r.number("run.tau_scale", 1.0);
    sc.run.slip_threshold_ps = r.number("run.slip_threshold_ps", 100.0);
    sc.run.memory_budget_bytes = static_cast<std::size_t>(
        r.number("run.memory_budget_mb", 1500.0) * 1024.0 * 1024.0);

    sc.counter.gate_s = r.number("counter.gate_s", 1.0);
    sc.counter.measurement_bandwidth_hz = r.number("counter.bandwidth_hz", 0.0);

    sc.input_laser.linewidth_hz = r.number("laser.linewidth_hz", 0.0);
    sc.input_laser.drift_hz_per_s = r.number("laser.drift_hz_per_s", 0.0);

    sc.budget.connector_loss_db = r.number("budget.connector_loss_db", 0.5);
    sc.budget.oadm_loss_db = r.number("budget.oadm_loss_db", 1.5);
    sc.budget.extra_loss_db = r.number("budget.extra_loss_db", 0.0);
    sc.budget.receiver_max_roundtrip_db = r.number("budget.receiver_max_roundtrip_db", 90.0);

    sc.terminal_lo_offset = r.number("terminal.lo_offset", 0.0);

    const auto links = r.numbered_children("link.");
    if (links.empty()) throw SchemaError("link", "at least [link.1] is required");
    for (int l : links) sc.segments.push_back(read_link(r, "link." + std::to_string(l)));

    const auto stations = r.numbered_children("station.");
    if (stations.size() != links.size())
        throw SchemaError("station", "need exactly one [station.N] per [link.N]");
    for (int s : stations) sc.stations.push_back(read_station(r, "station." + std::to_string(s)));

    for (int e : r.numbered_children("events.")) {
        const std::string eb = "events." + std::to_string(e);
        cascade::EventSpec ev;
        ev.t_s = r.required_number(eb + ".t_s");
        const std::string kind = r.text(eb + ".kind", "");
        if (kind == "phase_jump") {
            ev.kind = cascade::EventSpec::Kind::PhaseJump;
            ev.magnitude = r.required_number(eb + ".ps");
            ev.segment = static_cast<int>(r.integer(eb + ".segment", 1)) - 1;
            ev.tap = static_cast<int>(r.integer(eb + ".tap", 0)) - 1;
        } else if (kind == "power_step") {
            ev.kind = cascade::EventSpec::Kind::PowerStep;
            ev.magnitude = r.required_number(eb + ".db");
            ev.station = static_cast<int>(r.integer(eb + ".station", 1)) - 1;
        } else {
            throw SchemaError(eb + ".kind", "must be \"phase_jump\" or \"power_step\"");
        }
        sc.events.push_back(ev);
    }

    r.finish();
    sc.validate();
    return sc;
}

namespace {

constexpr const char* kTestbed2x150 = R"(# Desk-scale model of a 2 x 150 km spool cascade with one repeater station.
# Delays are scaled up x100 and loop bandwidths scaled down so the servo
# hierarchy fits a 200 Hz simulation rate; see the README on scaled-model runs.

[run]
mode = "full"
rate_hz = 200.0
duration_s = 400.0
seed = 1
tau_scale = 100.0

[counter]
gate_s = 1.0
bandwidth_hz = 10.0

[laser]
linewidth_hz = 0.0

[link.1]
noise_preset = "quiet-spool"

[link.1.span.1]
length_km = 150.0
loss_per_km_db = 0.20
connectors = 2
oadm = 4

[link.1.span.1.edfa.1]
position_km = 50.0
gain_db = 15.0

[link.1.span.1.edfa.2]
position_km = 100.0
gain_db = 15.0

[link.2]
noise_preset = "quiet-spool"

[link.2.span.1]
length_km = 150.0
loss_per_km_db = 0.20
connectors = 2
oadm = 4

[link.2.span.1.edfa.1]
position_km = 50.0
gain_db = 15.0

[link.2.span.1.edfa.2]
position_km = 100.0
gain_db = 15.0

[station.1]
pll1_fast_bw_hz = 15.0
pll1_slow_bw_hz = 1.0
tracking_bw_hz = 20.0
aom_range_hz = 200000.0
capture_range_hz = 20000.0
scan_rate_hz_per_s = 100e6

[station.2]
pll1_fast_bw_hz = 15.0
pll1_slow_bw_hz = 1.0
tracking_bw_hz = 20.0
aom_range_hz = 200000.0
capture_range_hz = 20000.0
scan_rate_hz_per_s = 100e6
)";

constexpr const char* kRenater300 = R"(# 300 km installed-network topology: two 150 km links, each 11 + 36 + 103 km
# (urban access, urban dark fiber, long-haul intercity), 4 OADM and 2
# bidirectional EDFA per link. Envelope mode for long-horizon stability runs.

[run]
mode = "envelope"
rate_hz = 2.0
duration_s = 10000.0
seed = 1

[counter]
gate_s = 1.0
bandwidth_hz = 10.0

[budget]
extra_loss_db = 2.0

[link.1]
noise_preset = "intercity"

[link.1.span.1]
length_km = 11.0
loss_per_km_db = 0.30
connectors = 3
oadm = 2
carries_data = true

[link.1.span.2]
length_km = 36.0
loss_per_km_db = 0.28
connectors = 3

[link.1.span.3]
length_km = 103.0
loss_per_km_db = 0.26
connectors = 2
oadm = 2
carries_data = true

[link.1.span.3.edfa.1]
position_km = 20.0
gain_db = 14.0

[link.1.span.3.edfa.2]
position_km = 70.0
gain_db = 14.0

[link.2]
noise_preset = "intercity"

[link.2.span.1]
length_km = 103.0
loss_per_km_db = 0.26
connectors = 2
oadm = 2
carries_data = true

[link.2.span.1.edfa.1]
position_km = 30.0
gain_db = 14.0

[link.2.span.1.edfa.2]
position_km = 80.0
gain_db = 14.0

[link.2.span.2]
length_km = 36.0
loss_per_km_db = 0.28
connectors = 3

[link.2.span.3]
length_km = 11.0
loss_per_km_db = 0.30
connectors = 3
oadm = 2
carries_data = true

[station.1]

[station.2]
)";

}  // namespace

std::string preset_text(std::string_view name) {
    if (name == "testbed-2x150") return kTestbed2x150;
    if (name == "renater-300") return kRenater300;
    throw std::invalid_argument("unknown scenario preset: " + std::string(name) +
                                " (available: testbed-2x150, renater-300)");
}

std::vector<std::string> preset_names() { return {"testbed-2x150", "renater-300"}; }

cascade::Scenario load(const std::string& path_or_preset) {
    if (path_or_preset.rfind("preset:", 0) == 0)
        return from_toml(preset_text(path_or_preset.substr(7)));
    std::ifstream in(path_or_preset);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path_or_preset);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_toml(ss.str());
}

}  // namespace fiberlink::scenario
