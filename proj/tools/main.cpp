#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fiberlink/analysis.hpp"
#include "fiberlink/cascade.hpp"
#include "fiberlink/csv.hpp"
#include "fiberlink/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Scenario source: a .toml path, "preset:NAME", or a run_manifest.json from
/// an earlier run (exact re-run).
struct ScenarioSource {
    std::string text;
    fiberlink::cascade::Scenario scenario;
    std::string origin;
};

ScenarioSource load_source(const std::string& arg) {
    ScenarioSource src;
    src.origin = arg;
    if (arg.rfind("preset:", 0) == 0) {
        src.text = fiberlink::scenario::preset_text(arg.substr(7));
    } else if (fs::path(arg).extension() == ".json") {
        const json manifest = json::parse(read_file(arg));
        if (!manifest.contains("scenario"))
            throw DomainError("manifest has no embedded scenario: " + arg);
        src.text = manifest["scenario"].get<std::string>();
    } else {
        src.text = read_file(arg);
    }
    src.scenario = fiberlink::scenario::from_toml(src.text);
    return src;
}

fs::path output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FIBERLINK_OUT")) return env;
    return ".";
}

std::vector<double> log_spaced_taus(double tau_min, double tau_max) {
    // 1-2-5 per decade.
    std::vector<double> taus;
    for (double decade = std::pow(10.0, std::floor(std::log10(tau_min)));
         decade <= tau_max * 1.0000001; decade *= 10.0)
        for (double m : {1.0, 2.0, 5.0}) {
            const double tau = m * decade;
            if (tau >= tau_min * 0.9999999 && tau <= tau_max * 1.0000001) taus.push_back(tau);
        }
    return taus;
}

int cmd_simulate(const std::string& scenario_arg, const std::string& out_flag,
                 std::int64_t seed_override) {
    ScenarioSource src = load_source(scenario_arg);
    if (seed_override >= 0) src.scenario.run.seed = static_cast<std::uint64_t>(seed_override);

    const fs::path dir = output_dir(out_flag);
    fs::create_directories(dir);

    const auto out = fiberlink::cascade::run(src.scenario);
    const double dt = 1.0 / out.end_to_end.rate_hz;

    {
        fiberlink::csv::Writer w(dir / "end_to_end.csv", {"t_s", "phase_rad"});
        for (std::size_t n = 0; n < out.end_to_end.samples.size(); ++n)
            w.row({static_cast<double>(n) * dt, out.end_to_end.samples[n]});
    }
    {
        std::vector<std::string> cols = {"t_s"};
        for (std::size_t i = 0; i < out.corrections.size(); ++i)
            cols.push_back("corr_" + std::to_string(i + 1) + "_hz");
        fiberlink::csv::Writer w(dir / "corrections.csv", cols);
        const std::size_t n_rows = out.corrections.front().hz.size();
        std::vector<double> row(cols.size());
        for (std::size_t n = 0; n < n_rows; ++n) {
            row[0] = static_cast<double>(n) * dt;
            for (std::size_t i = 0; i < out.corrections.size(); ++i)
                row[i + 1] = out.corrections[i].hz[n];
            w.row(row);
        }
    }
    {
        fiberlink::csv::Writer w(dir / "modes.csv", {"t_s", "station", "mode"});
        for (const auto& m : out.modes)
            w.row_mixed({fiberlink::csv::format_double(m.t_s), std::to_string(m.station + 1),
                         fiberlink::station::to_string(m.mode)});
    }
    {
        fiberlink::csv::Writer w(dir / "events.csv", {"t_s", "kind", "value", "index"});
        for (const auto& e : out.events)
            w.row_mixed({fiberlink::csv::format_double(e.t_s), e.kind,
                         fiberlink::csv::format_double(e.value), std::to_string(e.index + 1)});
    }
    {
        json manifest;
        manifest["version"] = kVersion;
        manifest["seed"] = out.seed;
        manifest["mode"] =
            src.scenario.run.mode == fiberlink::cascade::RunMode::Full ? "full" : "envelope";
        manifest["rate_hz"] = src.scenario.run.rate_hz;
        manifest["duration_s"] = src.scenario.run.duration_s;
        manifest["carrier_hz"] = src.scenario.run.carrier_hz;
        manifest["segments"] = src.scenario.segments.size();
        manifest["scenario"] = src.text;
        manifest["columns"] = {
            {"end_to_end.csv", "t_s, phase_rad (optical-carrier radians)"},
            {"corrections.csv", "t_s, corr_N_hz (AOM1 frequency deviation per segment)"},
            {"modes.csv", "t_s, station (1-based), mode"},
            {"events.csv", "t_s, kind, value (ps | dB | count), index (1-based)"}};
        std::ofstream m(dir / "run_manifest.json", std::ios::binary);
        m << manifest.dump(2) << "\n";
    }
    std::cout << "wrote bundle to " << dir.string() << " (seed " << out.seed << ")\n";
    return 0;
}

int cmd_analyze(const std::string& bundle, const std::string& out_flag, bool want_adev,
                bool want_psd, bool want_rejection, bool want_slips, double gate_s,
                double bandwidth_hz, double slip_threshold_ps, std::size_t psd_segments) {
    const fs::path in_dir = bundle;
    const fs::path dir = output_dir(out_flag);
    fs::create_directories(dir);

    const json manifest = json::parse(read_file(in_dir / "run_manifest.json"));
    const double carrier = manifest["carrier_hz"].get<double>();
    const auto n_segments = manifest["segments"].get<std::size_t>();

    const auto table = fiberlink::csv::read(in_dir / "end_to_end.csv");
    fiberlink::PhaseSeries phase;
    phase.samples = table.numeric_column("phase_rad");
    const auto t = table.numeric_column("t_s");
    if (t.size() < 2) throw DomainError("end_to_end.csv: need at least 2 rows");
    phase.rate_hz = 1.0 / (t[1] - t[0]);

    auto correction_series = [&](std::size_t seg) {
        const auto corr = fiberlink::csv::read(in_dir / "corrections.csv");
        fiberlink::cascade::CorrectionSeries c;
        c.hz = corr.numeric_column("corr_" + std::to_string(seg + 1) + "_hz");
        c.rate_hz = phase.rate_hz;
        return c;
    };

    if (want_adev) {
        fiberlink::analysis::CounterModel counter{gate_s, bandwidth_hz};
        const auto y = fiberlink::analysis::counter_read(phase, carrier, counter);
        const double span = static_cast<double>(y.samples.size()) / y.rate_hz;
        const auto taus = log_spaced_taus(gate_s, span / 4.0);
        const auto result = fiberlink::analysis::adev(y, taus);
        fiberlink::csv::Writer w(dir / "adev.csv", {"tau_s", "adev", "n_samples"});
        for (const auto& p : result.adev)
            w.row({p.tau_s, p.adev, static_cast<double>(p.n_samples)});
    }
    if (want_psd) {
        const auto psd = fiberlink::analysis::psd_welch(phase, psd_segments);
        fiberlink::csv::Writer w(dir / "psd.csv", {"f_hz", "psd_rad2_hz"});
        for (const auto& b : psd) w.row({b.f_hz, b.psd});
    }
    if (want_rejection) {
        // Free-running reference: n_segments x the first segment's witness
        // (the correction record), matching the compensated cascade.
        const auto witness = fiberlink::cascade::correction_phase(correction_series(0));
        auto free_psd = fiberlink::analysis::psd_welch(witness, psd_segments);
        for (auto& b : free_psd) b.psd *= static_cast<double>(n_segments);
        const auto comp_psd = fiberlink::analysis::psd_welch(phase, psd_segments);
        const auto rej = fiberlink::analysis::measure_rejection(free_psd, comp_psd);
        fiberlink::csv::Writer w(dir / "rejection.csv", {"f_hz", "rejection_db"});
        for (const auto& b : rej) w.row({b.f_hz, b.rejection_db});
    }
    if (want_slips) {
        fiberlink::csv::Writer w(dir / "slips.csv", {"t_s", "magnitude_ps", "segment"});
        for (std::size_t seg = 0; seg < n_segments; ++seg) {
            const auto c = fiberlink::cascade::correction_phase(correction_series(seg));
            for (const auto& s :
                 fiberlink::analysis::detect_cycle_slips(c, carrier, slip_threshold_ps))
                w.row({s.t_s, s.magnitude_ps, static_cast<double>(seg + 1)});
        }
    }
    return 0;
}

int cmd_budget(const std::string& scenario_arg) {
    const ScenarioSource src = load_source(scenario_arg);
    bool needs_gain = false;
    for (std::size_t i = 0; i < src.scenario.segments.size(); ++i) {
        const auto b = fiberlink::channel::link_budget(src.scenario.segments[i],
                                                       src.scenario.budget);
        std::printf("link %zu\n", i + 1);
        for (const auto& item : b.items) std::printf("  %-36s %8.2f dB\n", item.label.c_str(), item.db);
        std::printf("  %-36s %8.2f dB\n", "one-way passive", b.one_way_passive_db);
        std::printf("  %-36s %8.2f dB\n", "round-trip passive", b.round_trip_passive_db);
        std::printf("  %-36s %8.2f dB\n", "one-way net of gain", b.one_way_db);
        std::printf("  %-36s %8.2f dB\n", "round-trip net of gain", b.round_trip_db);
        std::printf("  %-36s %8.2f dB%s\n", "margin vs receiver limit", b.margin_db,
                    b.margin_db < 0.0 ? "  AMPLIFICATION REQUIRED" : "");
        const auto passive = fiberlink::channel::link_budget(
            [&] {
                auto seg = src.scenario.segments[i];
                for (auto& sp : seg.spans) sp.edfa.clear();
                return seg;
            }(),
            src.scenario.budget);
        if (passive.margin_db < 0.0) needs_gain = true;
        std::printf("  %-36s %8.2f dB%s\n\n", "margin without EDFA", passive.margin_db,
                    passive.margin_db < 0.0 ? "  AMPLIFICATION REQUIRED" : "");
    }
    return needs_gain ? 0 : 0;
}

int cmd_freqplan(const std::string& scenario_arg) {
    const ScenarioSource src = load_source(scenario_arg);
    std::vector<fiberlink::station::FrequencyPlan> plans;
    for (const auto& st : src.scenario.stations) plans.push_back(st.plan);
    const auto s = fiberlink::station::freq_plan_delivered_offset(plans);
    std::printf("delivered-frequency sensitivity (exact rationals)\n");
    std::printf("  %-24s %-16s %s\n", "term", "coefficient", "verdict");
    std::printf("  %-24s %-16s %s\n", "input frequency nu",
                s.nu_coefficient.str().c_str(),
                s.nu_coefficient == fiberlink::Rational(1) ? "PASS" : "FAIL");
    bool ok = s.nu_coefficient == fiberlink::Rational(1);
    for (std::size_t i = 0; i < s.lo_coefficients_hz.size(); ++i) {
        const bool zero = s.lo_coefficients_hz[i].is_zero();
        ok = ok && zero;
        const std::string label = i + 1 <= plans.size()
                                      ? "station " + std::to_string(i + 1) + " LO (Hz/frac)"
                                      : "terminal LO (Hz/frac)";
        std::printf("  %-24s %-16s %s\n", label.c_str(), s.lo_coefficients_hz[i].str().c_str(),
                    zero ? "PASS" : "FAIL");
    }
    std::printf("%s\n", ok ? "PASS: delivered frequency is LO-drift immune"
                           : "FAIL: delivered frequency depends on an LO");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fiberlink: simulator and metrology toolkit for cascaded, actively "
                 "compensated fiber frequency-transfer links"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string scenario_arg, out_flag;
    std::int64_t seed_override = -1;

    auto* sim = app.add_subcommand("simulate", "run a scenario and write a CSV bundle");
    sim->add_option("scenario", scenario_arg,
                    "scenario file, preset:NAME, or run_manifest.json")
        ->required();
    sim->add_option("--out", out_flag, "output directory (default $FIBERLINK_OUT or .)");
    sim->add_option("--seed", seed_override, "override the scenario seed");

    std::string bundle;
    bool want_adev = false, want_psd = false, want_rejection = false, want_slips = false;
    double gate_s = 1.0, bandwidth_hz = 0.0, slip_threshold_ps = 100.0;
    std::size_t psd_segments = 8;
    auto* ana = app.add_subcommand("analyze", "compute metrology reports from a bundle");
    ana->add_option("bundle", bundle, "bundle directory from simulate")->required();
    ana->add_option("--out", out_flag, "output directory (default $FIBERLINK_OUT or .)");
    ana->add_flag("--adev", want_adev, "write adev.csv");
    ana->add_flag("--psd", want_psd, "write psd.csv");
    ana->add_flag("--rejection", want_rejection, "write rejection.csv");
    ana->add_flag("--slips", want_slips, "write slips.csv");
    ana->add_option("--gate", gate_s, "counter gate, s (default 1)");
    ana->add_option("--bandwidth", bandwidth_hz, "counter pre-filter bandwidth, Hz (0 = off)");
    ana->add_option("--slip-threshold", slip_threshold_ps, "slip threshold, ps (default 100)");
    ana->add_option("--segments", psd_segments, "Welch segment count (default 8)");

    std::string budget_arg;
    auto* bud = app.add_subcommand("budget", "itemized attenuation budget per link");
    bud->add_option("scenario", budget_arg, "scenario file or preset:NAME")->required();

    std::string plan_arg;
    auto* fp = app.add_subcommand("freqplan", "exact-rational LO sensitivity of the plan");
    fp->add_option("scenario", plan_arg, "scenario file or preset:NAME")->required();

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(scenario_arg, out_flag, seed_override);
        if (ana->parsed())
            return cmd_analyze(bundle, out_flag, want_adev, want_psd, want_rejection,
                               want_slips, gate_s, bandwidth_hz, slip_threshold_ps,
                               psd_segments);
        if (bud->parsed()) return cmd_budget(budget_arg);
        if (fp->parsed()) return cmd_freqplan(plan_arg);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
