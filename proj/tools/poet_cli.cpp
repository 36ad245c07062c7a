#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "poet/capture.hpp"
#include "poet/models.hpp"
#include "poet/synth.hpp"
#include "poet/tracker.hpp"

namespace {

constexpr int kExitClean = 0;
constexpr int kExitError = 1;
constexpr int kExitAnomalies = 2;

class CliError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("poet");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("POET_LOG"); env && *env) {
        level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; keep warnings unless "off" was asked for.
        if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
    }
    spdlog::set_level(level);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw CliError("failed writing '" + path + "'");
}

poet::Json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot read '" + path + "'");
    try {
        return poet::Json::parse(in);
    } catch (const poet::Json::parse_error& e) {
        throw CliError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::unique_ptr<poet::CaptureReader> open_capture(const std::string& path) {
    try {
        return std::make_unique<poet::CaptureReader>(poet::CaptureReader::open(path));
    } catch (const poet::CaptureOpenError& e) {
        throw CliError(e.what());
    }
}

int run_analyze(const std::string& pcap, const std::string& report_path, const std::string& alerts_path,
                const std::string& system_name) {
    auto reader = open_capture(pcap);
    std::ofstream alerts_file;
    std::ostream* alerts = &std::cout;
    if (!alerts_path.empty()) {
        alerts_file.open(alerts_path, std::ios::binary | std::ios::trunc);
        if (!alerts_file) throw CliError("cannot open '" + alerts_path + "' for writing");
        alerts = &alerts_file;
    }
    poet::TrackerConfig config;
    config.system_name = system_name;
    auto sink = [alerts](const poet::AnomalyAlert& a) { *alerts << poet::to_json(a).dump() << '\n'; };
    poet::Tracker tracker = poet::process_capture(*reader, config, sink);
    alerts->flush();
    if (!report_path.empty()) write_text(report_path, tracker.report().dump(2) + "\n");
    spdlog::info("{} frames, {} anomalies, {} diagnostics", tracker.report()["summary"]["frames"].get<std::uint64_t>(),
                 tracker.anomaly_count(), tracker.diagnostic_count());
    return tracker.anomaly_count() > 0 ? kExitAnomalies : kExitClean;
}

int run_synth(const std::string& spec_path, const std::string& builtin, const std::string& prefix) {
    poet::ScenarioSpec spec;
    try {
        spec = builtin.empty() ? poet::scenario_from_json(read_json(spec_path)) : poet::builtin_scenario(builtin);
        poet::SynthOutput out = poet::synthesize(spec);
        auto frames = out.raw_frames();
        poet::write_file(prefix + ".pcap", poet::encode_pcap(frames));
        write_text(prefix + ".manifest.json", out.manifest.dump(2) + "\n");
        spdlog::info("wrote {} frames to {}.pcap", frames.size(), prefix);
    } catch (const poet::InvalidScenario& e) {
        throw CliError(std::string("invalid scenario: ") + e.what());
    } catch (const poet::CaptureOpenError& e) {
        throw CliError(e.what());
    }
    return kExitClean;
}

int run_inventory(const std::string& pcap, const std::string& out_path) {
    auto reader = open_capture(pcap);
    poet::Tracker tracker = poet::process_capture(*reader);
    std::string doc = tracker.inventory().export_document().dump(2) + "\n";
    if (out_path.empty() || out_path == "-") std::cout << doc;
    else write_text(out_path, doc);
    return kExitClean;
}

int run_fsm_export(const std::string& kind_text, const std::string& out_path) {
    auto kind = poet::parse_fsm_kind(kind_text);
    if (!kind) throw CliError("unknown FSM kind '" + kind_text + "' (expected device, connection or system)");
    std::string doc = poet::export_definition(*kind).dump(2) + "\n";
    if (out_path.empty() || out_path == "-") std::cout << doc;
    else write_text(out_path, doc);
    return kExitClean;
}

/// Human-readable digest of a report written by `analyze --report`.
int run_report(const std::string& report_path, bool as_json) {
    poet::Json doc = read_json(report_path);
    if (!doc.contains("summary") || !doc.contains("final_states"))
        throw CliError("'" + report_path + "' is not an analysis report");
    const auto& s = doc["summary"];
    std::size_t anomalies = s.value("anomalies", std::size_t{0});
    if (as_json) {
        std::cout << poet::Json{{"summary", s}, {"final_states", doc["final_states"]}}.dump(2) << '\n';
        return anomalies > 0 ? kExitAnomalies : kExitClean;
    }
    std::ostringstream out;
    out << "system " << s.value("system_name", "") << ": " << s.value("frames", 0) << " frames, " << anomalies
        << " anomalies, " << s.value("diagnostics", 0) << " diagnostics\n";
    const auto& fs = doc["final_states"];
    out << "  system     " << fs["system"].value("state", "") << " (" << fs["system"].value("operation", "") << ")\n";
    for (const auto& d : fs["devices"]) {
        out << "  device     " << d.value("key", "") << "  " << d.value("state", "");
        if (d.contains("name_of_station")) out << "  " << d["name_of_station"].get<std::string>();
        out << '\n';
    }
    for (const auto& c : fs["connections"])
        out << "  connection " << c.value("key", "") << "  " << c.value("state", "") << '\n';
    for (const auto& a : doc.value("alerts", poet::Json::array())) {
        if (a.value("severity", "") != "anomaly") continue;
        out << "  ! frame " << a["cause"].value("capture_index", 0) << ": " << a.value("instance_key", "") << " "
            << a.value("explanation", "") << '\n';
    }
    std::cout << out.str();
    return anomalies > 0 ? kExitAnomalies : kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Passive PROFINET operation tracker"};
    app.require_subcommand(1);

    std::string pcap, report_path, alerts_path, system_name = "poet-system";
    auto* analyze = app.add_subcommand("analyze", "Track a capture and report anomalies");
    analyze->add_option("pcap", pcap, "pcap or pcapng file")->required();
    analyze->add_option("--report", report_path, "Write the full JSON report here");
    analyze->add_option("--alerts", alerts_path, "Write JSON-lines alerts here instead of stdout");
    analyze->add_option("--system-name", system_name, "Key of the System FSM instance");

    std::string spec_path, builtin, prefix;
    auto* synth = app.add_subcommand("synth", "Generate a scenario capture and its manifest");
    auto* spec_opt = synth->add_option("--spec", spec_path, "Scenario JSON document");
    auto* builtin_opt = synth->add_option("--builtin", builtin, "Builtin scenario name");
    spec_opt->excludes(builtin_opt);
    synth->add_option("--out", prefix, "Output prefix; writes PREFIX.pcap and PREFIX.manifest.json");
    bool list_builtins = false;
    synth->add_flag("--list", list_builtins, "Print builtin scenario names");

    std::string inv_pcap, inv_out;
    auto* inventory = app.add_subcommand("inventory", "Export the passive asset inventory");
    inventory->add_option("pcap", inv_pcap, "pcap or pcapng file")->required();
    inventory->add_option("--out", inv_out, "Output JSON file ('-' for stdout)");

    std::string kind, def_out;
    auto* fsm_export = app.add_subcommand("fsm-export", "Export an FSM definition");
    fsm_export->add_option("kind", kind, "device, connection or system")->required();
    fsm_export->add_option("--out", def_out, "Output JSON file ('-' for stdout)");

    std::string report_in;
    bool report_json = false;
    auto* report = app.add_subcommand("report", "Summarize a report written by analyze");
    report->add_option("report", report_in, "Report JSON file")->required();
    report->add_flag("--json", report_json, "Print summary and final states as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitClean : kExitError;
    }

    try {
        if (*analyze) return run_analyze(pcap, report_path, alerts_path, system_name);
        if (*synth) {
            if (list_builtins) {
                for (const auto& n : poet::builtin_scenario_names()) std::cout << n << '\n';
                return kExitClean;
            }
            if (spec_path.empty() == builtin.empty()) throw CliError("synth needs exactly one of --spec or --builtin");
            if (prefix.empty()) throw CliError("synth needs --out PREFIX");
            return run_synth(spec_path, builtin, prefix);
        }
        if (*inventory) return run_inventory(inv_pcap, inv_out);
        if (*fsm_export) return run_fsm_export(kind, def_out);
        if (*report) return run_report(report_in, report_json);
    } catch (const CliError& e) {
        spdlog::error("{}", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        spdlog::error("unexpected failure: {}", e.what());
        return kExitError;
    }
    return kExitError;
}
