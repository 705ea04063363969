// Command-line front end: simulate, export, analyze, report, power, serve.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "phtwin/analysis.hpp"
#include "phtwin/device_sim.hpp"
#include "phtwin/errors.hpp"
#include "phtwin/metrics.hpp"
#include "phtwin/power.hpp"
#include "phtwin/report.hpp"
#include "phtwin/scenario.hpp"
#include "phtwin/service.hpp"
#include "phtwin/session_io.hpp"
#include "phtwin/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace phtwin;

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Temp file + rename so a failed run never leaves a partial output behind.
void write_atomic(const fs::path& path, const std::string& content)
{
    if (path == "-") {
        std::cout << content;
        return;
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ValidationError(fmt::format("cannot write {}", path.string()));
        out << content;
        out.flush();
        if (!out)
            throw ValidationError(fmt::format("write failed for {}", path.string()));
    }
    fs::rename(tmp, path);
}

Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed)
{
    Scenario s = path.empty() ? reference_run_scenario()
                              : scenario_from_json(nlohmann::json::parse(read_file(path)));
    if (seed) {
        s.seed = *seed;
        s = scenario_from_json(to_json(s));
    }
    return s;
}

std::string format_mw(double v)
{
    return fmt::format("{:.2f}", v);
}

DaqService* g_service = nullptr;

void on_signal(int)
{
    if (g_service)
        g_service->stop();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Intraoral pH telemetry twin: simulation, acquisition and analysis"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write the session as JSONL");
    std::string sim_scenario, sim_out, sim_csv;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--scenario", sim_scenario, "Scenario JSON (default: built-in 5 h reference run)")
        ->check(CLI::ExistingFile);
    sim->add_option("--seed", sim_seed, "Override the scenario seed");
    sim->add_option("--out", sim_out, "Session JSONL output")->required();
    sim->add_option("--csv", sim_csv, "Also write the samples as CSV");

    auto* scn = app.add_subcommand("scenario", "Write a built-in scenario as JSON");
    std::string scn_name = "reference", scn_out = "-";
    std::uint64_t scn_seed = 2026;
    scn->add_option("name", scn_name)->check(CLI::IsMember({"reference", "stability"}));
    scn->add_option("--seed", scn_seed);
    scn->add_option("--out", scn_out);

    auto* exp = app.add_subcommand("export", "Convert a session JSONL to another format");
    std::string exp_in, exp_out, exp_format = "csv";
    exp->add_option("session", exp_in)->required()->check(CLI::ExistingFile);
    exp->add_option("--format", exp_format)->check(CLI::IsMember({"jsonl", "csv"}));
    exp->add_option("--out", exp_out)->required();

    auto* ana = app.add_subcommand("analyze", "Compute drift, sensitivity, response and stability");
    std::string ana_in, ana_out, ana_budget;
    std::optional<double> ana_slope;
    bool ana_no_align = false, ana_temp = false;
    ana->add_option("session", ana_in)->required()->check(CLI::ExistingFile);
    ana->add_option("--out", ana_out, "metrics JSON output")->required();
    ana->add_option("--assumed-slope", ana_slope, "mV/pH to use when only one pH level is annotated");
    ana->add_option("--budget", ana_budget, "Power budget file")->check(CLI::ExistingFile);
    ana->add_flag("--no-delay-align", ana_no_align, "Measure response on the raw frame timeline");
    ana->add_flag("--temperature-compensation", ana_temp, "Scale the slope by absolute temperature");

    auto* rep = app.add_subcommand("report", "Render the HTML measurement report");
    std::string rep_in, rep_metrics, rep_out;
    rep->add_option("session", rep_in)->required()->check(CLI::ExistingFile);
    rep->add_option("metrics", rep_metrics)->required()->check(CLI::ExistingFile);
    rep->add_option("--out", rep_out)->required();

    auto* pow = app.add_subcommand("power", "Print the power budget and its totals");
    std::string pow_budget;
    pow->add_option("--budget", pow_budget, "Budget file (default: measured reference budget)")
        ->check(CLI::ExistingFile);

    auto* imp = app.add_subcommand("impedance", "Input impedance of the buffer at a frequency");
    double imp_freq = 1.0;
    imp->add_option("--freq", imp_freq, "Hz");

    auto* srv = app.add_subcommand("serve", "Run the acquisition service with a simulated node");
    std::string srv_host = "127.0.0.1", srv_scenario, srv_journal;
    int srv_port = 8080;
    double srv_speed = 1.0;
    srv->add_option("--host", srv_host);
    srv->add_option("--port", srv_port)->check(CLI::Range(0, 65535));
    srv->add_option("--speed", srv_speed, "Virtual-time speed-up")->check(CLI::PositiveNumber);
    srv->add_option("--scenario", srv_scenario, "Node and link parameters")->check(CLI::ExistingFile);
    srv->add_option("--journal-dir", srv_journal, "Write a JSONL journal per session");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*sim) {
            const Scenario s = load_scenario(sim_scenario, sim_seed);
            const auto result = simulate(s);
            write_atomic(sim_out, export_session(result.session, ExportFormat::Jsonl));
            if (!sim_csv.empty())
                write_atomic(sim_csv, export_session(result.session, ExportFormat::Csv));
            std::cerr << fmt::format("{}: {} samples, {} frames sent, {} dropped, {} missing\n",
                                     result.session.info.id, result.session.samples.size(),
                                     result.data_frames_sent, result.data_frames_dropped,
                                     result.session.missing_total());
        } else if (*scn) {
            const Scenario s = scn_name == "reference" ? reference_run_scenario(scn_seed) : stability_scenario(scn_seed);
            write_atomic(scn_out, to_json(s).dump(2) + "\n");
        } else if (*exp) {
            const auto session = import_session_jsonl(read_file(exp_in));
            write_atomic(exp_out, export_session(session, exp_format));
        } else if (*ana) {
            const auto session = import_session_jsonl(read_file(ana_in));
            AnalysisOptions opt;
            opt.assumed_slope_mv_per_ph = ana_slope;
            opt.align_chain_delay = !ana_no_align;
            opt.temperature_compensation = ana_temp;
            if (!ana_budget.empty())
                opt.power_budget = parse_power_budget(read_file(ana_budget));
            write_atomic(ana_out, to_json(analyze(session, opt)).dump(2) + "\n");
        } else if (*rep) {
            const auto session = import_session_jsonl(read_file(rep_in));
            const auto metrics = metrics_from_json(nlohmann::json::parse(read_file(rep_metrics)));
            write_atomic(rep_out, render_report(session, metrics));
        } else if (*pow) {
            const auto budget = pow_budget.empty() ? reference_budget() : parse_power_budget(read_file(pow_budget));
            const auto totals = power_totals(budget);
            for (const auto& e : budget.entries)
                std::cout << fmt::format("{:<20} {:<22} {:>8.3f} mW{}{}\n", e.component, e.part, e.power_mw,
                                         e.intraoral ? "  intraoral" : "", e.optional ? "  optional" : "");
            std::cout << fmt::format("total                {} mW\n", format_mw(totals.total_mw));
            std::cout << fmt::format("without optional     {} mW\n", format_mw(totals.total_without_optional_mw));
            std::cout << fmt::format("intraoral            {} mW\n", format_mw(totals.intraoral_mw));
        } else if (*imp) {
            std::cout << fmt::format("{:.4f} GOhm\n", input_impedance_gohm(AfeParams{}, imp_freq));
        } else if (*srv) {
            const Scenario s = load_scenario(srv_scenario, std::nullopt);
            std::optional<fs::path> journal;
            if (!srv_journal.empty()) {
                fs::create_directories(srv_journal);
                journal = fs::path(srv_journal);
            }
            SessionStore store(SessionStore::system_clock_ms, journal);
            LiveSimulatedDevice device("sim-node", s.node, s.link, store, srv_speed);
            DaqService service(store);
            service.add_device(device);
            if (srv_port == 0)
                srv_port = service.bind_any_port(srv_host);
            else if (!service.bind(srv_host, srv_port))
                srv_port = -1;
            if (srv_port < 0)
                throw Error(fmt::format("cannot bind {}", srv_host));
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            device.start();
            std::cerr << fmt::format("listening on http://{}:{}\n", srv_host, srv_port);
            service.run();
            device.stop();
            g_service = nullptr;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
