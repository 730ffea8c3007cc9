#include "cdfig/metrics.hpp"
#include "cdfig/scenario.hpp"
#include "cdfig/simulation.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace cdfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAbort = 2;

fs::path metrics_path_for(const fs::path& log)
{
    fs::path p = log;
    p.replace_extension(".metrics");
    return p;
}

std::vector<Override> seed_override(const std::optional<long long>& seed)
{
    if (!seed)
        return {};
    return {{"run.seed", std::to_string(*seed)}};
}

// "section.key=value" pairs from --set
std::vector<Override> parse_sets(const std::vector<std::string>& sets)
{
    std::vector<Override> out;
    for (const auto& item : sets) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ScenarioError("--set " + item + ": expected section.key=value");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

std::vector<std::string> split_values(const std::string& list)
{
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

int cmd_validate(const std::string& file, const std::vector<std::string>& sets, bool quiet)
{
    try {
        load_scenario(file, parse_sets(sets));
    } catch (const ScenarioError& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (!quiet)
        std::cout << file << ": ok\n";
    return kExitOk;
}

int cmd_run(const std::string& file, const std::string& out, std::optional<long long> seed,
            const std::vector<std::string>& sets, bool quiet)
{
    Scenario sc;
    try {
        auto ov = parse_sets(sets);
        const auto so = seed_override(seed);
        ov.insert(ov.end(), so.begin(), so.end());
        sc = load_scenario(file, ov);
    } catch (const ScenarioError& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kExitInvalid;
    }
    fs::path log_path = fs::path("out") / fs::path(file).filename().replace_extension(".csv");
    if (!out.empty())
        log_path = out;
    else if (!sc.output_path.empty())
        log_path = sc.output_path;
    try {
        const RunResult r = run(sc);
        if (log_path.has_parent_path())
            fs::create_directories(log_path.parent_path());
        r.log.write_csv(log_path);
        r.metrics.write(metrics_path_for(log_path));
        if (!quiet) {
            std::cout << "wrote " << log_path.string() << " (" << r.log.rows() << " rows)\n";
            r.metrics.write(std::cout);
        }
    } catch (const SimulationError& e) {
        std::cerr << e.what() << '\n';
        return kExitAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAbort;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& file, const std::string& param, const std::string& values,
              const std::string& out_dir, std::optional<long long> seed, unsigned jobs, bool quiet)
{
    const auto vals = split_values(values);
    if (vals.empty()) {
        std::cerr << "sweep: --values is empty\n";
        return kExitInvalid;
    }
    std::vector<Scenario> scenarios;
    try {
        for (const auto& v : vals) {
            auto ov = seed_override(seed);
            ov.emplace_back(param, v);
            scenarios.push_back(load_scenario(file, ov));
        }
    } catch (const ScenarioError& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return kExitInvalid;
    }

    const fs::path dir = out_dir.empty() ? fs::path("out") / "sweep" : fs::path(out_dir);
    fs::create_directories(dir);
    const std::string stem = fs::path(file).stem().string();

    std::vector<std::optional<RunMetrics>> metrics(scenarios.size());
    std::vector<std::string> errors(scenarios.size());
    std::mutex print_mutex;
    auto work = [&](std::size_t i) {
        try {
            const RunResult r = run(scenarios[i]);
            const fs::path log = dir / (stem + "_" + std::to_string(i) + ".csv");
            r.log.write_csv(log);
            r.metrics.write(metrics_path_for(log));
            metrics[i] = r.metrics;
            if (!quiet) {
                std::lock_guard lock(print_mutex);
                std::cout << param << "=" << vals[i] << " -> " << log.string() << '\n';
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    // results are keyed by index, so completion order does not matter
    jobs = std::max(1u, jobs);
    for (std::size_t start = 0; start < scenarios.size(); start += jobs) {
        std::vector<std::thread> pool;
        for (std::size_t i = start; i < std::min(scenarios.size(), start + jobs); ++i)
            pool.emplace_back(work, i);
        for (auto& t : pool)
            t.join();
    }

    std::ofstream table(dir / (stem + "_sweep.csv"));
    table << "index,param,value,p_tracking_rms,q_tracking_rms,reaching_rate,"
             "stator2_frequency_hz,input_power_factor,energy_balance_residual,"
             "constraint_violations,status\n";
    table.precision(17);
    auto opt = [](const std::optional<double>& v) {
        std::ostringstream s;
        s.precision(17);
        if (v)
            s << *v;
        return s.str();
    };
    int rc = kExitOk;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        table << i << ',' << param << ',' << vals[i] << ',';
        if (metrics[i]) {
            const RunMetrics& m = *metrics[i];
            table << opt(m.p_tracking_rms) << ',' << opt(m.q_tracking_rms) << ','
                  << opt(m.reaching_rate) << ',' << opt(m.stator2_frequency_hz) << ','
                  << opt(m.input_power_factor) << ',' << opt(m.energy_balance_residual) << ','
                  << m.constraint_violations << ",ok\n";
        } else {
            table << ",,,,,,,aborted\n";
            std::cerr << "run " << i << " aborted: " << errors[i] << '\n';
            rc = kExitAbort;
        }
    }
    return rc;
}

int cmd_metrics(const std::string& log_file, const std::string& scenario_file,
                const std::string& out, bool quiet)
{
    std::optional<Scenario> sc;
    if (!scenario_file.empty()) {
        try {
            sc = load_scenario(scenario_file);
        } catch (const ScenarioError& e) {
            std::cerr << "invalid scenario: " << e.what() << '\n';
            return kExitInvalid;
        }
    }
    try {
        const TimeSeriesLog log = TimeSeriesLog::read_csv(fs::path(log_file));
        const RunMetrics m = compute_metrics(log, sc ? &*sc : nullptr);
        if (!out.empty())
            m.write(fs::path(out));
        if (!quiet || out.empty())
            m.write(std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAbort;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cascaded DFIG + matrix converter wind generation simulator"};
    app.require_subcommand(1);
    bool quiet = false;
    std::optional<long long> seed;
    std::string out;
    std::vector<std::string> sets;
    app.add_flag("--quiet,-q", quiet, "Suppress progress output");

    std::string scenario_file;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario; write log and metrics");
    run_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
    run_cmd->add_option("--out,-o", out, "Log path (default from the scenario)");
    run_cmd->add_option("--seed", seed, "Override run.seed");
    run_cmd->add_option("--set", sets, "Override a key, section.key=value (repeatable)");
    run_cmd->add_flag("--quiet,-q", quiet, "Suppress progress output");

    auto* val_cmd = app.add_subcommand("validate", "Load and validate a scenario");
    val_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
    val_cmd->add_option("--set", sets, "Override a key, section.key=value (repeatable)");
    val_cmd->add_flag("--quiet,-q", quiet, "Suppress progress output");

    std::string param;
    std::string values;
    unsigned jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per parameter value");
    sweep_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
    sweep_cmd->add_option("--param", param, "Parameter path, e.g. gains.K1")->required();
    sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
    sweep_cmd->add_option("--out,-o", out, "Output directory");
    sweep_cmd->add_option("--seed", seed, "Override run.seed");
    sweep_cmd->add_option("--jobs,-j", jobs, "Parallel runs");
    sweep_cmd->add_flag("--quiet,-q", quiet, "Suppress progress output");

    std::string log_file;
    std::string metrics_scenario;
    auto* met_cmd = app.add_subcommand("metrics", "Recompute metrics from a log");
    met_cmd->add_option("log", log_file, "Log CSV")->required();
    met_cmd->add_option("--scenario", metrics_scenario, "Scenario used for the run");
    met_cmd->add_option("--out,-o", out, "Metrics output path");
    met_cmd->add_flag("--quiet,-q", quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitInvalid;
    }

    if (*run_cmd)
        return cmd_run(scenario_file, out, seed, sets, quiet);
    if (*val_cmd)
        return cmd_validate(scenario_file, sets, quiet);
    if (*sweep_cmd)
        return cmd_sweep(scenario_file, param, values, out, seed, jobs, quiet);
    if (*met_cmd)
        return cmd_metrics(log_file, metrics_scenario, out, quiet);
    std::cerr << app.help();
    return kExitInvalid;
}
