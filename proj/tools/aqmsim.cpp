#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "aqmsim/config.hpp"
#include "aqmsim/fleet.hpp"
#include "aqmsim/harness.hpp"
#include "aqmsim/stats.hpp"
#include "aqmsim/version.hpp"

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

void print_fleet_summary(const aqmsim::FleetSummary& s) {
    for (const auto& [d, v] : s.variants) {
        std::cout << "variant=" << aqmsim::to_string(d) << " devices=" << v.device_count
                  << " median_mean_ms=" << aqmsim::format6(v.median_mean_ms)
                  << " median_max_ms=" << aqmsim::format6(v.median_max_ms)
                  << " low_band_fraction=" << aqmsim::format6(v.hist_fraction[1]) << "\n";
    }
    std::cout << "invalid_devices=" << s.invalid_count << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Access-link latency testbed: rate-shaped bottleneck simulation"};
    app.set_version_flag("--version", aqmsim::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool print_config = false;

    CLI::App* simulate = app.add_subcommand("simulate", "Run one latency-under-load test");
    simulate->add_option("--config", config_path, "key=value config file");
    simulate->add_option("--seed", seed, "override the run seed");
    simulate->add_option("--out", out_dir, "directory for report.json and samples.csv");
    simulate->add_flag("--print-config", print_config, "print the effective config and exit");

    CLI::App* fleet = app.add_subcommand("fleet", "Run a device population");
    fleet->add_option("--config", config_path, "key=value config file");
    fleet->add_option("--seed", seed, "override the master seed");
    CLI::Option* fleet_out =
        fleet->add_option("--out", out_dir, "directory for fleet reports");
    fleet->add_option("--workers", workers, "worker threads");
    fleet->add_flag("--print-config", print_config, "print the effective config and exit");

    std::string devices_path;
    CLI::App* report = app.add_subcommand("report", "Summarize a devices.csv");
    report->add_option("--devices", devices_path, "devices.csv to summarize")->required();
    report->add_option("--out", out_dir, "directory for derived cdf/histogram csvs");

    std::string devices_a, devices_b;
    CLI::App* cmp = app.add_subcommand("compare", "Diff two devices.csv files");
    cmp->add_option("a", devices_a, "first devices.csv")->required();
    cmp->add_option("b", devices_b, "second devices.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (simulate->parsed()) {
        aqmsim::TestConfig cfg;
        if (!config_path.empty()) {
            aqmsim::apply_test_config(aqmsim::parse_config_file(config_path), cfg);
        }
        if (seed) cfg.seed = *seed;
        cfg.validate();
        if (print_config) {
            std::cout << aqmsim::print_test_config(cfg);
            return 0;
        }
        // Model the shared load server's admission gate: reserve the client's
        // shaped rate for the duration of the test.
        aqmsim::AdmissionControl server(1'000'000'000);
        auto grant = server.admit(cfg.link.rate_bps);
        if (!grant) throw std::runtime_error("load server refused the test reservation");
        server.set_client_busy(true);
        aqmsim::TestReport rep = aqmsim::run_latency_under_load(cfg);
        server.set_client_busy(false);
        server.release(*grant);

        std::string json = aqmsim::report_to_json(rep).dump(2) + "\n";
        std::cout << json;
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            write_file(std::filesystem::path(out_dir) / "report.json", json);
            write_file(std::filesystem::path(out_dir) / "samples.csv",
                       aqmsim::report_samples_csv(rep));
        }
        return rep.invalid ? 1 : 0;
    }

    if (fleet->parsed()) {
        aqmsim::FleetConfig cfg;
        if (!config_path.empty()) {
            aqmsim::apply_fleet_config(aqmsim::parse_config_file(config_path), cfg);
        }
        if (seed) cfg.master_seed = *seed;
        cfg.validate();
        if (print_config) {
            std::cout << aqmsim::print_fleet_config(cfg);
            return 0;
        }
        if (!*fleet_out) throw std::runtime_error("fleet requires --out");
        aqmsim::FleetSummary s = aqmsim::run_fleet(cfg, workers);
        aqmsim::emit_reports(s, out_dir);
        print_fleet_summary(s);
        return 0;
    }

    if (report->parsed()) {
        std::vector<aqmsim::DeviceRow> rows = aqmsim::load_device_csv(devices_path);
        aqmsim::FleetConfig cfg;
        cfg.devices = static_cast<std::uint32_t>(std::max<std::size_t>(1, rows.size()));
        aqmsim::FleetSummary s = aqmsim::summarize_rows(cfg, std::move(rows));
        if (!out_dir.empty()) {
            std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            aqmsim::FleetSummary full = s;
            aqmsim::emit_reports(full, dir);
            // report regenerates derived views only; drop the fabricated manifest.
            std::filesystem::remove(dir / "manifest.json");
            std::filesystem::remove(dir / "devices.csv");
        }
        print_fleet_summary(s);
        return 0;
    }

    if (cmp->parsed()) {
        aqmsim::FleetConfig cfg;
        aqmsim::FleetSummary a = aqmsim::summarize_rows(cfg, aqmsim::load_device_csv(devices_a));
        aqmsim::FleetSummary b = aqmsim::summarize_rows(cfg, aqmsim::load_device_csv(devices_b));
        std::cout << aqmsim::comparison_to_text(aqmsim::compare(a, b));
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        // Bad input: config values, malformed csv, unusable flag combinations.
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
