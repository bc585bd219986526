#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aqmsim/harness.hpp"

namespace aqmsim {

// Population model for a fleet study: per-device scenarios drawn from
// (master_seed, device index) only, so devices are reproducible in isolation
// and the population can grow without disturbing existing members.
struct FleetConfig {
    std::uint32_t devices = 1000;
    std::map<Discipline, double> mix = {
        {Discipline::docsis_pie, 0.68},
        {Discipline::buffer_control_fifo, 0.32},
    };
    std::vector<std::pair<std::uint64_t, double>> rate_plans = {
        {5'000'000, 1.0}, {10'000'000, 1.0}, {20'000'000, 1.0}, {35'000'000, 1.0}};
    std::uint32_t flows_min = 1;
    std::uint32_t flows_max = 8;
    double base_rtt_min_ms = 5.0;
    double base_rtt_max_ms = 25.0;
    // Fraction of FIFO devices with oversized static buffers, and the
    // delay-equivalent range those buffers are drawn from.
    double bloated_fraction = 0.15;
    double bloat_delay_min_ms = 500.0;
    double bloat_delay_max_ms = 1500.0;
    std::uint64_t master_seed = 1;

    TestConfig base;  // shared knobs for every device (timings, sizes, pie params)

    void validate() const;
};

struct DeviceRow {
    std::uint32_t device_id = 0;
    Discipline discipline = Discipline::docsis_pie;
    std::uint64_t rate_bps = 0;
    std::uint32_t flows = 0;
    double base_rtt_ms = 0;
    double mean_ms = 0;
    double max_ms = 0;
    double p99_ms = 0;
    bool invalid = false;
};

inline constexpr double kHistBinMs = 15.0;
inline constexpr int kHistBins = 67;  // [0,15) .. [990,1005), then overflow

struct VariantStats {
    std::uint64_t device_count = 0;           // valid devices
    std::vector<double> means_sorted;         // ascending, one per valid device
    std::vector<double> maxes_sorted;
    std::vector<double> hist_fraction;        // kHistBins + 1 entries, sums to 1
    double median_mean_ms = 0;
    double median_max_ms = 0;
};

struct FleetSummary {
    FleetConfig config;
    std::vector<DeviceRow> rows;  // by device_id
    std::map<Discipline, VariantStats> variants;
    std::uint64_t invalid_count = 0;
};

// Deterministic discipline sequence: device i takes whichever variant is
// furthest behind its quota after i assignments; independent of fleet size.
Discipline discipline_for_index(const std::map<Discipline, double>& mix, std::uint32_t i);

std::vector<TestConfig> sample_population(const FleetConfig& cfg);

// Runs every device and aggregates. `workers` threads; output is identical for
// any worker count. Throws when more than 1% of devices come back invalid.
FleetSummary run_fleet(const FleetConfig& cfg, unsigned workers);

// Aggregation alone (shared by run_fleet and the re-derive path).
FleetSummary summarize_rows(const FleetConfig& cfg, std::vector<DeviceRow> rows);

// Writes devices.csv, cdf_mean.csv, cdf_max.csv, histogram.csv, manifest.json.
void emit_reports(const FleetSummary& s, const std::filesystem::path& out_dir);

std::vector<DeviceRow> load_device_csv(const std::filesystem::path& file);

struct ComparisonRow {
    std::string variant;  // "all" or a discipline name
    double delta_median_mean_ms = 0;
    double delta_median_max_ms = 0;
    double delta_low_band_fraction = 0;  // [15,30) bin
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::string verdict;
};

// Signed deltas, a - b; swapping the arguments negates every delta.
Comparison compare(const FleetSummary& a, const FleetSummary& b);
std::string comparison_to_text(const Comparison& c);

}  // namespace aqmsim
