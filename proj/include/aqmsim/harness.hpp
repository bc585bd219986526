#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqmsim/link.hpp"
#include "aqmsim/qdisc.hpp"
#include "aqmsim/sim_time.hpp"
#include "aqmsim/stats.hpp"

namespace aqmsim {

enum class Discipline { buffer_control_fifo, docsis_pie };

std::string to_string(Discipline d);
Discipline discipline_from_string(const std::string& s);

// One device-under-test scenario: load the upstream, wait for ramp-up, then
// probe latency for a fixed window.
struct TestConfig {
    std::string label = "run";
    std::uint64_t seed = 1;
    Discipline discipline = Discipline::docsis_pie;
    LinkConfig link;

    std::uint32_t load_flows = 4;
    std::uint32_t mss = 1500;
    std::uint64_t cross_rate_bps = 0;  // constant-rate background, 0 = off

    SimTime probe_duration = SimTime::from_s(7);
    // The mirror-direction window; carried in configs and echoes for symmetry
    // but the engine only exercises the upstream path.
    SimTime downstream_probe_duration = SimTime::from_s(11);
    SimTime warmup_cap = SimTime::from_s(5);
    SimTime probe_timeout = SimTime::from_s(3);
    std::uint32_t probe_size = 64;

    SimTime fifo_target_delay = SimTime::from_ms(250);  // static buffer sizing
    PieParams pie;

    void validate() const;
};

struct TestReport {
    std::string label;
    TestConfig config;

    std::vector<SimTime> rtts;  // completed probe round trips; censored probes
                                // carry no delay and are only counted
    std::vector<std::uint64_t> rtt_seqs;  // probe seq of each entry in rtts
    std::uint64_t censored_count = 0;
    std::uint64_t discarded_responses = 0;

    LatencySummary stats;
    double achieved_throughput_bps = 0;

    SimTime ramp_up_at{};
    bool ramp_flagged = false;  // warm-up cap hit before two steady windows
    bool invalid = false;       // zero probe samples

    std::uint64_t load_sent = 0;
    std::uint64_t load_delivered = 0;
    std::uint64_t load_dropped = 0;
    std::uint64_t probes_sent = 0;
    std::uint64_t probes_dropped = 0;
};

// Orchestration gate: a shared measurement server with finite capacity and a
// client that runs one test at a time.
class AdmissionControl {
  public:
    explicit AdmissionControl(std::uint64_t server_capacity_bps);

    // Reserves `demand_bps` if it fits and the client is free. Returns a
    // reservation id, or nothing on rejection. Reservations from many clients
    // coexist; the busy flag belongs to the one client this state tracks.
    std::optional<std::uint64_t> admit(std::uint64_t demand_bps);
    void release(std::uint64_t reservation_id);

    void set_client_busy(bool b) { client_busy_ = b; }
    std::uint64_t reserved_bps() const { return reserved_; }
    bool client_busy() const { return client_busy_; }

  private:
    struct Reservation {
        std::uint64_t id;
        std::uint64_t demand;
    };
    std::uint64_t capacity_;
    std::uint64_t reserved_ = 0;
    bool client_busy_ = false;
    std::uint64_t next_id_ = 1;
    std::vector<Reservation> live_;
};

// Scans non-overlapping 500 ms windows of a 100 ms throughput series for the
// first two consecutive windows at >= 90% of the shaped rate; returns the end
// of the second. Falls back to `warmup_cap` (flag set) when that never
// happens.
SimTime detect_ramp_up(const std::vector<double>& bps_per_100ms,
                       std::uint64_t shaped_rate_bps, SimTime warmup_cap,
                       bool* flagged);

TestReport run_latency_under_load(const TestConfig& cfg);

nlohmann::ordered_json config_to_json(const TestConfig& cfg);
nlohmann::ordered_json report_to_json(const TestReport& r);
std::string report_samples_csv(const TestReport& r);

}  // namespace aqmsim
