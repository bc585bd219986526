#include "aqmsim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include "aqmsim/aimd.hpp"
#include "aqmsim/probe.hpp"
#include "aqmsim/rng.hpp"

namespace aqmsim {

std::string to_string(Discipline d) {
    switch (d) {
        case Discipline::buffer_control_fifo: return "buffer_control_fifo";
        case Discipline::docsis_pie: return "docsis_pie";
    }
    throw std::logic_error("unknown discipline");
}

Discipline discipline_from_string(const std::string& s) {
    if (s == "buffer_control_fifo" || s == "fifo") return Discipline::buffer_control_fifo;
    if (s == "docsis_pie" || s == "pie") return Discipline::docsis_pie;
    throw std::invalid_argument("unknown discipline: " + s);
}

void TestConfig::validate() const {
    link.validate();
    pie.validate();
    if (load_flows > 16) throw std::invalid_argument("load_flows must be <= 16");
    if (mss < kMinPacketBytes || mss > kMaxPacketBytes) {
        throw std::invalid_argument("mss outside [64, 1500]");
    }
    if (probe_size < kMinPacketBytes || probe_size > kMaxPacketBytes) {
        throw std::invalid_argument("probe_size outside [64, 1500]");
    }
    if (probe_duration.is_zero()) throw std::invalid_argument("probe_duration must be > 0");
    if (probe_timeout.is_zero()) throw std::invalid_argument("probe_timeout must be > 0");
    if (warmup_cap.is_zero()) throw std::invalid_argument("warmup_cap must be > 0");
}

AdmissionControl::AdmissionControl(std::uint64_t server_capacity_bps)
    : capacity_(server_capacity_bps) {}

std::optional<std::uint64_t> AdmissionControl::admit(std::uint64_t demand_bps) {
    if (client_busy_) return std::nullopt;
    if (reserved_ + demand_bps > capacity_) return std::nullopt;
    std::uint64_t id = next_id_++;
    live_.push_back(Reservation{id, demand_bps});
    reserved_ += demand_bps;
    return id;
}

void AdmissionControl::release(std::uint64_t reservation_id) {
    auto it = std::find_if(live_.begin(), live_.end(),
                           [&](const Reservation& r) { return r.id == reservation_id; });
    if (it == live_.end()) {
        throw std::invalid_argument("release: unknown reservation");
    }
    reserved_ -= it->demand;
    live_.erase(it);
    client_busy_ = false;
}

SimTime detect_ramp_up(const std::vector<double>& bps_per_100ms,
                       std::uint64_t shaped_rate_bps, SimTime warmup_cap,
                       bool* flagged) {
    constexpr std::size_t kPerWindow = 5;  // 5 x 100 ms = one 500 ms window
    double thresh = 0.9 * static_cast<double>(shaped_rate_bps);

    auto window_ok = [&](std::size_t w) {
        double sum = 0;
        for (std::size_t k = 0; k < kPerWindow; ++k) {
            sum += bps_per_100ms[w * kPerWindow + k];
        }
        return sum / static_cast<double>(kPerWindow) >= thresh;
    };

    std::size_t windows = bps_per_100ms.size() / kPerWindow;
    for (std::size_t w = 0; w + 1 < windows; ++w) {
        SimTime end = SimTime::from_ms(500) * (w + 2);
        if (end > warmup_cap) break;
        if (window_ok(w) && window_ok(w + 1)) {
            if (flagged) *flagged = false;
            return end;
        }
    }
    if (flagged) *flagged = true;
    return warmup_cap;
}

namespace {

constexpr std::uint32_t kProbeFlowId = 1000;
constexpr std::uint32_t kCrossFlowId = 2000;

struct BulkFlow {
    std::uint32_t id = 0;
    AimdState st;
    SimTime srtt{};
};

// One scenario wired end to end; single use.
class TestRun {
  public:
    explicit TestRun(const TestConfig& cfg) : cfg_(cfg) {
        cfg_.validate();

        std::unique_ptr<Qdisc> q;
        if (cfg_.discipline == Discipline::buffer_control_fifo) {
            limit_bytes_ = buffer_control_limit(cfg_.link.rate_bps, cfg_.fifo_target_delay);
            q = std::make_unique<FifoQdisc>(limit_bytes_);
        } else {
            auto pie = std::make_unique<PieQdisc>(cfg_.pie, cfg_.link.rate_bps,
                                                  RngStream(cfg_.seed, "pie.drop"));
            limit_bytes_ = pie->hard_limit_bytes();
            pie_ = pie.get();
            q = std::move(pie);
        }
        link_ = std::make_unique<UpstreamLink>(sim_, cfg_.link, std::move(q));
        link_->on_deliver = [this](const Packet& p, SimTime at) { on_deliver(p, at); };
        link_->on_drop = [this](const Packet& p, EnqueueResult r, SimTime at) {
            on_drop(p, r, at);
        };
        probe_.timeout = cfg_.probe_timeout;
    }

    TestReport run() {
        RngStream start_rng(cfg_.seed, "flow.start");
        for (std::uint32_t i = 0; i < cfg_.load_flows; ++i) {
            BulkFlow f;
            f.id = i;
            // Initial ssthresh at the bottleneck buffer size: slow start hands
            // off to congestion avoidance with the standing queue already
            // established, so the probing window measures the sustained
            // regime rather than the connection-setup transient.
            f.st = aimd_initial(cfg_.mss, static_cast<double>(limit_bytes_));
            f.srtt = cfg_.link.base_rtt;
            flows_.push_back(f);
        }
        load_running_ = true;
        for (auto& f : flows_) {
            SimTime at = SimTime::from_ms_f(start_rng.uniform(0.0, 100.0));
            sim_.schedule(at, [this, &f] { try_send(f); });
        }
        if (cfg_.cross_rate_bps > 0) {
            cross_interval_ = serialize_time(cfg_.mss, cfg_.cross_rate_bps);
            SimTime at = SimTime::from_ns(static_cast<std::uint64_t>(
                start_rng.uniform(0.0, static_cast<double>(cross_interval_.nanos))));
            sim_.schedule(at, [this] { emit_cross(); });
        }
        sim_.schedule(SimTime::from_ms(100), [this] { monitor_tick(); });
        if (pie_ != nullptr) {
            sim_.schedule(cfg_.pie.update_interval, [this] { pie_tick(); });
        }

        sim_.run_until(SimTime::from_s(7200));

        TestReport r;
        r.label = cfg_.label;
        r.config = cfg_;
        // A probe that never came back carries no delay information, only a
        // loss event: it is counted, not averaged, mirroring how closed-loop
        // request/response tools report completed transactions.
        for (const auto& s : probe_.samples) {
            if (s.censored) {
                ++r.censored_count;
            } else {
                r.rtts.push_back(s.rtt);
                r.rtt_seqs.push_back(s.seq);
            }
        }
        r.discarded_responses = probe_.discarded;
        r.ramp_up_at = ramp_up_at_;
        r.ramp_flagged = ramp_flagged_;
        if (r.rtts.empty()) {
            r.invalid = true;
        } else {
            r.stats = summarize(r.rtts);
        }
        r.achieved_throughput_bps = static_cast<double>(window_bytes_) * 8.0 /
                                    cfg_.probe_duration.to_s();
        r.load_sent = load_sent_;
        r.load_delivered = load_delivered_;
        r.load_dropped = load_dropped_;
        r.probes_sent = probes_sent_;
        r.probes_dropped = probes_dropped_;
        return r;
    }

    const ProbeState& probe_state() const { return probe_; }

  private:
    Packet fresh_packet(std::uint32_t flow_id, PacketKind kind, std::uint32_t size) {
        return make_packet(next_pkt_id_++, flow_id, kind, size, sim_.now());
    }

    void try_send(BulkFlow& f) {
        if (!load_running_) return;
        while (load_running_ && aimd_can_send(f.st) >= f.st.mss) {
            f.st.inflight_bytes += f.st.mss;
            ++load_sent_;
            link_->submit(fresh_packet(f.id, PacketKind::bulk, f.st.mss));
        }
    }

    void emit_cross() {
        if (!load_running_) return;
        ++load_sent_;
        link_->submit(fresh_packet(kCrossFlowId, PacketKind::cross, cfg_.mss));
        sim_.schedule_in(cross_interval_, [this] { emit_cross(); });
    }

    void on_drop(const Packet& p, EnqueueResult, SimTime now) {
        switch (p.kind) {
            case PacketKind::bulk: {
                ++load_dropped_;
                std::uint32_t flow = p.flow_id;
                std::uint32_t size = p.size_bytes;
                sim_.schedule(now + cfg_.link.base_rtt,
                              [this, flow, size] { on_loss_detect(flow, size); });
                break;
            }
            case PacketKind::cross:
                ++load_dropped_;
                break;
            case PacketKind::probe_request:
                ++probes_dropped_;  // timeout guard turns this into a censored sample
                break;
            case PacketKind::probe_response:
                break;
        }
    }

    void on_deliver(const Packet& p, SimTime arrival) {
        switch (p.kind) {
            case PacketKind::bulk: {
                ++load_delivered_;
                count_load_bytes(p.size_bytes, arrival);
                std::uint32_t flow = p.flow_id;
                std::uint32_t size = p.size_bytes;
                SimTime created = p.created_at;
                sim_.schedule(arrival + cfg_.link.base_rtt / 2,
                              [this, flow, size, created] { on_ack(flow, size, created); });
                break;
            }
            case PacketKind::cross:
                ++load_delivered_;
                count_load_bytes(p.size_bytes, arrival);
                break;
            case PacketKind::probe_request: {
                // Remote turnaround is immediate; the response returns over the
                // uncongested downstream half.
                std::uint64_t seq = p.probe_seq;
                sim_.schedule(arrival + cfg_.link.base_rtt / 2,
                              [this, seq] { on_probe_response(seq); });
                break;
            }
            case PacketKind::probe_response:
                break;
        }
    }

    void count_load_bytes(std::uint32_t bytes, SimTime arrival) {
        bucket_bytes_ += bytes;
        if (probing_started_ && arrival >= ramp_up_at_ &&
            arrival < ramp_up_at_ + cfg_.probe_duration) {
            window_bytes_ += bytes;
        }
    }

    void on_ack(std::uint32_t flow_id, std::uint32_t bytes, SimTime created_at) {
        BulkFlow& f = flows_[flow_id];
        SimTime sample = sim_.now() - created_at;
        f.srtt = SimTime::from_ns((f.srtt.nanos * 7 + sample.nanos) / 8);
        f.st.inflight_bytes -= std::min<std::uint64_t>(f.st.inflight_bytes, bytes);
        aimd_on_ack(f.st, bytes);
        try_send(f);
    }

    void on_loss_detect(std::uint32_t flow_id, std::uint32_t bytes) {
        BulkFlow& f = flows_[flow_id];
        f.st.inflight_bytes -= std::min<std::uint64_t>(f.st.inflight_bytes, bytes);
        aimd_on_loss(f.st, sim_.now(), f.srtt);
        try_send(f);
    }

    void monitor_tick() {
        if (finished_) return;
        tput_samples_.push_back(static_cast<double>(bucket_bytes_) * 8.0 / 0.1);
        bucket_bytes_ = 0;
        if (!probing_started_) {
            SimTime now = sim_.now();
            if (tput_samples_.size() % 5 == 0 && tput_samples_.size() >= 10) {
                bool flagged = false;
                SimTime at = detect_ramp_up(tput_samples_, cfg_.link.rate_bps,
                                            cfg_.warmup_cap, &flagged);
                // The detector answers for the series so far; a verdict is
                // final only when it dates the window ending right now.
                if (!flagged && at == now) begin_probing(now, false);
            }
            if (!probing_started_ && now >= cfg_.warmup_cap) {
                begin_probing(cfg_.warmup_cap, true);
            }
        }
        sim_.schedule_in(SimTime::from_ms(100), [this] { monitor_tick(); });
    }

    void pie_tick() {
        if (finished_) return;
        pie_->update(sim_.now());
        sim_.schedule_in(cfg_.pie.update_interval, [this] { pie_tick(); });
    }

    void begin_probing(SimTime at, bool flagged) {
        probing_started_ = true;
        ramp_up_at_ = at;
        ramp_flagged_ = flagged;
        probe_window_end_ = at + cfg_.probe_duration;
        send_probe();
    }

    void send_probe() {
        auto seq = probe_tick(probe_, sim_.now());
        if (seq) emit_probe(*seq);
    }

    void emit_probe(std::uint64_t seq) {
        ++probes_sent_;
        Packet p = fresh_packet(kProbeFlowId, PacketKind::probe_request, cfg_.probe_size);
        p.probe_seq = seq;
        guard_handles_[seq] =
            sim_.schedule_in(cfg_.probe_timeout, [this, seq] { probe_timeout_guard(seq); });
        link_->submit(std::move(p));
    }

    void on_probe_response(std::uint64_t seq) {
        bool was_outstanding = probe_.outstanding && probe_.outstanding->seq == seq;
        probe_on_response(probe_, seq, sim_.now());
        if (was_outstanding) {
            if (auto it = guard_handles_.find(seq); it != guard_handles_.end()) {
                sim_.cancel(it->second);
                guard_handles_.erase(it);
            }
            if (sim_.now() < probe_window_end_) {
                send_probe();
            } else {
                finish_probing();
            }
        }
    }

    void probe_timeout_guard(std::uint64_t seq) {
        guard_handles_.erase(seq);
        if (!probe_.outstanding || probe_.outstanding->seq != seq) return;
        auto next = probe_tick(probe_, sim_.now());  // records the censored sample
        if (next && sim_.now() < probe_window_end_) {
            emit_probe(*next);
        } else {
            probe_.outstanding.reset();
            finish_probing();
        }
    }

    void finish_probing() {
        if (probing_done_) return;
        probing_done_ = true;
        // Load keeps running for a grace period past the last probe.
        sim_.schedule_in(SimTime::from_ms(250), [this] { stop_all(); });
    }

    void stop_all() {
        load_running_ = false;
        finished_ = true;
    }

    TestConfig cfg_;
    Simulator sim_;
    std::unique_ptr<UpstreamLink> link_;
    PieQdisc* pie_ = nullptr;
    std::uint64_t limit_bytes_ = 0;

    std::vector<BulkFlow> flows_;
    bool load_running_ = false;
    SimTime cross_interval_{};

    ProbeState probe_;
    std::unordered_map<std::uint64_t, EventHandle> guard_handles_;
    bool probing_started_ = false;
    bool probing_done_ = false;
    bool finished_ = false;
    SimTime probe_window_end_{};
    SimTime ramp_up_at_{};
    bool ramp_flagged_ = false;

    std::vector<double> tput_samples_;
    std::uint64_t bucket_bytes_ = 0;
    std::uint64_t window_bytes_ = 0;

    std::uint64_t next_pkt_id_ = 1;
    std::uint64_t load_sent_ = 0;
    std::uint64_t load_delivered_ = 0;
    std::uint64_t load_dropped_ = 0;
    std::uint64_t probes_sent_ = 0;
    std::uint64_t probes_dropped_ = 0;
};

}  // namespace

TestReport run_latency_under_load(const TestConfig& cfg) {
    TestRun run(cfg);
    return run.run();
}

nlohmann::ordered_json config_to_json(const TestConfig& cfg) {
    nlohmann::ordered_json j;
    j["label"] = cfg.label;
    j["seed"] = cfg.seed;
    j["discipline"] = to_string(cfg.discipline);
    j["rate_bps"] = cfg.link.rate_bps;
    j["bucket_bytes"] = cfg.link.bucket_bytes;
    j["mac_access_delay_ms"] = cfg.link.mac_access_delay.to_ms();
    j["base_rtt_ms"] = cfg.link.base_rtt.to_ms();
    j["load_flows"] = cfg.load_flows;
    j["mss_bytes"] = cfg.mss;
    j["cross_rate_bps"] = cfg.cross_rate_bps;
    j["probe_duration_s"] = cfg.probe_duration.to_s();
    j["downstream_probe_duration_s"] = cfg.downstream_probe_duration.to_s();
    j["warmup_cap_s"] = cfg.warmup_cap.to_s();
    j["probe_timeout_s"] = cfg.probe_timeout.to_s();
    j["probe_size_bytes"] = cfg.probe_size;
    j["fifo_target_delay_ms"] = cfg.fifo_target_delay.to_ms();
    j["pie_latency_target_ms"] = cfg.pie.latency_target.to_ms();
    j["pie_update_interval_ms"] = cfg.pie.update_interval.to_ms();
    j["pie_gain_a"] = cfg.pie.gain_a;
    j["pie_gain_b"] = cfg.pie.gain_b;
    j["pie_max_burst_ms"] = cfg.pie.max_burst.to_ms();
    j["pie_burst_reset_ms"] = cfg.pie.burst_reset.to_ms();
    j["pie_mean_pktsize_bytes"] = cfg.pie.mean_pktsize;
    j["pie_hard_limit_bytes"] = cfg.pie.hard_limit_bytes;
    return j;
}

nlohmann::ordered_json report_to_json(const TestReport& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["config"] = config_to_json(r.config);
    j["ramp_up_at_ms"] = r.ramp_up_at.to_ms();
    j["ramp_flagged"] = r.ramp_flagged;
    j["invalid"] = r.invalid;
    j["sample_count"] = r.rtts.size();
    j["censored_count"] = r.censored_count;
    j["discarded_responses"] = r.discarded_responses;
    j["mean_ms"] = round6(r.stats.mean_ms);
    j["max_ms"] = round6(r.stats.max_ms);
    j["p50_ms"] = round6(r.stats.p50_ms);
    j["p90_ms"] = round6(r.stats.p90_ms);
    j["p99_ms"] = round6(r.stats.p99_ms);
    j["achieved_throughput_bps"] = round6(r.achieved_throughput_bps);
    j["load_sent"] = r.load_sent;
    j["load_delivered"] = r.load_delivered;
    j["load_dropped"] = r.load_dropped;
    j["probes_sent"] = r.probes_sent;
    j["probes_dropped"] = r.probes_dropped;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (SimTime t : r.rtts) samples.push_back(t.nanos);
    j["rtt_ns"] = std::move(samples);
    return j;
}

std::string report_samples_csv(const TestReport& r) {
    std::string out = "probe_seq,rtt_ms\n";
    char buf[64];
    for (std::size_t i = 0; i < r.rtts.size(); ++i) {
        // 6 decimals is exact for an integer-nanosecond clock.
        std::snprintf(buf, sizeof(buf), "%llu,%.6f\n",
                      static_cast<unsigned long long>(r.rtt_seqs[i]), r.rtts[i].to_ms());
        out += buf;
    }
    return out;
}

}  // namespace aqmsim
