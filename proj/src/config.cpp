#include "aqmsim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "aqmsim/stats.hpp"

namespace aqmsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-') {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
    }
    std::size_t pos = 0;
    std::uint64_t out;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument(key + ": trailing characters in '" + v + "'");
    }
    return out;
}

std::uint32_t parse_u32(const std::string& key, const std::string& v) {
    std::uint64_t out = parse_u64(key, v);
    if (out > UINT32_MAX) throw std::invalid_argument(key + ": value out of range: '" + v + "'");
    return static_cast<std::uint32_t>(out);
}

double parse_f(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument(key + ": trailing characters in '" + v + "'");
    }
    if (!std::isfinite(out)) {
        throw std::invalid_argument(key + ": value must be finite, got '" + v + "'");
    }
    return out;
}

using Setter = std::function<void(const std::string&)>;
using SetterMap = std::map<std::string, Setter>;

// Keys shared between a standalone test and the per-device template of a fleet.
void add_common_setters(SetterMap& m, TestConfig& c) {
    m["rate_bps"] = [&c](const std::string& v) { c.link.rate_bps = parse_u64("rate_bps", v); };
    m["bucket_bytes"] = [&c](const std::string& v) {
        c.link.bucket_bytes = parse_u64("bucket_bytes", v);
    };
    m["mac_access_delay_ms"] = [&c](const std::string& v) {
        c.link.mac_access_delay = SimTime::from_ms_f(parse_f("mac_access_delay_ms", v));
    };
    m["load_flows"] = [&c](const std::string& v) { c.load_flows = parse_u32("load_flows", v); };
    m["mss"] = [&c](const std::string& v) { c.mss = parse_u32("mss", v); };
    m["cross_rate_bps"] = [&c](const std::string& v) {
        c.cross_rate_bps = parse_u64("cross_rate_bps", v);
    };
    m["probe_duration_s"] = [&c](const std::string& v) {
        c.probe_duration = SimTime::from_s_f(parse_f("probe_duration_s", v));
    };
    m["downstream_probe_duration_s"] = [&c](const std::string& v) {
        c.downstream_probe_duration = SimTime::from_s_f(parse_f("downstream_probe_duration_s", v));
    };
    m["warmup_cap_s"] = [&c](const std::string& v) {
        c.warmup_cap = SimTime::from_s_f(parse_f("warmup_cap_s", v));
    };
    m["probe_timeout_s"] = [&c](const std::string& v) {
        c.probe_timeout = SimTime::from_s_f(parse_f("probe_timeout_s", v));
    };
    m["probe_size"] = [&c](const std::string& v) { c.probe_size = parse_u32("probe_size", v); };
    m["fifo_target_delay_ms"] = [&c](const std::string& v) {
        c.fifo_target_delay = SimTime::from_ms_f(parse_f("fifo_target_delay_ms", v));
    };
    m["pie_latency_target_ms"] = [&c](const std::string& v) {
        c.pie.latency_target = SimTime::from_ms_f(parse_f("pie_latency_target_ms", v));
    };
    m["pie_update_interval_ms"] = [&c](const std::string& v) {
        c.pie.update_interval = SimTime::from_ms_f(parse_f("pie_update_interval_ms", v));
    };
    m["pie_gain_a"] = [&c](const std::string& v) { c.pie.gain_a = parse_f("pie_gain_a", v); };
    m["pie_gain_b"] = [&c](const std::string& v) { c.pie.gain_b = parse_f("pie_gain_b", v); };
    m["pie_max_burst_ms"] = [&c](const std::string& v) {
        c.pie.max_burst = SimTime::from_ms_f(parse_f("pie_max_burst_ms", v));
    };
    m["pie_burst_reset_ms"] = [&c](const std::string& v) {
        c.pie.burst_reset = SimTime::from_ms_f(parse_f("pie_burst_reset_ms", v));
    };
    m["pie_mean_pktsize"] = [&c](const std::string& v) {
        c.pie.mean_pktsize = parse_u32("pie_mean_pktsize", v);
    };
    m["pie_hard_limit_bytes"] = [&c](const std::string& v) {
        c.pie.hard_limit_bytes = parse_u64("pie_hard_limit_bytes", v);
    };
}

SetterMap test_setters(TestConfig& c) {
    SetterMap m;
    m["label"] = [&c](const std::string& v) { c.label = v; };
    m["seed"] = [&c](const std::string& v) { c.seed = parse_u64("seed", v); };
    m["discipline"] = [&c](const std::string& v) { c.discipline = discipline_from_string(v); };
    m["base_rtt_ms"] = [&c](const std::string& v) {
        c.link.base_rtt = SimTime::from_ms_f(parse_f("base_rtt_ms", v));
    };
    add_common_setters(m, c);
    return m;
}

std::vector<std::pair<std::uint64_t, double>> parse_rate_plans(const std::string& v) {
    // "5,10,20,35" (equal weight) or "5:1,10:2,..." (weighted), in Mbps.
    std::vector<std::pair<std::uint64_t, double>> plans;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::invalid_argument("rate_plans_mbps: empty entry");
        double weight = 1.0;
        std::size_t colon = item.find(':');
        std::string rate_part = item;
        if (colon != std::string::npos) {
            rate_part = item.substr(0, colon);
            weight = parse_f("rate_plans_mbps weight", item.substr(colon + 1));
        }
        double mbps = parse_f("rate_plans_mbps", rate_part);
        if (mbps <= 0 || weight <= 0) {
            throw std::invalid_argument("rate_plans_mbps: rates and weights must be positive");
        }
        plans.emplace_back(static_cast<std::uint64_t>(std::llround(mbps * 1e6)), weight);
    }
    if (plans.empty()) throw std::invalid_argument("rate_plans_mbps: no entries");
    return plans;
}

SetterMap fleet_setters(FleetConfig& c) {
    SetterMap m;
    m["devices"] = [&c](const std::string& v) { c.devices = parse_u32("devices", v); };
    m["mix_pie"] = [&c](const std::string& v) {
        c.mix[Discipline::docsis_pie] = parse_f("mix_pie", v);
    };
    m["mix_fifo"] = [&c](const std::string& v) {
        c.mix[Discipline::buffer_control_fifo] = parse_f("mix_fifo", v);
    };
    m["rate_plans_mbps"] = [&c](const std::string& v) { c.rate_plans = parse_rate_plans(v); };
    m["flows_min"] = [&c](const std::string& v) { c.flows_min = parse_u32("flows_min", v); };
    m["flows_max"] = [&c](const std::string& v) { c.flows_max = parse_u32("flows_max", v); };
    m["base_rtt_min_ms"] = [&c](const std::string& v) {
        c.base_rtt_min_ms = parse_f("base_rtt_min_ms", v);
    };
    m["base_rtt_max_ms"] = [&c](const std::string& v) {
        c.base_rtt_max_ms = parse_f("base_rtt_max_ms", v);
    };
    m["bloated_fraction"] = [&c](const std::string& v) {
        c.bloated_fraction = parse_f("bloated_fraction", v);
    };
    m["bloat_delay_min_ms"] = [&c](const std::string& v) {
        c.bloat_delay_min_ms = parse_f("bloat_delay_min_ms", v);
    };
    m["bloat_delay_max_ms"] = [&c](const std::string& v) {
        c.bloat_delay_max_ms = parse_f("bloat_delay_max_ms", v);
    };
    m["master_seed"] = [&c](const std::string& v) { c.master_seed = parse_u64("master_seed", v); };
    // Per-device template knobs. label/seed/discipline/base_rtt are drawn per
    // device, so they are not accepted here.
    add_common_setters(m, c.base);
    return m;
}

[[noreturn]] void unknown_key(const std::string& key, const SetterMap& setters) {
    std::string msg = "unknown config key '" + key + "'; accepted keys:";
    for (const auto& [k, fn] : setters) {
        msg += ' ';
        msg += k;
    }
    throw std::invalid_argument(msg);
}

void apply(const std::map<std::string, std::string>& kv, SetterMap& setters) {
    for (const auto& [k, v] : kv) {
        auto it = setters.find(k);
        if (it == setters.end()) unknown_key(k, setters);
        it->second(v);
    }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        }
        if (kv.count(key)) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot read config file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_test_config(const std::map<std::string, std::string>& kv, TestConfig& out) {
    SetterMap setters = test_setters(out);
    apply(kv, setters);
    out.validate();
}

void apply_fleet_config(const std::map<std::string, std::string>& kv, FleetConfig& out) {
    SetterMap setters = fleet_setters(out);
    apply(kv, setters);
    out.validate();
}

std::string print_test_config(const TestConfig& c) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    };
    kv("label", c.label);
    kv("seed", std::to_string(c.seed));
    kv("discipline", to_string(c.discipline));
    kv("rate_bps", std::to_string(c.link.rate_bps));
    kv("bucket_bytes", std::to_string(c.link.bucket_bytes));
    kv("mac_access_delay_ms", format6(c.link.mac_access_delay.to_ms()));
    kv("base_rtt_ms", format6(c.link.base_rtt.to_ms()));
    kv("load_flows", std::to_string(c.load_flows));
    kv("mss", std::to_string(c.mss));
    kv("cross_rate_bps", std::to_string(c.cross_rate_bps));
    kv("probe_duration_s", format6(c.probe_duration.to_s()));
    kv("downstream_probe_duration_s", format6(c.downstream_probe_duration.to_s()));
    kv("warmup_cap_s", format6(c.warmup_cap.to_s()));
    kv("probe_timeout_s", format6(c.probe_timeout.to_s()));
    kv("probe_size", std::to_string(c.probe_size));
    kv("fifo_target_delay_ms", format6(c.fifo_target_delay.to_ms()));
    kv("pie_latency_target_ms", format6(c.pie.latency_target.to_ms()));
    kv("pie_update_interval_ms", format6(c.pie.update_interval.to_ms()));
    kv("pie_gain_a", format6(c.pie.gain_a));
    kv("pie_gain_b", format6(c.pie.gain_b));
    kv("pie_max_burst_ms", format6(c.pie.max_burst.to_ms()));
    kv("pie_burst_reset_ms", format6(c.pie.burst_reset.to_ms()));
    kv("pie_mean_pktsize", std::to_string(c.pie.mean_pktsize));
    kv("pie_hard_limit_bytes", std::to_string(c.pie.hard_limit_bytes));
    return out;
}

std::string print_fleet_config(const FleetConfig& c) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    };
    kv("devices", std::to_string(c.devices));
    kv("master_seed", std::to_string(c.master_seed));
    double pie = 0, fifo = 0;
    if (auto it = c.mix.find(Discipline::docsis_pie); it != c.mix.end()) pie = it->second;
    if (auto it = c.mix.find(Discipline::buffer_control_fifo); it != c.mix.end()) {
        fifo = it->second;
    }
    kv("mix_pie", format6(pie));
    kv("mix_fifo", format6(fifo));
    std::string plans;
    for (const auto& [rate, w] : c.rate_plans) {
        if (!plans.empty()) plans += ',';
        plans += format6(static_cast<double>(rate) / 1e6);
        plans += ':';
        plans += format6(w);
    }
    kv("rate_plans_mbps", plans);
    kv("flows_min", std::to_string(c.flows_min));
    kv("flows_max", std::to_string(c.flows_max));
    kv("base_rtt_min_ms", format6(c.base_rtt_min_ms));
    kv("base_rtt_max_ms", format6(c.base_rtt_max_ms));
    kv("bloated_fraction", format6(c.bloated_fraction));
    kv("bloat_delay_min_ms", format6(c.bloat_delay_min_ms));
    kv("bloat_delay_max_ms", format6(c.bloat_delay_max_ms));

    // Template knobs for every simulated device.
    std::string base = print_test_config(c.base);
    std::stringstream ss(base);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("label=", 0) == 0 || line.rfind("seed=", 0) == 0 ||
            line.rfind("discipline=", 0) == 0 || line.rfind("base_rtt_ms=", 0) == 0) {
            continue;
        }
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace aqmsim
