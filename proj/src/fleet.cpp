#include "aqmsim/fleet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "aqmsim/rng.hpp"
#include "aqmsim/stats.hpp"
#include "aqmsim/version.hpp"

namespace aqmsim {

namespace {

double median_of_sorted(const std::vector<double>& sorted) {
    if (sorted.empty()) return 0.0;
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.5 * static_cast<double>(sorted.size())));
    return sorted[rank - 1];
}

int hist_index(double value_ms) {
    if (value_ms < 0) return 0;
    double idx = std::floor(value_ms / kHistBinMs);
    if (idx >= kHistBins) return kHistBins;  // overflow bucket
    return static_cast<int>(idx);
}

}  // namespace

void FleetConfig::validate() const {
    if (mix.empty()) throw std::invalid_argument("fleet: empty variant mix");
    double sum = 0;
    for (const auto& [d, f] : mix) {
        if (f < 0) throw std::invalid_argument("fleet: negative mix fraction");
        sum += f;
    }
    if (sum <= 0) throw std::invalid_argument("fleet: mix fractions sum to zero");
    if (rate_plans.empty()) throw std::invalid_argument("fleet: empty rate plan set");
    for (const auto& [rate, w] : rate_plans) {
        if (rate == 0 || w <= 0) throw std::invalid_argument("fleet: bad rate plan entry");
    }
    if (flows_min < 1 || flows_min > flows_max || flows_max > 16) {
        throw std::invalid_argument("fleet: flows range must satisfy 1 <= min <= max <= 16");
    }
    if (base_rtt_min_ms <= 0 || base_rtt_min_ms > base_rtt_max_ms) {
        throw std::invalid_argument("fleet: bad base_rtt range");
    }
    if (bloated_fraction < 0 || bloated_fraction > 1) {
        throw std::invalid_argument("fleet: bloated_fraction outside [0, 1]");
    }
    if (bloat_delay_min_ms <= 0 || bloat_delay_min_ms > bloat_delay_max_ms) {
        throw std::invalid_argument("fleet: bad bloat delay range");
    }
    base.validate();
}

Discipline discipline_for_index(const std::map<Discipline, double>& mix, std::uint32_t i) {
    double sum = 0;
    for (const auto& [d, f] : mix) sum += f;

    // Walk the quota sequence: each step hands the slot to the variant whose
    // assigned count trails its quota the most. Depends only on (mix, i).
    std::map<Discipline, std::uint64_t> counts;
    Discipline last = mix.begin()->first;
    for (std::uint32_t step = 0; step <= i; ++step) {
        double best = -1e300;
        for (const auto& [d, f] : mix) {
            double deficit = (f / sum) * static_cast<double>(step + 1) -
                             static_cast<double>(counts[d]);
            if (deficit > best) {
                best = deficit;
                last = d;
            }
        }
        ++counts[last];
    }
    return last;
}

std::vector<TestConfig> sample_population(const FleetConfig& cfg) {
    cfg.validate();

    double mix_sum = 0;
    for (const auto& [d, f] : cfg.mix) mix_sum += f;
    double weight_sum = 0;
    for (const auto& [rate, w] : cfg.rate_plans) weight_sum += w;

    // Incremental quota walk; identical to discipline_for_index at every i.
    std::map<Discipline, std::uint64_t> counts;

    std::vector<TestConfig> population;
    population.reserve(cfg.devices);
    for (std::uint32_t i = 0; i < cfg.devices; ++i) {
        Discipline pick = cfg.mix.begin()->first;
        double best = -1e300;
        for (const auto& [d, f] : cfg.mix) {
            double deficit = (f / mix_sum) * static_cast<double>(i + 1) -
                             static_cast<double>(counts[d]);
            if (deficit > best) {
                best = deficit;
                pick = d;
            }
        }
        ++counts[pick];

        RngStream s(cfg.master_seed, "device." + std::to_string(i));
        std::uint64_t device_seed = s.next_u64();
        double x = s.uniform(0.0, weight_sum);
        std::uint64_t rate = cfg.rate_plans.back().first;
        for (const auto& [r, w] : cfg.rate_plans) {
            if (x < w) {
                rate = r;
                break;
            }
            x -= w;
        }
        // Concurrent bulk uploads per home skew hard toward one: weight 1/f^4.
        double fw_sum = 0;
        for (std::uint32_t f = cfg.flows_min; f <= cfg.flows_max; ++f) {
            fw_sum += 1.0 / (static_cast<double>(f) * f * f * f);
        }
        double fx = s.uniform(0.0, fw_sum);
        std::uint32_t flows = cfg.flows_max;
        for (std::uint32_t f = cfg.flows_min; f <= cfg.flows_max; ++f) {
            double w = 1.0 / (static_cast<double>(f) * f * f * f);
            if (fx < w) {
                flows = f;
                break;
            }
            fx -= w;
        }
        // Propagation delay to an on-net test server clusters near the low
        // edge, with a thin tail to the far edge of the range.
        double u = s.next_unit();
        double base_rtt_ms =
            cfg.base_rtt_min_ms + (cfg.base_rtt_max_ms - cfg.base_rtt_min_ms) * u * u * u;

        TestConfig t = cfg.base;
        char label[32];
        std::snprintf(label, sizeof(label), "dev%06u", i);
        t.label = label;
        t.seed = device_seed;
        t.discipline = pick;
        t.link.rate_bps = rate;
        t.link.base_rtt = SimTime::from_ms_f(base_rtt_ms);
        t.load_flows = flows;
        if (pick == Discipline::buffer_control_fifo) {
            if (s.next_unit() < cfg.bloated_fraction) {
                t.fifo_target_delay = SimTime::from_ms_f(
                    s.uniform(cfg.bloat_delay_min_ms, cfg.bloat_delay_max_ms));
            }
        }
        population.push_back(std::move(t));
    }
    return population;
}

FleetSummary summarize_rows(const FleetConfig& cfg, std::vector<DeviceRow> rows) {
    FleetSummary s;
    s.config = cfg;
    s.rows = std::move(rows);

    for (const auto& row : s.rows) {
        if (row.invalid) {
            ++s.invalid_count;
            continue;
        }
        VariantStats& v = s.variants[row.discipline];
        ++v.device_count;
        v.means_sorted.push_back(row.mean_ms);
        v.maxes_sorted.push_back(row.max_ms);
    }
    for (auto& [d, v] : s.variants) {
        std::sort(v.means_sorted.begin(), v.means_sorted.end());
        std::sort(v.maxes_sorted.begin(), v.maxes_sorted.end());
        v.median_mean_ms = median_of_sorted(v.means_sorted);
        v.median_max_ms = median_of_sorted(v.maxes_sorted);
        v.hist_fraction.assign(kHistBins + 1, 0.0);
        for (double m : v.means_sorted) {
            v.hist_fraction[hist_index(m)] += 1.0;
        }
        for (double& f : v.hist_fraction) {
            f /= static_cast<double>(v.device_count);
        }
    }
    return s;
}

FleetSummary run_fleet(const FleetConfig& cfg, unsigned workers) {
    std::vector<TestConfig> population = sample_population(cfg);
    if (population.empty()) {
        throw std::invalid_argument("fleet: cannot run an empty population");
    }
    std::vector<DeviceRow> rows(population.size());

    if (workers == 0) workers = 1;
    workers = std::min<unsigned>(workers, population.size());

    std::atomic<std::uint32_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&] {
        for (;;) {
            std::uint32_t i = next.fetch_add(1);
            if (i >= population.size()) return;
            try {
                TestReport rep = run_latency_under_load(population[i]);
                DeviceRow row;
                row.device_id = i;
                row.discipline = population[i].discipline;
                row.rate_bps = population[i].link.rate_bps;
                row.flows = population[i].load_flows;
                row.base_rtt_ms = round6(population[i].link.base_rtt.to_ms());
                row.invalid = rep.invalid;
                if (!rep.invalid) {
                    row.mean_ms = round6(rep.stats.mean_ms);
                    row.max_ms = round6(rep.stats.max_ms);
                    row.p99_ms = round6(rep.stats.p99_ms);
                }
                rows[i] = row;
            } catch (...) {
                std::scoped_lock lk(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    FleetSummary s = summarize_rows(cfg, std::move(rows));
    if (s.invalid_count * 100 > cfg.devices) {
        throw std::runtime_error("fleet: more than 1% of devices produced invalid reports (" +
                                 std::to_string(s.invalid_count) + " of " +
                                 std::to_string(cfg.devices) + ")");
    }
    return s;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

void emit_reports(const FleetSummary& s, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::string devices = "device_id,discipline,rate_bps,flows,base_rtt_ms,mean_ms,max_ms,p99_ms\n";
    for (const auto& row : s.rows) {
        if (row.invalid) continue;
        devices += std::to_string(row.device_id);
        devices += ',';
        devices += to_string(row.discipline);
        devices += ',';
        devices += std::to_string(row.rate_bps);
        devices += ',';
        devices += std::to_string(row.flows);
        devices += ',';
        devices += format6(row.base_rtt_ms);
        devices += ',';
        devices += format6(row.mean_ms);
        devices += ',';
        devices += format6(row.max_ms);
        devices += ',';
        devices += format6(row.p99_ms);
        devices += '\n';
    }
    write_file(out_dir / "devices.csv", devices);

    auto cdf_csv = [&](auto member) {
        std::string out = "variant,value_ms,cumulative_fraction\n";
        for (const auto& [d, v] : s.variants) {
            const std::vector<double>& vals = v.*member;
            for (std::size_t i = 0; i < vals.size(); ++i) {
                out += to_string(d);
                out += ',';
                out += format6(vals[i]);
                out += ',';
                out += format6(static_cast<double>(i + 1) /
                               static_cast<double>(vals.size()));
                out += '\n';
            }
        }
        return out;
    };
    write_file(out_dir / "cdf_mean.csv", cdf_csv(&VariantStats::means_sorted));
    write_file(out_dir / "cdf_max.csv", cdf_csv(&VariantStats::maxes_sorted));

    std::string hist = "variant,bin_low_ms,bin_high_ms,fraction\n";
    for (const auto& [d, v] : s.variants) {
        for (int b = 0; b <= kHistBins; ++b) {
            hist += to_string(d);
            hist += ',';
            hist += format6(b * kHistBinMs);
            hist += ',';
            hist += b == kHistBins ? "inf" : format6((b + 1) * kHistBinMs);
            hist += ',';
            hist += format6(v.hist_fraction[b]);
            hist += '\n';
        }
    }
    write_file(out_dir / "histogram.csv", hist);

    nlohmann::ordered_json manifest;
    manifest["tool_version"] = kVersion;
    manifest["master_seed"] = s.config.master_seed;
    manifest["devices"] = s.config.devices;
    nlohmann::ordered_json mix;
    for (const auto& [d, f] : s.config.mix) mix[to_string(d)] = f;
    manifest["mix"] = std::move(mix);
    nlohmann::ordered_json plans = nlohmann::ordered_json::array();
    for (const auto& [rate, w] : s.config.rate_plans) {
        plans.push_back({{"rate_bps", rate}, {"weight", w}});
    }
    manifest["rate_plans"] = std::move(plans);
    manifest["flows_min"] = s.config.flows_min;
    manifest["flows_max"] = s.config.flows_max;
    manifest["base_rtt_min_ms"] = s.config.base_rtt_min_ms;
    manifest["base_rtt_max_ms"] = s.config.base_rtt_max_ms;
    manifest["bloated_fraction"] = s.config.bloated_fraction;
    manifest["bloat_delay_min_ms"] = s.config.bloat_delay_min_ms;
    manifest["bloat_delay_max_ms"] = s.config.bloat_delay_max_ms;
    manifest["base_config"] = config_to_json(s.config.base);
    manifest["invalid_count"] = s.invalid_count;
    nlohmann::ordered_json invalid_ids = nlohmann::ordered_json::array();
    for (const auto& row : s.rows) {
        if (row.invalid) invalid_ids.push_back(row.device_id);
    }
    manifest["invalid_device_ids"] = std::move(invalid_ids);
    nlohmann::ordered_json counts;
    for (const auto& [d, v] : s.variants) counts[to_string(d)] = v.device_count;
    manifest["variant_device_counts"] = std::move(counts);
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<DeviceRow> load_device_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty device csv: " + file.string());
    if (line != "device_id,discipline,rate_bps,flows,base_rtt_ms,mean_ms,max_ms,p99_ms") {
        throw std::runtime_error("unexpected device csv header in " + file.string());
    }
    std::vector<DeviceRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                                     ": expected 8 fields");
        }
        DeviceRow row;
        try {
            row.device_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
            row.discipline = discipline_from_string(fields[1]);
            row.rate_bps = std::stoull(fields[2]);
            row.flows = static_cast<std::uint32_t>(std::stoul(fields[3]));
            row.base_rtt_ms = std::stod(fields[4]);
            row.mean_ms = std::stod(fields[5]);
            row.max_ms = std::stod(fields[6]);
            row.p99_ms = std::stod(fields[7]);
        } catch (const std::exception&) {
            throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                                     ": malformed row");
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

struct AllStats {
    double median_mean = 0;
    double median_max = 0;
    double low_band = 0;  // fraction of valid devices with mean in [15, 30)
};

AllStats all_stats(const FleetSummary& s) {
    std::vector<double> means, maxes;
    std::uint64_t low = 0;
    for (const auto& row : s.rows) {
        if (row.invalid) continue;
        means.push_back(row.mean_ms);
        maxes.push_back(row.max_ms);
        if (row.mean_ms >= 15.0 && row.mean_ms < 30.0) ++low;
    }
    std::sort(means.begin(), means.end());
    std::sort(maxes.begin(), maxes.end());
    AllStats a;
    a.median_mean = median_of_sorted(means);
    a.median_max = median_of_sorted(maxes);
    a.low_band = means.empty() ? 0.0
                               : static_cast<double>(low) / static_cast<double>(means.size());
    return a;
}

}  // namespace

Comparison compare(const FleetSummary& a, const FleetSummary& b) {
    for (const auto& [d, v] : a.variants) {
        auto it = b.variants.find(d);
        if (it != b.variants.end() &&
            v.hist_fraction.size() != it->second.hist_fraction.size()) {
            throw std::invalid_argument("compare: histogram bin layouts differ");
        }
    }

    Comparison c;
    AllStats sa = all_stats(a);
    AllStats sb = all_stats(b);
    ComparisonRow all;
    all.variant = "all";
    all.delta_median_mean_ms = sa.median_mean - sb.median_mean;
    all.delta_median_max_ms = sa.median_max - sb.median_max;
    all.delta_low_band_fraction = sa.low_band - sb.low_band;
    c.rows.push_back(all);

    for (const auto& [d, va] : a.variants) {
        auto it = b.variants.find(d);
        if (it == b.variants.end()) continue;
        const VariantStats& vb = it->second;
        ComparisonRow row;
        row.variant = to_string(d);
        row.delta_median_mean_ms = va.median_mean_ms - vb.median_mean_ms;
        row.delta_median_max_ms = va.median_max_ms - vb.median_max_ms;
        row.delta_low_band_fraction = va.hist_fraction[1] - vb.hist_fraction[1];
        c.rows.push_back(row);
    }

    if (all.delta_median_mean_ms < 0) {
        c.verdict = "first fleet's median device mean is lower by " +
                    format6(-all.delta_median_mean_ms) + " ms";
    } else if (all.delta_median_mean_ms > 0) {
        c.verdict = "first fleet's median device mean is higher by " +
                    format6(all.delta_median_mean_ms) + " ms";
    } else {
        c.verdict = "median device means are identical";
    }
    return c;
}

std::string comparison_to_text(const Comparison& c) {
    std::string out = "variant,delta_median_mean_ms,delta_median_max_ms,delta_low_band_fraction\n";
    for (const auto& row : c.rows) {
        out += row.variant;
        out += ',';
        out += format6(row.delta_median_mean_ms);
        out += ',';
        out += format6(row.delta_median_max_ms);
        out += ',';
        out += format6(row.delta_low_band_fraction);
        out += '\n';
    }
    out += "verdict: " + c.verdict + "\n";
    return out;
}

}  // namespace aqmsim
