#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqmsim/config.hpp"
#include "aqmsim/fleet.hpp"
#include "aqmsim/harness.hpp"

using namespace aqmsim;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

DeviceRow make_row(std::uint32_t id, Discipline d, double mean, double mx,
                   double p99, bool invalid = false) {
    DeviceRow r;
    r.device_id = id;
    r.discipline = d;
    r.rate_bps = 10'000'000;
    r.flows = 1;
    r.base_rtt_ms = 10.5;
    r.mean_ms = mean;
    r.max_ms = mx;
    r.p99_ms = p99;
    r.invalid = invalid;
    return r;
}

std::vector<DeviceRow> sample_rows() {
    return {
        make_row(0, Discipline::docsis_pie, 20.5, 40.5, 38.5),
        make_row(1, Discipline::docsis_pie, 10.25, 30.25, 28.5),
        make_row(2, Discipline::buffer_control_fifo, 200.125, 1200.5, 1150.75),
        make_row(3, Discipline::buffer_control_fifo, 1010.5, 1400.5, 1380.25),
        make_row(4, Discipline::docsis_pie, 0, 0, 0, true),
    };
}

FleetConfig small_cfg() {
    FleetConfig cfg;
    cfg.devices = 5;
    return cfg;
}

void check_summaries_equal(const FleetSummary& a, const FleetSummary& b) {
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].device_id == b.rows[i].device_id);
        CHECK(a.rows[i].discipline == b.rows[i].discipline);
        CHECK(a.rows[i].rate_bps == b.rows[i].rate_bps);
        CHECK(a.rows[i].flows == b.rows[i].flows);
        CHECK(a.rows[i].base_rtt_ms == b.rows[i].base_rtt_ms);
        CHECK(a.rows[i].mean_ms == b.rows[i].mean_ms);
        CHECK(a.rows[i].max_ms == b.rows[i].max_ms);
        CHECK(a.rows[i].p99_ms == b.rows[i].p99_ms);
        CHECK(a.rows[i].invalid == b.rows[i].invalid);
    }
    CHECK(a.invalid_count == b.invalid_count);
    REQUIRE(a.variants.size() == b.variants.size());
    for (const auto& [d, va] : a.variants) {
        REQUIRE(b.variants.count(d) == 1);
        const VariantStats& vb = b.variants.at(d);
        CHECK(va.device_count == vb.device_count);
        CHECK(va.median_mean_ms == vb.median_mean_ms);
        CHECK(va.median_max_ms == vb.median_max_ms);
        CHECK(va.means_sorted == vb.means_sorted);
        CHECK(va.maxes_sorted == vb.maxes_sorted);
        CHECK(va.hist_fraction == vb.hist_fraction);
    }
}

}  // namespace

TEST_CASE("variant sequence: first assignments follow the 68/32 quota walk") {
    std::map<Discipline, double> mix = {
        {Discipline::docsis_pie, 0.68},
        {Discipline::buffer_control_fifo, 0.32},
    };
    std::vector<Discipline> expect = {
        Discipline::docsis_pie,         Discipline::buffer_control_fifo,
        Discipline::docsis_pie,         Discipline::docsis_pie,
        Discipline::buffer_control_fifo,
    };
    for (std::uint32_t i = 0; i < expect.size(); ++i) {
        CHECK(discipline_for_index(mix, i) == expect[i]);
    }
    // Exact split where the quotas land on whole devices.
    std::uint32_t pie = 0;
    for (std::uint32_t i = 0; i < 1000; ++i) {
        if (discipline_for_index(mix, i) == Discipline::docsis_pie) ++pie;
    }
    CHECK(pie == 680);
}

TEST_CASE("population: empty fleet samples to an empty list") {
    FleetConfig cfg;
    cfg.devices = 0;
    CHECK(sample_population(cfg).empty());
    CHECK_THROWS_AS(run_fleet(cfg, 2), std::invalid_argument);
}

TEST_CASE("population: resampling is deterministic") {
    FleetConfig cfg;
    cfg.devices = 40;
    cfg.master_seed = 9;
    auto a = sample_population(cfg);
    auto b = sample_population(cfg);
    REQUIRE(a.size() == 40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(config_to_json(a[i]).dump() == config_to_json(b[i]).dump());
        CHECK(a[i].label == b[i].label);
    }
}

TEST_CASE("population: growing the fleet keeps existing devices unchanged") {
    FleetConfig small;
    small.devices = 50;
    small.master_seed = 4;
    FleetConfig large = small;
    large.devices = 500;
    auto a = sample_population(small);
    auto b = sample_population(large);
    REQUIRE(b.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(config_to_json(a[i]).dump() == config_to_json(b[i]).dump());
    }
}

TEST_CASE("population: every draw lands in its configured range") {
    FleetConfig cfg;
    cfg.devices = 500;
    cfg.master_seed = 6;
    auto pop = sample_population(cfg);
    REQUIRE(pop.size() == 500);

    std::uint32_t pie = 0, ones = 0, bloated = 0, fifo = 0;
    std::map<std::uint64_t, std::uint32_t> rate_counts;
    std::vector<double> rtts;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const TestConfig& t = pop[i];
        CHECK(t.label == ("dev" + std::string(6 - std::to_string(i).size(), '0') +
                          std::to_string(i)));
        bool known_rate = t.link.rate_bps == 5'000'000 || t.link.rate_bps == 10'000'000 ||
                          t.link.rate_bps == 20'000'000 || t.link.rate_bps == 35'000'000;
        CHECK(known_rate);
        ++rate_counts[t.link.rate_bps];
        CHECK(t.load_flows >= 1);
        CHECK(t.load_flows <= 8);
        if (t.load_flows == 1) ++ones;
        CHECK(t.link.base_rtt.nanos >= 5'000'000);
        CHECK(t.link.base_rtt.nanos <= 25'000'000);
        rtts.push_back(t.link.base_rtt.to_ms());

        if (t.discipline == Discipline::docsis_pie) {
            ++pie;
            // Static buffer sizing never applies to the AQM variant.
            CHECK(t.fifo_target_delay.nanos == 250'000'000);
        } else {
            ++fifo;
            bool stock = t.fifo_target_delay.nanos == 250'000'000;
            bool big = t.fifo_target_delay.nanos >= 500'000'000 &&
                       t.fifo_target_delay.nanos <= 1'500'000'000;
            CHECK((stock || big));
            if (big) ++bloated;
        }
    }

    CHECK(pie == 340);  // 0.68 * 500, quota walk is exact here
    CHECK(fifo == 160);
    for (const auto& [rate, n] : rate_counts) CHECK(n > 50);

    // Single-flow households dominate the load model.
    CHECK(static_cast<double>(ones) / 500.0 > 0.85);

    // Short paths dominate: the sample median sits well below the midpoint.
    std::sort(rtts.begin(), rtts.end());
    double median = rtts[249];
    CHECK(median > 6.0);
    CHECK(median < 9.5);

    double bloat_frac = static_cast<double>(bloated) / static_cast<double>(fifo);
    CHECK(bloat_frac > 0.03);
    CHECK(bloat_frac < 0.35);
}

TEST_CASE("aggregation: rows fold into per-variant stats") {
    FleetSummary s = summarize_rows(small_cfg(), sample_rows());
    CHECK(s.invalid_count == 1);
    REQUIRE(s.variants.count(Discipline::docsis_pie) == 1);
    REQUIRE(s.variants.count(Discipline::buffer_control_fifo) == 1);

    const VariantStats& p = s.variants.at(Discipline::docsis_pie);
    CHECK(p.device_count == 2);
    CHECK(p.means_sorted == std::vector<double>{10.25, 20.5});
    CHECK(p.maxes_sorted == std::vector<double>{30.25, 40.5});
    CHECK(p.median_mean_ms == 10.25);  // lower-of-two nearest rank
    CHECK(p.median_max_ms == 30.25);
    REQUIRE(p.hist_fraction.size() == kHistBins + 1);
    CHECK(p.hist_fraction[0] == 0.5);   // 10.25 in [0,15)
    CHECK(p.hist_fraction[1] == 0.5);   // 20.5 in [15,30)
    double psum = 0;
    for (double f : p.hist_fraction) psum += f;
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));

    const VariantStats& f = s.variants.at(Discipline::buffer_control_fifo);
    CHECK(f.device_count == 2);
    CHECK(f.hist_fraction[13] == 0.5);          // 200.125 in [195,210)
    CHECK(f.hist_fraction[kHistBins] == 0.5);   // 1010.5 past the last edge
}

TEST_CASE("aggregation: an all-invalid fold leaves no variants") {
    std::vector<DeviceRow> rows = {
        make_row(0, Discipline::docsis_pie, 0, 0, 0, true),
        make_row(1, Discipline::buffer_control_fifo, 0, 0, 0, true),
    };
    FleetSummary s = summarize_rows(small_cfg(), rows);
    CHECK(s.invalid_count == 2);
    CHECK(s.variants.empty());
}

TEST_CASE("comparison: a fleet against itself is all zeros") {
    FleetSummary s = summarize_rows(small_cfg(), sample_rows());
    Comparison c = compare(s, s);
    REQUIRE(c.rows.size() == 3);
    CHECK(c.rows[0].variant == "all");
    for (const auto& row : c.rows) {
        CHECK(row.delta_median_mean_ms == 0.0);
        CHECK(row.delta_median_max_ms == 0.0);
        CHECK(row.delta_low_band_fraction == 0.0);
    }
    CHECK(c.verdict == "median device means are identical");
}

TEST_CASE("comparison: swapping the fleets negates every delta") {
    FleetSummary a = summarize_rows(small_cfg(), sample_rows());
    auto rows = sample_rows();
    for (auto& r : rows) {
        if (!r.invalid) {
            r.mean_ms += 100.0;
            r.max_ms += 150.0;
        }
    }
    FleetSummary b = summarize_rows(small_cfg(), rows);

    Comparison ab = compare(a, b);
    Comparison ba = compare(b, a);
    REQUIRE(ab.rows.size() == ba.rows.size());
    for (std::size_t i = 0; i < ab.rows.size(); ++i) {
        CHECK(ab.rows[i].variant == ba.rows[i].variant);
        CHECK(ab.rows[i].delta_median_mean_ms == -ba.rows[i].delta_median_mean_ms);
        CHECK(ab.rows[i].delta_median_max_ms == -ba.rows[i].delta_median_max_ms);
        CHECK(ab.rows[i].delta_low_band_fraction == -ba.rows[i].delta_low_band_fraction);
    }
    CHECK(ab.rows[0].delta_median_mean_ms == -100.0);
    CHECK(ab.verdict.rfind("first fleet's median device mean is lower by", 0) == 0);
    CHECK(ba.verdict.rfind("first fleet's median device mean is higher by", 0) == 0);

    std::string text = comparison_to_text(ab);
    CHECK(text.rfind("variant,delta_median_mean_ms,delta_median_max_ms,"
                     "delta_low_band_fraction\n", 0) == 0);
    CHECK(text.find("verdict: ") != std::string::npos);
}

TEST_CASE("comparison: mismatched histogram layouts are rejected") {
    FleetSummary a = summarize_rows(small_cfg(), sample_rows());
    FleetSummary b = a;
    b.variants.begin()->second.hist_fraction.resize(10);
    CHECK_THROWS_AS(compare(a, b), std::invalid_argument);
}

TEST_CASE("reports: emitted files round-trip and re-emit identically") {
    FleetSummary s = summarize_rows(small_cfg(), sample_rows());
    fs::path da = fresh_dir("aqmsim_emit_a");
    fs::path db = fresh_dir("aqmsim_emit_b");
    emit_reports(s, da);
    emit_reports(s, db);

    const char* names[] = {"devices.csv", "cdf_mean.csv", "cdf_max.csv",
                           "histogram.csv", "manifest.json"};
    for (const char* n : names) {
        std::string ca = read_file(da / n);
        CHECK(ca == read_file(db / n));
        CHECK(ca.find('\r') == std::string::npos);
        CHECK_FALSE(ca.empty());
    }

    // Invalid devices never reach the per-device table.
    std::vector<DeviceRow> loaded = load_device_csv(da / "devices.csv");
    REQUIRE(loaded.size() == 4);
    auto original = sample_rows();
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].device_id == original[i].device_id);
        CHECK(loaded[i].discipline == original[i].discipline);
        CHECK(loaded[i].rate_bps == original[i].rate_bps);
        CHECK(loaded[i].flows == original[i].flows);
        CHECK(loaded[i].base_rtt_ms == original[i].base_rtt_ms);
        CHECK(loaded[i].mean_ms == original[i].mean_ms);
        CHECK(loaded[i].max_ms == original[i].max_ms);
        CHECK(loaded[i].p99_ms == original[i].p99_ms);
        CHECK_FALSE(loaded[i].invalid);
    }

    // The histogram rebuilt from the emitted table matches the emitted one.
    FleetSummary rebuilt = summarize_rows(s.config, loaded);
    for (const auto& [d, v] : s.variants) {
        REQUIRE(rebuilt.variants.count(d) == 1);
        CHECK(rebuilt.variants.at(d).hist_fraction == v.hist_fraction);
    }

    // Histogram file shape: one header plus a full bin set per variant, each
    // summing to one, with an open-ended final bin.
    std::stringstream hs(read_file(da / "histogram.csv"));
    std::string line;
    REQUIRE(std::getline(hs, line));
    CHECK(line == "variant,bin_low_ms,bin_high_ms,fraction");
    std::map<std::string, int> bin_rows;
    std::map<std::string, double> frac_sum;
    bool saw_inf = false;
    while (std::getline(hs, line)) {
        std::stringstream ls(line);
        std::string variant, lo, hi, frac;
        REQUIRE(std::getline(ls, variant, ','));
        REQUIRE(std::getline(ls, lo, ','));
        REQUIRE(std::getline(ls, hi, ','));
        REQUIRE(std::getline(ls, frac, ','));
        ++bin_rows[variant];
        frac_sum[variant] += std::stod(frac);
        if (hi == "inf") saw_inf = true;
    }
    CHECK(saw_inf);
    REQUIRE(bin_rows.size() == 2);
    for (const auto& [variant, n] : bin_rows) {
        CHECK(n == kHistBins + 1);
        CHECK(frac_sum[variant] == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Each variant's distribution curve ends at exactly 1.
    std::stringstream cs(read_file(da / "cdf_mean.csv"));
    REQUIRE(std::getline(cs, line));
    CHECK(line == "variant,value_ms,cumulative_fraction");
    std::map<std::string, std::string> last_frac;
    std::map<std::string, double> prev_val;
    while (std::getline(cs, line)) {
        std::stringstream ls(line);
        std::string variant, val, frac;
        REQUIRE(std::getline(ls, variant, ','));
        REQUIRE(std::getline(ls, val, ','));
        REQUIRE(std::getline(ls, frac, ','));
        double v = std::stod(val);
        if (prev_val.count(variant)) CHECK(v >= prev_val[variant]);
        prev_val[variant] = v;
        last_frac[variant] = frac;
    }
    for (const auto& [variant, frac] : last_frac) CHECK(frac == "1");

    nlohmann::ordered_json manifest =
        nlohmann::ordered_json::parse(read_file(da / "manifest.json"));
    CHECK(manifest["devices"] == 5);
    CHECK(manifest["invalid_count"] == 1);
    REQUIRE(manifest["invalid_device_ids"].size() == 1);
    CHECK(manifest["invalid_device_ids"][0] == 4);
    CHECK(manifest["variant_device_counts"]["docsis_pie"] == 2);
    CHECK(manifest["variant_device_counts"]["buffer_control_fifo"] == 2);
    CHECK(manifest.contains("rate_plans"));
    CHECK(manifest.contains("base_config"));
}

TEST_CASE("reports: device table rejects foreign or mangled files") {
    fs::path d = fresh_dir("aqmsim_badcsv");

    {
        std::ofstream out(d / "badheader.csv", std::ios::binary);
        out << "id,discipline\n0,docsis_pie\n";
    }
    CHECK_THROWS_AS(load_device_csv(d / "badheader.csv"), std::runtime_error);

    {
        std::ofstream out(d / "short.csv", std::ios::binary);
        out << "device_id,discipline,rate_bps,flows,base_rtt_ms,mean_ms,max_ms,p99_ms\n";
        out << "0,docsis_pie,10000000,1,10.5,20.5,40.5\n";
    }
    CHECK_THROWS_AS(load_device_csv(d / "short.csv"), std::runtime_error);

    {
        std::ofstream out(d / "garbled.csv", std::ios::binary);
        out << "device_id,discipline,rate_bps,flows,base_rtt_ms,mean_ms,max_ms,p99_ms\n";
        out << "0,docsis_pie,10000000,one,10.5,20.5,40.5,38.5\n";
    }
    CHECK_THROWS_AS(load_device_csv(d / "garbled.csv"), std::runtime_error);

    CHECK_THROWS_AS(load_device_csv(d / "missing.csv"), std::runtime_error);
}

TEST_CASE("fleet config validation rejects bad shapes") {
    FleetConfig ok;
    CHECK_NOTHROW(ok.validate());

    FleetConfig c1;
    c1.mix.clear();
    CHECK_THROWS_AS(c1.validate(), std::invalid_argument);

    FleetConfig c2;
    c2.mix[Discipline::docsis_pie] = -0.1;
    CHECK_THROWS_AS(c2.validate(), std::invalid_argument);

    FleetConfig c3;
    c3.mix = {{Discipline::docsis_pie, 0.0}};
    CHECK_THROWS_AS(c3.validate(), std::invalid_argument);

    FleetConfig c4;
    c4.rate_plans.clear();
    CHECK_THROWS_AS(c4.validate(), std::invalid_argument);

    FleetConfig c5;
    c5.rate_plans = {{0, 1.0}};
    CHECK_THROWS_AS(c5.validate(), std::invalid_argument);

    FleetConfig c6;
    c6.flows_min = 0;
    CHECK_THROWS_AS(c6.validate(), std::invalid_argument);

    FleetConfig c7;
    c7.flows_min = 9;
    c7.flows_max = 8;
    CHECK_THROWS_AS(c7.validate(), std::invalid_argument);

    FleetConfig c8;
    c8.base_rtt_min_ms = 30;
    c8.base_rtt_max_ms = 25;
    CHECK_THROWS_AS(c8.validate(), std::invalid_argument);

    FleetConfig c9;
    c9.bloated_fraction = 1.5;
    CHECK_THROWS_AS(c9.validate(), std::invalid_argument);

    FleetConfig c10;
    c10.bloat_delay_min_ms = 0;
    CHECK_THROWS_AS(c10.validate(), std::invalid_argument);

    // A zero-device fleet is a valid population description.
    FleetConfig c11;
    c11.devices = 0;
    CHECK_NOTHROW(c11.validate());
}

TEST_CASE("fleet runs identically for any worker count") {
    FleetConfig cfg;
    cfg.devices = 8;
    cfg.master_seed = 33;
    cfg.rate_plans = {{5'000'000, 1.0}, {10'000'000, 1.0}};
    FleetSummary a = run_fleet(cfg, 1);
    FleetSummary b = run_fleet(cfg, 4);
    CHECK(a.invalid_count == 0);
    check_summaries_equal(a, b);
    // Both variants ran, and every row is populated.
    CHECK(a.variants.size() == 2);
    for (const auto& row : a.rows) {
        CHECK(row.mean_ms > 0.0);
        CHECK(row.max_ms >= row.mean_ms);
    }
}

TEST_CASE("scenario sanity: a deeper static buffer only makes latency worse") {
    TestConfig lo;
    lo.seed = 21;
    lo.discipline = Discipline::buffer_control_fifo;
    lo.fifo_target_delay = SimTime::from_ms(250);
    TestConfig hi = lo;
    hi.fifo_target_delay = SimTime::from_ms(400);
    TestReport rl = run_latency_under_load(lo);
    TestReport rh = run_latency_under_load(hi);
    CHECK(rh.stats.mean_ms > rl.stats.mean_ms);
    CHECK(rh.stats.mean_ms > 1.3 * rl.stats.mean_ms * 250.0 / 400.0);
}

TEST_CASE("scenario sanity: the AQM barely notices a deeper hard ceiling") {
    TestConfig lo;
    lo.seed = 22;
    lo.discipline = Discipline::docsis_pie;
    lo.pie.hard_limit_bytes = 312'500;
    TestConfig hi = lo;
    hi.pie.hard_limit_bytes = 625'000;
    TestReport rl = run_latency_under_load(lo);
    TestReport rh = run_latency_under_load(hi);
    double rel = std::abs(rh.stats.mean_ms - rl.stats.mean_ms) / rl.stats.mean_ms;
    CHECK(rel < 0.10);
}

TEST_CASE("config text: comments, blanks and spacing are tolerated") {
    auto kv = parse_config_text(
        "# leading comment\n"
        "\n"
        "  seed = 12  \n"
        "label=pilot # trailing comment\n"
        "rate_bps=20000000\n");
    REQUIRE(kv.size() == 3);
    CHECK(kv.at("seed") == "12");
    CHECK(kv.at("label") == "pilot");
    CHECK(kv.at("rate_bps") == "20000000");
}

TEST_CASE("config text: malformed lines are rejected with a line number") {
    CHECK_THROWS_AS(parse_config_text("seed\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("=5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("a=1\na=2\n"), std::invalid_argument);
    try {
        parse_config_text("a=1\nbogus line\n");
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("config apply: single-run settings land in the right fields") {
    TestConfig cfg;
    apply_test_config(
        {
            {"seed", "77"},
            {"discipline", "fifo"},
            {"rate_bps", "20000000"},
            {"base_rtt_ms", "14.5"},
            {"load_flows", "2"},
            {"fifo_target_delay_ms", "400"},
            {"probe_duration_s", "9"},
        },
        cfg);
    CHECK(cfg.seed == 77);
    CHECK(cfg.discipline == Discipline::buffer_control_fifo);
    CHECK(cfg.link.rate_bps == 20'000'000);
    CHECK(cfg.link.base_rtt.nanos == 14'500'000);
    CHECK(cfg.load_flows == 2);
    CHECK(cfg.fifo_target_delay.nanos == 400'000'000);
    CHECK(cfg.probe_duration.nanos == 9'000'000'000);
}

TEST_CASE("config apply: unknown keys and invalid values are user errors") {
    TestConfig cfg;
    try {
        apply_test_config({{"rate_mbps", "10"}}, cfg);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("unknown config key") != std::string::npos);
        CHECK(msg.find("rate_bps") != std::string::npos);  // lists accepted keys
    }
    CHECK_THROWS_AS(apply_test_config({{"seed", "abc"}}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(apply_test_config({{"seed", "-3"}}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(apply_test_config({{"load_flows", "4x"}}, cfg), std::invalid_argument);
    // Values are applied, then the whole config is checked.
    CHECK_THROWS_AS(apply_test_config({{"mss", "63"}}, cfg), std::invalid_argument);

    FleetConfig fleet;
    CHECK_THROWS_AS(apply_fleet_config({{"seed", "1"}}, fleet), std::invalid_argument);
    CHECK_THROWS_AS(apply_fleet_config({{"discipline", "pie"}}, fleet),
                    std::invalid_argument);
}

TEST_CASE("config apply: rate plans accept bare and weighted forms") {
    FleetConfig a;
    apply_fleet_config({{"rate_plans_mbps", "5,10"}}, a);
    REQUIRE(a.rate_plans.size() == 2);
    CHECK(a.rate_plans[0].first == 5'000'000);
    CHECK(a.rate_plans[0].second == 1.0);
    CHECK(a.rate_plans[1].first == 10'000'000);
    CHECK(a.rate_plans[1].second == 1.0);

    FleetConfig b;
    apply_fleet_config({{"rate_plans_mbps", "5:1, 10:2, 35:0.5"}}, b);
    REQUIRE(b.rate_plans.size() == 3);
    CHECK(b.rate_plans[1].first == 10'000'000);
    CHECK(b.rate_plans[1].second == 2.0);
    CHECK(b.rate_plans[2].first == 35'000'000);
    CHECK(b.rate_plans[2].second == 0.5);

    FleetConfig c;
    CHECK_THROWS_AS(apply_fleet_config({{"rate_plans_mbps", ""}}, c),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_fleet_config({{"rate_plans_mbps", "0"}}, c),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_fleet_config({{"rate_plans_mbps", "10:-1"}}, c),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_fleet_config({{"rate_plans_mbps", "ten"}}, c),
                    std::invalid_argument);
}

TEST_CASE("config print: emitted settings parse back to the same config") {
    TestConfig cfg;
    cfg.label = "pin";
    cfg.seed = 9;
    cfg.discipline = Discipline::buffer_control_fifo;
    cfg.link.rate_bps = 20'000'000;
    cfg.load_flows = 2;
    cfg.fifo_target_delay = SimTime::from_ms(400);

    std::string text = print_test_config(cfg);
    TestConfig back;
    apply_test_config(parse_config_text(text), back);
    CHECK(print_test_config(back) == text);
    CHECK(config_to_json(back).dump() == config_to_json(cfg).dump());

    FleetConfig fleet;
    fleet.devices = 10;
    fleet.master_seed = 5;
    fleet.rate_plans = {{5'000'000, 1.0}, {10'000'000, 2.0}};
    fleet.bloated_fraction = 0.2;
    fleet.base.link.rate_bps = 12'000'000;

    std::string ftext = print_fleet_config(fleet);
    FleetConfig fback;
    apply_fleet_config(parse_config_text(ftext), fback);
    CHECK(print_fleet_config(fback) == ftext);
    CHECK(fback.devices == 10);
    CHECK(fback.master_seed == 5);
    REQUIRE(fback.rate_plans.size() == 2);
    CHECK(fback.rate_plans[1].second == 2.0);
    CHECK(fback.base.link.rate_bps == 12'000'000);
}
