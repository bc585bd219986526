#include "aqmsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace aqmsim {

SimTime nearest_rank(const std::vector<SimTime>& sorted, double pct) {
    if (sorted.empty()) throw std::invalid_argument("nearest_rank: empty sample set");
    if (pct <= 0.0 || pct > 100.0) throw std::invalid_argument("nearest_rank: pct out of range");
    std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

LatencySummary summarize(const std::vector<SimTime>& rtts) {
    if (rtts.empty()) throw std::invalid_argument("summarize: empty sample set");
    std::vector<SimTime> sorted = rtts;
    std::sort(sorted.begin(), sorted.end());

    unsigned long long sum = 0;
    for (SimTime t : sorted) sum += t.nanos;

    LatencySummary s;
    s.mean_ms = static_cast<double>(sum) / static_cast<double>(sorted.size()) / 1e6;
    s.max_ms = sorted.back().to_ms();
    s.p50_ms = nearest_rank(sorted, 50).to_ms();
    s.p90_ms = nearest_rank(sorted, 90).to_ms();
    s.p99_ms = nearest_rank(sorted, 99).to_ms();
    return s;
}

std::string format6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double round6(double v) {
    return std::stod(format6(v));
}

}  // namespace aqmsim
