#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqmsim/sim_time.hpp"

namespace aqmsim {

struct LatencySummary {
    double mean_ms = 0;
    double max_ms = 0;
    double p50_ms = 0;
    double p90_ms = 0;
    double p99_ms = 0;
};

// Nearest-rank percentile over an already-sorted ascending vector:
// value at index ceil(pct/100 * n) - 1.
SimTime nearest_rank(const std::vector<SimTime>& sorted, double pct);

// Mean, max and nearest-rank percentiles of a sample set. Throws on empty
// input; callers surface that as an invalid report instead of fabricating
// numbers.
LatencySummary summarize(const std::vector<SimTime>& rtts);

// Round to 6 significant digits (the precision every report file carries).
double round6(double v);

// %.6g formatting used by all CSV emitters.
std::string format6(double v);

}  // namespace aqmsim
