#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aqmsim/sim_time.hpp"

namespace aqmsim {

struct ProbeSample {
    std::uint64_t seq = 0;
    SimTime rtt{};
    bool censored = false;  // timed out; rtt holds the censor value
};

struct ProbeOutstanding {
    std::uint64_t seq = 0;
    SimTime sent_at{};
};

// Closed-loop request/response prober: one transaction outstanding at a time,
// the next request leaves the moment a response lands. A transaction that
// outlives the timeout is recorded as a right-censored sample and abandoned.
struct ProbeState {
    std::uint64_t next_seq = 0;
    std::optional<ProbeOutstanding> outstanding;
    std::vector<ProbeSample> samples;
    SimTime timeout = SimTime::from_s(3);
    std::uint64_t discarded = 0;  // stale or unknown responses
};

// Returns the sequence number to emit now, or nothing while a fresh
// transaction is still in flight.
std::optional<std::uint64_t> probe_tick(ProbeState& st, SimTime now);

void probe_on_response(ProbeState& st, std::uint64_t seq, SimTime now);

}  // namespace aqmsim
