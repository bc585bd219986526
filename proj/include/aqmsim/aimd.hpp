#pragma once

#include <cstdint>

#include "aqmsim/sim_time.hpp"

namespace aqmsim {

enum class AimdPhase { slow_start, congestion_avoidance };

// Byte-stream additive-increase / multiplicative-decrease window. No
// retransmission bookkeeping: lost bytes simply leave flight when the loss is
// detected, and the stream keeps sending fresh data.
struct AimdState {
    double cwnd_bytes = 0;
    double ssthresh_bytes = 0;
    std::uint64_t inflight_bytes = 0;
    std::uint32_t mss = 1500;
    AimdPhase phase = AimdPhase::slow_start;
    SimTime last_decrease{};
    bool decreased_once = false;
};

inline AimdState aimd_initial(std::uint32_t mss, double ssthresh_bytes) {
    AimdState st;
    st.mss = mss;
    st.cwnd_bytes = 4.0 * mss;
    st.ssthresh_bytes = ssthresh_bytes;
    return st;
}

// Slow start: window grows by the acked bytes (doubling per RTT) until it
// reaches ssthresh. Congestion avoidance: mss*acked/cwnd per ack (one mss per
// RTT of full-window acks).
void aimd_on_ack(AimdState& st, std::uint64_t acked_bytes);

// Halve (floored at 2*mss) at most once per smoothed RTT. Returns whether a
// decrease actually happened.
bool aimd_on_loss(AimdState& st, SimTime now, SimTime srtt);

// Whole-mss sendable quantum; zero when the window is full.
std::uint64_t aimd_can_send(const AimdState& st);

}  // namespace aqmsim
