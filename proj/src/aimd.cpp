#include "aqmsim/aimd.hpp"

#include <algorithm>

namespace aqmsim {

void aimd_on_ack(AimdState& st, std::uint64_t acked_bytes) {
    if (st.phase == AimdPhase::slow_start) {
        st.cwnd_bytes += static_cast<double>(acked_bytes);
        if (st.cwnd_bytes >= st.ssthresh_bytes) {
            st.phase = AimdPhase::congestion_avoidance;
        }
    } else {
        st.cwnd_bytes += static_cast<double>(st.mss) *
                         static_cast<double>(acked_bytes) / st.cwnd_bytes;
    }
}

bool aimd_on_loss(AimdState& st, SimTime now, SimTime srtt) {
    if (st.decreased_once && now - st.last_decrease < srtt) {
        return false;  // drops within one RTT collapse into a single decrease
    }
    st.cwnd_bytes = std::max(st.cwnd_bytes / 2.0, 2.0 * st.mss);
    st.ssthresh_bytes = st.cwnd_bytes;
    st.phase = AimdPhase::congestion_avoidance;
    st.last_decrease = now;
    st.decreased_once = true;
    return true;
}

std::uint64_t aimd_can_send(const AimdState& st) {
    double room = st.cwnd_bytes - static_cast<double>(st.inflight_bytes);
    if (room < st.mss) return 0;
    std::uint64_t quanta = static_cast<std::uint64_t>(room) / st.mss;
    return quanta * st.mss;
}

}  // namespace aqmsim
