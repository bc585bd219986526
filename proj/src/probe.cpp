#include "aqmsim/probe.hpp"

namespace aqmsim {

std::optional<std::uint64_t> probe_tick(ProbeState& st, SimTime now) {
    if (st.outstanding) {
        if (now - st.outstanding->sent_at < st.timeout) {
            return std::nullopt;
        }
        st.samples.push_back(ProbeSample{st.outstanding->seq, st.timeout, true});
        st.outstanding.reset();
    }
    std::uint64_t seq = st.next_seq++;
    st.outstanding = ProbeOutstanding{seq, now};
    return seq;
}

void probe_on_response(ProbeState& st, std::uint64_t seq, SimTime now) {
    if (!st.outstanding || st.outstanding->seq != seq) {
        ++st.discarded;
        return;
    }
    st.samples.push_back(ProbeSample{seq, now - st.outstanding->sent_at, false});
    st.outstanding.reset();
}

}  // namespace aqmsim
