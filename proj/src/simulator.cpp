#include "aqmsim/simulator.hpp"

#include <algorithm>
#include <stdexcept>

namespace aqmsim {

EventHandle Simulator::schedule(SimTime fire_at, EventFn fn) {
    if (fire_at < now_) {
        throw std::logic_error("schedule: fire time is in the past");
    }
    EventHandle h{next_seq_++};
    heap_.push_back(Entry{fire_at, h.seq, std::move(fn)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    live_.insert(h.seq);
    return h;
}

void Simulator::cancel(EventHandle h) {
    // Only a still-pending event can go stale; fired, cancelled and never-issued
    // handles all fall through as no-ops.
    if (live_.erase(h.seq) == 1) ++stale_;
}

SimTime Simulator::run_until(SimTime t_end) {
    while (!heap_.empty() && heap_.front().at <= t_end) {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry e = std::move(heap_.back());
        heap_.pop_back();
        if (live_.erase(e.seq) == 0) {
            --stale_;  // cancelled while pending
            continue;
        }
        now_ = e.at;  // heap order guarantees monotone advance
        ++dispatched_;
        e.fn();
    }
    if (t_end > now_) now_ = t_end;
    return now_;
}

}  // namespace aqmsim
