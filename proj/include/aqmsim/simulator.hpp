#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "aqmsim/sim_time.hpp"

namespace aqmsim {

using EventFn = std::function<void()>;

struct EventHandle {
    std::uint64_t seq = 0;
};

// Single-threaded discrete-event engine. Events with equal fire time dispatch
// in scheduling order (seq tie-break), so runs are reproducible down to the
// dispatch sequence. Scheduling into the past is a simulation bug and faults.
class Simulator {
  public:
    SimTime now() const { return now_; }

    EventHandle schedule(SimTime fire_at, EventFn fn);
    EventHandle schedule_in(SimTime delay, EventFn fn) {
        return schedule(now_ + delay, std::move(fn));
    }

    // Cancelling an unknown or already-fired handle is a no-op.
    void cancel(EventHandle h);

    // Dispatches everything with fire_at <= t_end, then advances the clock to
    // t_end (even if the queue drained earlier). Returns the clock.
    SimTime run_until(SimTime t_end);

    std::size_t pending() const { return heap_.size() - stale_; }
    std::uint64_t dispatched() const { return dispatched_; }

  private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        EventFn fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at != b.at) return b.at < a.at;
            return b.seq < a.seq;
        }
    };

    std::vector<Entry> heap_;
    std::unordered_set<std::uint64_t> live_;  // scheduled and not yet fired/cancelled
    std::size_t stale_ = 0;
    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
};

}  // namespace aqmsim
