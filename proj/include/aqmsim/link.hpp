#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "aqmsim/packet.hpp"
#include "aqmsim/qdisc.hpp"
#include "aqmsim/sim_time.hpp"
#include "aqmsim/simulator.hpp"

namespace aqmsim {

struct LinkConfig {
    std::uint64_t rate_bps = 10'000'000;  // shaped maximum sustained rate
    std::uint64_t bucket_bytes = 24'000;  // shaper burst depth (16 * 1500)
    SimTime mac_access_delay = SimTime::from_ms(2);
    SimTime base_rtt = SimTime::from_ms(10);

    void validate() const;
};

// Time to clock size_bytes onto the wire at rate_bps, rounded up to whole ns.
SimTime serialize_time(std::uint64_t size_bytes, std::uint64_t rate_bps);

// Token-bucket shaper. Transmission of the head packet starts once the bucket
// holds enough tokens; serialization runs at the shaped rate; tokens refill
// continuously (capped at the bucket depth) and are debited at departure.
class TokenBucket {
  public:
    TokenBucket(std::uint64_t rate_bps, std::uint64_t bucket_bytes);

    // Earliest completion time for a packet whose transmission may start at or
    // after `now`. Advances the bucket state to that departure.
    SimTime take(std::uint32_t size_bytes, SimTime now);

    double tokens_at(SimTime at) const;
    std::uint64_t bucket_bytes() const { return bucket_bytes_; }

  private:
    std::uint64_t rate_bps_;
    std::uint64_t bucket_bytes_;
    double tokens_;
    SimTime last_refill_{};
};

// One upstream bottleneck: qdisc feeding a shaped transmitter, then a fixed
// media-access delay and half the base RTT to reach the remote end. The
// downstream direction is uncongested and handled by the callers directly.
class UpstreamLink {
  public:
    UpstreamLink(Simulator& sim, const LinkConfig& cfg, std::unique_ptr<Qdisc> qdisc);

    // Enqueue and, if the transmitter is idle, start service.
    void submit(Packet pkt);

    // Fired at the moment the packet arrives at the remote end.
    std::function<void(const Packet&, SimTime arrival)> on_deliver;
    // Fired synchronously when the qdisc refuses a packet.
    std::function<void(const Packet&, EnqueueResult, SimTime now)> on_drop;

    Qdisc& qdisc() { return *qdisc_; }
    const LinkConfig& config() const { return cfg_; }
    bool busy() const { return busy_; }

    std::uint64_t submitted() const { return submitted_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t dropped() const { return dropped_; }

  private:
    void pump();

    Simulator& sim_;
    LinkConfig cfg_;
    std::unique_ptr<Qdisc> qdisc_;
    TokenBucket bucket_;
    bool busy_ = false;
    std::uint64_t submitted_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
};

}  // namespace aqmsim
