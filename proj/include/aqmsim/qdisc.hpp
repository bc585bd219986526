#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "aqmsim/packet.hpp"
#include "aqmsim/rng.hpp"
#include "aqmsim/sim_time.hpp"

namespace aqmsim {

enum class EnqueueResult { accepted, dropped_tail, dropped_early, dropped_overflow };

inline bool is_drop(EnqueueResult r) { return r != EnqueueResult::accepted; }

class Qdisc {
  public:
    virtual ~Qdisc() = default;
    virtual EnqueueResult enqueue(Packet&& pkt, SimTime now) = 0;
    virtual std::optional<Packet> dequeue(SimTime now) = 0;
    virtual std::uint64_t backlog_bytes() const = 0;
    virtual std::size_t len() const = 0;
};

// Bytes a static buffer sized for `target_delay` at `rate_bps` may hold,
// rounded up, floored at one max-size packet so the queue can always admit
// something.
std::uint64_t buffer_control_limit(std::uint64_t rate_bps, SimTime target_delay);

// Plain tail-drop queue with a byte limit.
class FifoQdisc : public Qdisc {
  public:
    explicit FifoQdisc(std::uint64_t limit_bytes);

    EnqueueResult enqueue(Packet&& pkt, SimTime now) override;
    std::optional<Packet> dequeue(SimTime now) override;
    std::uint64_t backlog_bytes() const override { return backlog_; }
    std::size_t len() const override { return q_.size(); }
    std::uint64_t limit_bytes() const { return limit_; }
    std::uint64_t tail_drops() const { return tail_drops_; }

  private:
    std::deque<Packet> q_;
    std::uint64_t limit_;
    std::uint64_t backlog_ = 0;
    std::uint64_t tail_drops_ = 0;
};

struct PieParams {
    SimTime latency_target = SimTime::from_ms(10);
    SimTime update_interval = SimTime::from_ms(16);
    double gain_a = 0.25;  // 1/s, acts on (qdelay - target)
    double gain_b = 2.5;   // 1/s, acts on (qdelay - qdelay_old)
    SimTime max_burst = SimTime::from_ms(142);
    SimTime burst_reset = SimTime::from_s(1);
    std::uint32_t mean_pktsize = 1024;
    std::uint64_t hard_limit_bytes = 0;  // 0: sized for 250 ms at the link rate

    void validate() const;
    std::uint64_t effective_hard_limit(std::uint64_t rate_bps) const;
};

// Queue delay estimate at the shaped drain rate.
SimTime pie_qdelay(std::uint64_t backlog_bytes, std::uint64_t rate_bps);

// One controller step of the drop probability: proportional-integral update
// with the step-scale ladder, the idle decay when both delay samples are zero,
// then clamp to [0, 1]. Pure; the acceptance oracle mirrors it independently.
double pie_drop_prob_step(double p, SimTime qdelay, SimTime qdelay_old,
                          const PieParams& params);

// Delay-based AQM over a byte FIFO: periodic drop-probability controller,
// probabilistic early drop at enqueue scaled by packet size, burst allowance,
// and a hard byte ceiling.
class PieQdisc : public Qdisc {
  public:
    PieQdisc(const PieParams& params, std::uint64_t rate_bps, RngStream rng);

    EnqueueResult enqueue(Packet&& pkt, SimTime now) override;
    std::optional<Packet> dequeue(SimTime now) override;
    std::uint64_t backlog_bytes() const override { return backlog_; }
    std::size_t len() const override { return q_.size(); }

    // Controller tick; call every params.update_interval.
    void update(SimTime now);

    double drop_prob() const { return drop_prob_; }
    SimTime qdelay_cur() const { return qdelay_cur_; }
    SimTime qdelay_old() const { return qdelay_old_; }
    SimTime burst_allowance() const { return burst_allowance_; }
    std::uint64_t hard_limit_bytes() const { return hard_limit_; }
    std::uint64_t early_drops() const { return early_drops_; }
    std::uint64_t overflow_drops() const { return overflow_drops_; }
    const PieParams& params() const { return params_; }

    // Direct state pokes for experiments and tests.
    void set_drop_prob(double p) { drop_prob_ = p; }
    void set_burst_allowance(SimTime t) { burst_allowance_ = t; }
    void set_qdelay_old(SimTime t) { qdelay_old_ = t; }

  private:
    PieParams params_;
    std::uint64_t rate_bps_;
    std::uint64_t hard_limit_;
    RngStream rng_;

    std::deque<Packet> q_;
    std::uint64_t backlog_ = 0;
    double drop_prob_ = 0.0;
    SimTime qdelay_cur_{};
    SimTime qdelay_old_{};
    SimTime burst_allowance_;
    SimTime idle_time_{};
    std::uint64_t early_drops_ = 0;
    std::uint64_t overflow_drops_ = 0;
};

}  // namespace aqmsim
