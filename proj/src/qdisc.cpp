#include "aqmsim/qdisc.hpp"

#include <algorithm>
#include <stdexcept>

namespace aqmsim {

std::uint64_t buffer_control_limit(std::uint64_t rate_bps, SimTime target_delay) {
    if (rate_bps == 0) {
        throw std::invalid_argument("buffer_control_limit: rate must be > 0");
    }
    // bytes = rate * delay / 8, rounded up. rate * nanos stays under 2^63 for
    // any sane (rate, delay) pair this simulator accepts.
    std::uint64_t num = rate_bps * target_delay.nanos;
    std::uint64_t bytes = (num + 8'000'000'000ull - 1) / 8'000'000'000ull;
    return std::max<std::uint64_t>(bytes, kMaxPacketBytes);
}

FifoQdisc::FifoQdisc(std::uint64_t limit_bytes) : limit_(limit_bytes) {
    if (limit_ < kMaxPacketBytes) {
        throw std::invalid_argument("fifo limit below one max-size packet");
    }
}

EnqueueResult FifoQdisc::enqueue(Packet&& pkt, SimTime now) {
    if (backlog_ + pkt.size_bytes > limit_) {
        ++tail_drops_;
        return EnqueueResult::dropped_tail;
    }
    pkt.enqueued_at = now;
    backlog_ += pkt.size_bytes;
    q_.push_back(std::move(pkt));
    return EnqueueResult::accepted;
}

std::optional<Packet> FifoQdisc::dequeue(SimTime) {
    if (q_.empty()) return std::nullopt;
    Packet p = std::move(q_.front());
    q_.pop_front();
    backlog_ -= p.size_bytes;
    return p;
}

void PieParams::validate() const {
    if (latency_target.is_zero()) throw std::invalid_argument("pie: latency_target must be > 0");
    if (update_interval.is_zero()) throw std::invalid_argument("pie: update_interval must be > 0");
    if (gain_a <= 0 || gain_b <= 0) throw std::invalid_argument("pie: gains must be > 0");
    if (mean_pktsize == 0) throw std::invalid_argument("pie: mean_pktsize must be > 0");
}

std::uint64_t PieParams::effective_hard_limit(std::uint64_t rate_bps) const {
    if (hard_limit_bytes != 0) return hard_limit_bytes;
    return buffer_control_limit(rate_bps, SimTime::from_ms(250));
}

SimTime pie_qdelay(std::uint64_t backlog_bytes, std::uint64_t rate_bps) {
    if (rate_bps == 0) {
        throw std::invalid_argument("pie_qdelay: rate must be > 0");
    }
    return SimTime::from_ns(backlog_bytes * 8'000'000'000ull / rate_bps);
}

double pie_drop_prob_step(double p, SimTime qdelay, SimTime qdelay_old,
                          const PieParams& params) {
    double qd = qdelay.to_s();
    double qo = qdelay_old.to_s();
    double target = params.latency_target.to_s();

    double delta = params.gain_a * (qd - target) + params.gain_b * (qd - qo);

    // Step-scale ladder: small probabilities move cautiously.
    if (p < 1e-6) {
        delta /= 2048.0;
    } else if (p < 1e-5) {
        delta /= 512.0;
    } else if (p < 1e-4) {
        delta /= 128.0;
    } else if (p < 1e-3) {
        delta /= 32.0;
    } else if (p < 1e-2) {
        delta /= 8.0;
    } else if (p < 1e-1) {
        delta /= 2.0;
    }

    double next = p + delta;
    if (qdelay.is_zero() && qdelay_old.is_zero()) {
        next *= 0.98;  // idle decay
    }
    return std::clamp(next, 0.0, 1.0);
}

PieQdisc::PieQdisc(const PieParams& params, std::uint64_t rate_bps, RngStream rng)
    : params_(params),
      rate_bps_(rate_bps),
      hard_limit_(params.effective_hard_limit(rate_bps)),
      rng_(rng),
      burst_allowance_(params.max_burst) {
    params_.validate();
    if (rate_bps_ == 0) throw std::invalid_argument("pie: rate must be > 0");
}

EnqueueResult PieQdisc::enqueue(Packet&& pkt, SimTime now) {
    if (backlog_ + pkt.size_bytes > hard_limit_) {
        ++overflow_drops_;
        return EnqueueResult::dropped_overflow;
    }

    bool bypass = burst_allowance_ > SimTime{} ||
                  (drop_prob_ < 0.2 && qdelay_old_.nanos < params_.latency_target.nanos / 2) ||
                  backlog_ < 2ull * params_.mean_pktsize;
    if (!bypass) {
        // Size-proportional early drop keeps small packets largely unscathed.
        double eff = drop_prob_ * static_cast<double>(pkt.size_bytes) /
                     static_cast<double>(params_.mean_pktsize);
        eff = std::min(eff, 1.0);
        if (eff > 0.0 && rng_.next_unit() < eff) {
            ++early_drops_;
            return EnqueueResult::dropped_early;
        }
    }

    pkt.enqueued_at = now;
    backlog_ += pkt.size_bytes;
    q_.push_back(std::move(pkt));
    return EnqueueResult::accepted;
}

std::optional<Packet> PieQdisc::dequeue(SimTime) {
    if (q_.empty()) return std::nullopt;
    Packet p = std::move(q_.front());
    q_.pop_front();
    backlog_ -= p.size_bytes;
    return p;
}

void PieQdisc::update(SimTime) {
    qdelay_cur_ = pie_qdelay(backlog_, rate_bps_);
    drop_prob_ = pie_drop_prob_step(drop_prob_, qdelay_cur_, qdelay_old_, params_);
    qdelay_old_ = qdelay_cur_;

    if (burst_allowance_ > SimTime{}) {
        burst_allowance_ = burst_allowance_ > params_.update_interval
                               ? burst_allowance_ - params_.update_interval
                               : SimTime{};
    }

    // Re-arm burst protection only after a sustained fully-idle stretch.
    if (drop_prob_ == 0.0 && backlog_ == 0) {
        idle_time_ += params_.update_interval;
        if (idle_time_ >= params_.burst_reset) {
            burst_allowance_ = params_.max_burst;
        }
    } else {
        idle_time_ = SimTime{};
    }
}

}  // namespace aqmsim
