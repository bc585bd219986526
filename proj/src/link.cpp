#include "aqmsim/link.hpp"

#include <cmath>
#include <stdexcept>

namespace aqmsim {

void LinkConfig::validate() const {
    if (rate_bps == 0) throw std::invalid_argument("link: rate must be > 0");
    if (bucket_bytes < kMaxPacketBytes) {
        throw std::invalid_argument("link: bucket below one max-size packet");
    }
}

SimTime serialize_time(std::uint64_t size_bytes, std::uint64_t rate_bps) {
    if (rate_bps == 0) throw std::invalid_argument("serialize_time: rate must be > 0");
    std::uint64_t bits_ns = size_bytes * 8'000'000'000ull;
    return SimTime::from_ns((bits_ns + rate_bps - 1) / rate_bps);
}

TokenBucket::TokenBucket(std::uint64_t rate_bps, std::uint64_t bucket_bytes)
    : rate_bps_(rate_bps),
      bucket_bytes_(bucket_bytes),
      tokens_(static_cast<double>(bucket_bytes)) {  // starts full
    if (rate_bps_ == 0) throw std::invalid_argument("token bucket: rate must be > 0");
}

double TokenBucket::tokens_at(SimTime at) const {
    double refill = static_cast<double>((at - last_refill_).nanos) *
                    static_cast<double>(rate_bps_) / 8e9;
    return std::min(static_cast<double>(bucket_bytes_), tokens_ + refill);
}

SimTime TokenBucket::take(std::uint32_t size_bytes, SimTime now) {
    if (size_bytes > bucket_bytes_) {
        throw std::invalid_argument("token bucket: packet exceeds bucket depth");
    }
    double have = tokens_at(now);
    SimTime start = now;
    if (have < static_cast<double>(size_bytes)) {
        double deficit = static_cast<double>(size_bytes) - have;
        std::uint64_t wait =
            static_cast<std::uint64_t>(std::ceil(deficit * 8e9 / static_cast<double>(rate_bps_)));
        start = now + SimTime::from_ns(wait);
    }
    SimTime finish = start + serialize_time(size_bytes, rate_bps_);
    tokens_ = tokens_at(finish) - static_cast<double>(size_bytes);
    if (tokens_ < 0.0) tokens_ = 0.0;  // guard fp rounding
    last_refill_ = finish;
    return finish;
}

UpstreamLink::UpstreamLink(Simulator& sim, const LinkConfig& cfg,
                           std::unique_ptr<Qdisc> qdisc)
    : sim_(sim),
      cfg_(cfg),
      qdisc_(std::move(qdisc)),
      bucket_(cfg.rate_bps, cfg.bucket_bytes) {
    cfg_.validate();
}

void UpstreamLink::submit(Packet pkt) {
    ++submitted_;
    SimTime now = sim_.now();
    Packet view = pkt;  // packets are small PODs; keep one for the drop callback
    EnqueueResult r = qdisc_->enqueue(std::move(pkt), now);
    if (is_drop(r)) {
        ++dropped_;
        if (on_drop) on_drop(view, r, now);
        return;
    }
    pump();
}

void UpstreamLink::pump() {
    if (busy_) return;
    auto pkt = qdisc_->dequeue(sim_.now());
    if (!pkt) return;
    busy_ = true;
    SimTime departure = bucket_.take(pkt->size_bytes, sim_.now());
    Packet moved = std::move(*pkt);
    sim_.schedule(departure, [this, p = std::move(moved), departure]() mutable {
        busy_ = false;
        SimTime arrival = departure + cfg_.mac_access_delay + cfg_.base_rtt / 2;
        ++delivered_;
        Packet delivered_pkt = std::move(p);
        sim_.schedule(arrival, [this, q = std::move(delivered_pkt), arrival]() {
            if (on_deliver) on_deliver(q, arrival);
        });
        pump();
    });
}

}  // namespace aqmsim
