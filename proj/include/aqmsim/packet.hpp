#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "aqmsim/sim_time.hpp"

namespace aqmsim {

enum class PacketKind { bulk, probe_request, probe_response, cross };

// Sizes are on-the-wire bytes, all overhead included.
inline constexpr std::uint32_t kMinPacketBytes = 64;
inline constexpr std::uint32_t kMaxPacketBytes = 1500;

struct Packet {
    std::uint64_t id = 0;
    std::uint32_t flow_id = 0;
    PacketKind kind = PacketKind::bulk;
    std::uint32_t size_bytes = kMaxPacketBytes;
    SimTime created_at{};
    std::optional<SimTime> enqueued_at;
    std::uint64_t probe_seq = 0;  // meaningful for probe kinds only
};

inline Packet make_packet(std::uint64_t id, std::uint32_t flow_id, PacketKind kind,
                          std::uint32_t size_bytes, SimTime created_at) {
    if (size_bytes < kMinPacketBytes || size_bytes > kMaxPacketBytes) {
        throw std::invalid_argument("packet size outside [64, 1500]");
    }
    Packet p;
    p.id = id;
    p.flow_id = flow_id;
    p.kind = kind;
    p.size_bytes = size_bytes;
    p.created_at = created_at;
    return p;
}

}  // namespace aqmsim
