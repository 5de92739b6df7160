#pragma once

#include <cstdint>

namespace aqmlab {

// The three packet types that appear in traces. cbr is parsed on input but
// never generated by the built-in traffic sources.
enum class PacketKind { Tcp, Ack, Cbr };

const char* to_token(PacketKind kind); // "tcp" | "ack" | "cbr"

// node.port address, e.g. "3.0" in a trace line.
struct Addr {
    int node = 0;
    int port = 0;
    bool operator==(const Addr&) const = default;
};

struct Packet {
    std::uint64_t id = 0;   // unique per run
    int flow_id = 0;
    PacketKind kind = PacketKind::Tcp;
    int size_bytes = 0;
    long long seq = 0;
    Addr src{};
    Addr dst{};
    double created_at = 0.0;
};

} // namespace aqmlab
