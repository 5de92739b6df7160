#pragma once

#include <cstdint>
#include <functional>
#include <set>

#include "aqmlab/packet.hpp"
#include "aqmlab/sim.hpp"

namespace aqmlab {

struct TcpParams {
    double initial_cwnd = 1.0;     // packets
    double initial_ssthresh = 64.0;
    double initial_rto_s = 1.0;
    double max_rto_s = 64.0;
    int packet_size_bytes = 2000;
    int ack_size_bytes = 40;
};

// Window state of one sender. cwnd >= 1 and ssthresh >= 2 hold after every
// transition; in_flight always equals next_seq - highest_acked - 1.
struct TcpSourceState {
    double cwnd = 1.0;
    double ssthresh = 64.0;
    long long next_seq = 0;
    long long highest_acked = -1;
    int dup_ack_count = 0;
    double rto_s = 1.0;
    long long in_flight = 0;
};

enum class AckAction {
    None,       // stale or early-duplicate ACK, nothing to do
    NewAck,     // window advanced; caller may send and should re-arm the timer
    Retransmit, // third duplicate: caller retransmits highest_acked + 1
};

// Reno-style reaction to one cumulative ACK. New ACK: slow start adds 1,
// congestion avoidance adds 1/cwnd, RTO backoff resets. Third duplicate:
// ssthresh = max(cwnd/2, 2), cwnd = ssthresh.
AckAction tcp_on_ack(TcpSourceState& st, long long ack_seq, const TcpParams& params);

// RTO expiry: ssthresh = max(cwnd/2, 2), cwnd = 1, rto doubles (capped).
// Caller retransmits the oldest unACKed segment and re-arms the timer.
void tcp_on_timeout(TcpSourceState& st, const TcpParams& params);

struct FlowStats {
    long long data_sent = 0; // segments emitted, retransmissions included
    long long retransmits = 0;
    long long timeouts = 0;
    long long acks_received = 0;
    double final_cwnd = 0.0;
};

// Greedy window-based sender: always has data, emits while the window allows.
class TcpSource {
  public:
    using EmitFn = std::function<void(Packet&&)>;

    TcpSource(int flow_id, Addr src, Addr dst, const TcpParams& params, Engine& engine,
              EmitFn emit, std::uint64_t* next_pkt_id)
        : flow_id_(flow_id), src_(src), dst_(dst), params_(params), engine_(engine),
          emit_(std::move(emit)), next_pkt_id_(next_pkt_id) {
        st_.cwnd = params_.initial_cwnd;
        st_.ssthresh = params_.initial_ssthresh;
        st_.rto_s = params_.initial_rto_s;
    }

    void start(SimTime now) { try_send(now); }
    void on_ack(const Packet& ack, SimTime now);

    const TcpSourceState& state() const { return st_; }
    FlowStats stats;

  private:
    void try_send(SimTime now);
    void emit_segment(long long seq, SimTime now, bool retransmission);
    void arm_timer(SimTime now);
    void cancel_timer();
    void handle_timeout(SimTime now);

    int flow_id_;
    Addr src_;
    Addr dst_;
    TcpParams params_;
    Engine& engine_;
    EmitFn emit_;
    std::uint64_t* next_pkt_id_;
    TcpSourceState st_;
    EventHandle timer_{};
    bool timer_armed_ = false;
};

// Cumulative-ACK receiver; every data segment triggers one 40-byte ACK
// carrying the highest in-order sequence received so far.
class TcpSink {
  public:
    TcpSink(int flow_id, Addr self, Addr peer, int ack_size_bytes, std::uint64_t* next_pkt_id)
        : flow_id_(flow_id), self_(self), peer_(peer), ack_size_(ack_size_bytes),
          next_pkt_id_(next_pkt_id) {}

    Packet on_data(const Packet& data, SimTime now);

    long long next_expected() const { return next_expected_; }

  private:
    int flow_id_;
    Addr self_;
    Addr peer_;
    int ack_size_;
    std::uint64_t* next_pkt_id_;
    long long next_expected_ = 0;
    std::set<long long> out_of_order_;
};

} // namespace aqmlab
