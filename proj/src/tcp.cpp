#include "aqmlab/tcp.hpp"

#include <algorithm>
#include <cmath>

namespace aqmlab {

AckAction tcp_on_ack(TcpSourceState& st, long long ack_seq, const TcpParams& params) {
    if (ack_seq > st.highest_acked) {
        long long newly = ack_seq - st.highest_acked;
        st.highest_acked = ack_seq;
        st.in_flight = std::max<long long>(0, st.in_flight - newly);
        st.dup_ack_count = 0;
        if (st.cwnd < st.ssthresh)
            st.cwnd += 1.0; // slow start
        else
            st.cwnd += 1.0 / st.cwnd; // congestion avoidance
        st.rto_s = params.initial_rto_s; // backoff resets on forward progress
        return AckAction::NewAck;
    }
    if (ack_seq == st.highest_acked) {
        ++st.dup_ack_count;
        if (st.dup_ack_count == 3) {
            st.ssthresh = std::max(st.cwnd / 2.0, 2.0);
            st.cwnd = st.ssthresh;
            return AckAction::Retransmit;
        }
    }
    return AckAction::None; // stale ACK below the cumulative point
}

void tcp_on_timeout(TcpSourceState& st, const TcpParams& params) {
    st.ssthresh = std::max(st.cwnd / 2.0, 2.0);
    st.cwnd = 1.0;
    st.dup_ack_count = 0;
    st.rto_s = std::min(st.rto_s * 2.0, params.max_rto_s);
}

void TcpSource::try_send(SimTime now) {
    while (st_.in_flight < static_cast<long long>(std::floor(st_.cwnd))) {
        emit_segment(st_.next_seq++, now, false);
        ++st_.in_flight;
    }
}

void TcpSource::emit_segment(long long seq, SimTime now, bool retransmission) {
    Packet p;
    p.id = (*next_pkt_id_)++;
    p.flow_id = flow_id_;
    p.kind = PacketKind::Tcp;
    p.size_bytes = params_.packet_size_bytes;
    p.seq = seq;
    p.src = src_;
    p.dst = dst_;
    p.created_at = now;
    ++stats.data_sent;
    if (retransmission) ++stats.retransmits;
    if (!timer_armed_) arm_timer(now);
    emit_(std::move(p));
}

void TcpSource::arm_timer(SimTime now) {
    timer_ = engine_.schedule_timer(now + st_.rto_s, flow_id_, [this](SimTime t) {
        timer_armed_ = false;
        handle_timeout(t);
    });
    timer_armed_ = true;
}

void TcpSource::cancel_timer() {
    if (timer_armed_) {
        engine_.cancel(timer_);
        timer_armed_ = false;
    }
}

void TcpSource::handle_timeout(SimTime now) {
    if (st_.in_flight <= 0) return; // everything ACKed while the event was in flight
    ++stats.timeouts;
    tcp_on_timeout(st_, params_);
    emit_segment(st_.highest_acked + 1, now, true); // re-arms with the doubled rto
}

void TcpSource::on_ack(const Packet& ack, SimTime now) {
    ++stats.acks_received;
    switch (tcp_on_ack(st_, ack.seq, params_)) {
    case AckAction::NewAck:
        cancel_timer();
        if (st_.in_flight > 0) arm_timer(now);
        try_send(now);
        break;
    case AckAction::Retransmit:
        cancel_timer();
        emit_segment(st_.highest_acked + 1, now, true);
        try_send(now);
        break;
    case AckAction::None:
        break;
    }
}

Packet TcpSink::on_data(const Packet& data, SimTime now) {
    if (data.seq == next_expected_) {
        ++next_expected_;
        while (out_of_order_.erase(next_expected_)) ++next_expected_;
    } else if (data.seq > next_expected_) {
        out_of_order_.insert(data.seq);
    }
    Packet ack;
    ack.id = (*next_pkt_id_)++;
    ack.flow_id = flow_id_;
    ack.kind = PacketKind::Ack;
    ack.size_bytes = ack_size_;
    ack.seq = next_expected_ - 1; // highest in-order sequence received
    ack.src = self_;
    ack.dst = peer_;
    ack.created_at = now;
    return ack;
}

} // namespace aqmlab
