#include "aqmlab/aqm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqmlab {

const char* aqm_name(AqmKind kind) {
    switch (kind) {
    case AqmKind::DropTail: return "droptail";
    case AqmKind::Red: return "red";
    case AqmKind::Sfq: return "sfq";
    case AqmKind::Rem: return "rem";
    }
    return "droptail";
}

bool aqm_from_name(std::string_view name, AqmKind& out) {
    if (name == "droptail") out = AqmKind::DropTail;
    else if (name == "red") out = AqmKind::Red;
    else if (name == "sfq") out = AqmKind::Sfq;
    else if (name == "rem") out = AqmKind::Rem;
    else return false;
    return true;
}

// ---------------------------------------------------------------- arithmetic

double red_avg_update(double avg, double q_packets, double w_q) {
    return (1.0 - w_q) * avg + w_q * q_packets;
}

double red_drop_probability(double avg, int count, const RedParams& params) {
    if (avg < params.min_th) return 0.0;
    if (avg >= params.max_th) return 1.0;
    double p_b = params.max_p * (avg - params.min_th) / (params.max_th - params.min_th);
    double denom = 1.0 - count * p_b;
    if (denom <= 0.0) return 1.0;
    return std::min(1.0, p_b / denom);
}

double rem_price_step(double price, double gamma, double alpha, double backlog_minus_target_pkts,
                      double excess_pkts_per_period) {
    double next = price + gamma * (alpha * backlog_minus_target_pkts + excess_pkts_per_period);
    return std::max(0.0, next);
}

double rem_mark_prob(double price, double phi) { return 1.0 - std::pow(phi, -price); }

namespace {
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}
} // namespace

int sfq_classify(const Addr& src, const Addr& dst, int flow_id, std::uint64_t perturbation,
                 int n_buckets) {
    std::uint64_t a = (std::uint64_t(std::uint32_t(src.node)) << 32) | std::uint32_t(src.port);
    std::uint64_t b = (std::uint64_t(std::uint32_t(dst.node)) << 32) | std::uint32_t(dst.port);
    std::uint64_t h = mix64(perturbation ^ mix64(a ^ mix64(b ^ std::uint64_t(std::uint32_t(flow_id)))));
    return static_cast<int>(h % std::uint64_t(n_buckets));
}

// ------------------------------------------------------------------ droptail

EnqueueOutcome DropTailQueue::on_enqueue(const Packet& pkt, SimTime) {
    EnqueueOutcome out;
    if (backlog_bytes_ + pkt.size_bytes > buffer_bytes_) {
        out.dropped.push_back(pkt);
        return out;
    }
    q_.push_back(pkt);
    backlog_bytes_ += pkt.size_bytes;
    ++backlog_pkts_;
    out.admitted = true;
    return out;
}

std::optional<Packet> DropTailQueue::on_dequeue(SimTime) {
    if (q_.empty()) return std::nullopt;
    Packet p = std::move(q_.front());
    q_.pop_front();
    backlog_bytes_ -= p.size_bytes;
    --backlog_pkts_;
    return p;
}

// ----------------------------------------------------------------------- red

EnqueueOutcome RedQueue::on_enqueue(const Packet& pkt, SimTime now) {
    // EWMA update fires on every arrival; waking from an idle period first
    // decays avg by the packets that could have drained meanwhile.
    if (backlog_pkts_ == 0 && idle_since_) {
        double m = (now - *idle_since_) / params_.idle_pkt_tx_s;
        if (m > 0.0) avg_ *= std::pow(1.0 - params_.w_q, m);
        idle_since_.reset();
    }
    avg_ = red_avg_update(avg_, backlog_pkts_, params_.w_q);

    EnqueueOutcome out;
    if (backlog_bytes_ + pkt.size_bytes > buffer_bytes_) { // forced drop
        count_ = 0;
        out.dropped.push_back(pkt);
        return out;
    }
    bool drop = false;
    if (avg_ < params_.min_th) {
        count_ = -1;
    } else if (avg_ >= params_.max_th) {
        drop = true;
        count_ = 0;
    } else {
        double p_a = red_drop_probability(avg_, count_, params_);
        if (p_a > 0.0 && rng_.uniform() < p_a) {
            drop = true;
            count_ = 0;
        } else {
            ++count_;
        }
    }
    if (drop) {
        out.dropped.push_back(pkt);
        return out;
    }
    q_.push_back(pkt);
    backlog_bytes_ += pkt.size_bytes;
    ++backlog_pkts_;
    out.admitted = true;
    return out;
}

std::optional<Packet> RedQueue::on_dequeue(SimTime now) {
    if (q_.empty()) return std::nullopt;
    Packet p = std::move(q_.front());
    q_.pop_front();
    backlog_bytes_ -= p.size_bytes;
    --backlog_pkts_;
    if (backlog_pkts_ == 0) idle_since_ = now;
    return p;
}

// ----------------------------------------------------------------------- rem

EnqueueOutcome RemQueue::on_enqueue(const Packet& pkt, SimTime) {
    arrived_bytes_ += pkt.size_bytes; // offered load, dropped arrivals included
    EnqueueOutcome out;
    if (backlog_bytes_ + pkt.size_bytes > buffer_bytes_) {
        out.dropped.push_back(pkt);
        return out;
    }
    double p = rem_mark_prob(price_, params_.phi);
    if (p > 0.0 && rng_.uniform() < p) {
        out.dropped.push_back(pkt);
        return out;
    }
    q_.push_back(pkt);
    backlog_bytes_ += pkt.size_bytes;
    ++backlog_pkts_;
    out.admitted = true;
    return out;
}

std::optional<Packet> RemQueue::on_dequeue(SimTime) {
    if (q_.empty()) return std::nullopt;
    Packet p = std::move(q_.front());
    q_.pop_front();
    backlog_bytes_ -= p.size_bytes;
    --backlog_pkts_;
    return p;
}

void RemQueue::on_periodic(SimTime) {
    // Normalize both rates to packets per update period so the backlog and
    // rate-mismatch terms are commensurate.
    double input_pkts = double(arrived_bytes_) / params_.mean_pkt_bytes;
    double capacity_pkts =
        params_.capacity_bps * params_.update_period_s / (8.0 * params_.mean_pkt_bytes);
    price_ = rem_price_step(price_, params_.gamma, params_.alpha,
                            backlog_pkts_ - params_.target_backlog, input_pkts - capacity_pkts);
    arrived_bytes_ = 0;
}

// ----------------------------------------------------------------------- sfq

SfqQueue::SfqQueue(long long buffer_bytes, const SfqParams& params, RandomSource& rng)
    : QueueDiscipline(buffer_bytes), params_(params), rng_(rng), buckets_(params.n_buckets),
      bucket_bytes_(params.n_buckets, 0) {
    perturbation_ = rng_.bits();
}

EnqueueOutcome SfqQueue::on_enqueue(const Packet& pkt, SimTime) {
    EnqueueOutcome out;
    out.admitted = true;
    int b = sfq_classify(pkt.src, pkt.dst, pkt.flow_id, perturbation_, params_.n_buckets);
    buckets_[b].push_back(pkt);
    bucket_bytes_[b] += pkt.size_bytes;
    backlog_bytes_ += pkt.size_bytes;
    ++backlog_pkts_;
    // Overflow sheds from the tail of the longest bucket (which may be the
    // arrival's own) until the shared buffer fits again.
    while (backlog_bytes_ > buffer_bytes_) {
        int longest = 0;
        for (int i = 1; i < params_.n_buckets; ++i)
            if (bucket_bytes_[i] > bucket_bytes_[longest]) longest = i;
        Packet victim = std::move(buckets_[longest].back());
        buckets_[longest].pop_back();
        bucket_bytes_[longest] -= victim.size_bytes;
        backlog_bytes_ -= victim.size_bytes;
        --backlog_pkts_;
        out.dropped.push_back(std::move(victim));
    }
    return out;
}

std::optional<Packet> SfqQueue::on_dequeue(SimTime) {
    for (int k = 0; k < params_.n_buckets; ++k) {
        int i = (rr_cursor_ + k) % params_.n_buckets;
        if (buckets_[i].empty()) continue;
        Packet p = std::move(buckets_[i].front());
        buckets_[i].pop_front();
        bucket_bytes_[i] -= p.size_bytes;
        backlog_bytes_ -= p.size_bytes;
        --backlog_pkts_;
        rr_cursor_ = (i + 1) % params_.n_buckets;
        return p;
    }
    return std::nullopt;
}

void SfqQueue::on_periodic(SimTime) {
    // Queued packets stay in the bucket they hashed into at arrival.
    perturbation_ = rng_.bits();
}

std::unique_ptr<QueueDiscipline> make_discipline(AqmKind kind, long long buffer_bytes,
                                                 const AqmParams& params, RandomSource& rng) {
    switch (kind) {
    case AqmKind::DropTail: return std::make_unique<DropTailQueue>(buffer_bytes);
    case AqmKind::Red: return std::make_unique<RedQueue>(buffer_bytes, params.red, rng);
    case AqmKind::Sfq: return std::make_unique<SfqQueue>(buffer_bytes, params.sfq, rng);
    case AqmKind::Rem: return std::make_unique<RemQueue>(buffer_bytes, params.rem, rng);
    }
    throw std::invalid_argument("unknown discipline");
}

} // namespace aqmlab
