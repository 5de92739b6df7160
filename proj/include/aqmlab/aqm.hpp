#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "aqmlab/packet.hpp"
#include "aqmlab/sim.hpp"

namespace aqmlab {

enum class AqmKind { DropTail, Red, Sfq, Rem };

const char* aqm_name(AqmKind kind);
bool aqm_from_name(std::string_view name, AqmKind& out);

struct RedParams {
    double w_q = 0.002;   // EWMA weight
    double max_p = 0.1;   // peak early-drop probability
    double min_th = 1.0;  // packets
    double max_th = 2.0;  // packets
    // Time to transmit one typical packet, for idle-period decay of avg.
    double idle_pkt_tx_s = 2000.0 * 8.0 / 10e6;
};

struct RemParams {
    double gamma = 0.001;
    double phi = 1.001;
    double alpha = 0.1;
    double target_backlog = 0.0; // packets
    double update_period_s = 0.01;
    int mean_pkt_bytes = 2000;   // normalizes rates to packets per period
    double capacity_bps = 10e6;  // set per link on attach
};

struct SfqParams {
    int n_buckets = 16;
    double perturb_period_s = 5.0;
};

struct AqmParams {
    RedParams red;
    RemParams rem;
    SfqParams sfq;
};

// Outcome of offering one packet to a queue. `admitted` means the arrival
// entered the queue (traced '+'). `dropped` lists every packet dropped by
// the operation: the rejected arrival itself (never admitted, traced 'd'
// alone) or previously queued victims shed to make room (traced 'd' after
// their earlier '+'). SFQ may shed the arrival it just admitted.
struct EnqueueOutcome {
    bool admitted = false;
    std::vector<Packet> dropped;
};

class QueueDiscipline {
  public:
    explicit QueueDiscipline(long long buffer_bytes) : buffer_bytes_(buffer_bytes) {}
    virtual ~QueueDiscipline() = default;

    virtual EnqueueOutcome on_enqueue(const Packet& pkt, SimTime now) = 0;
    virtual std::optional<Packet> on_dequeue(SimTime now) = 0;

    // Disciplines with internal clocks (REM price, SFQ perturbation) report
    // an interval here and get on_periodic called every interval.
    virtual std::optional<SimTime> periodic_interval() const { return std::nullopt; }
    virtual void on_periodic(SimTime) {}

    long long buffer_bytes() const { return buffer_bytes_; }
    long long backlog_bytes() const { return backlog_bytes_; }
    int backlog_packets() const { return backlog_pkts_; }

  protected:
    long long buffer_bytes_;
    long long backlog_bytes_ = 0;
    int backlog_pkts_ = 0;
};

class DropTailQueue final : public QueueDiscipline {
  public:
    explicit DropTailQueue(long long buffer_bytes) : QueueDiscipline(buffer_bytes) {}
    EnqueueOutcome on_enqueue(const Packet& pkt, SimTime now) override;
    std::optional<Packet> on_dequeue(SimTime now) override;

  private:
    std::deque<Packet> q_;
};

class RedQueue final : public QueueDiscipline {
  public:
    RedQueue(long long buffer_bytes, const RedParams& params, RandomSource& rng)
        : QueueDiscipline(buffer_bytes), params_(params), rng_(rng), idle_since_(0.0) {}
    EnqueueOutcome on_enqueue(const Packet& pkt, SimTime now) override;
    std::optional<Packet> on_dequeue(SimTime now) override;

    double avg() const { return avg_; }
    int count() const { return count_; }

  private:
    RedParams params_;
    RandomSource& rng_;
    std::deque<Packet> q_;
    double avg_ = 0.0;
    int count_ = -1;
    std::optional<SimTime> idle_since_; // engaged while the queue sits empty
};

class RemQueue final : public QueueDiscipline {
  public:
    RemQueue(long long buffer_bytes, const RemParams& params, RandomSource& rng)
        : QueueDiscipline(buffer_bytes), params_(params), rng_(rng) {}
    EnqueueOutcome on_enqueue(const Packet& pkt, SimTime now) override;
    std::optional<Packet> on_dequeue(SimTime now) override;
    std::optional<SimTime> periodic_interval() const override { return params_.update_period_s; }
    void on_periodic(SimTime now) override;

    double price() const { return price_; }

  private:
    RemParams params_;
    RandomSource& rng_;
    std::deque<Packet> q_;
    double price_ = 0.0;
    long long arrived_bytes_ = 0; // offered load since the last price update
};

class SfqQueue final : public QueueDiscipline {
  public:
    SfqQueue(long long buffer_bytes, const SfqParams& params, RandomSource& rng);
    EnqueueOutcome on_enqueue(const Packet& pkt, SimTime now) override;
    std::optional<Packet> on_dequeue(SimTime now) override;
    std::optional<SimTime> periodic_interval() const override { return params_.perturb_period_s; }
    void on_periodic(SimTime now) override;

    std::uint64_t perturbation() const { return perturbation_; }
    int bucket_backlog_packets(int bucket) const { return static_cast<int>(buckets_[bucket].size()); }

  private:
    SfqParams params_;
    RandomSource& rng_;
    std::vector<std::deque<Packet>> buckets_;
    std::vector<long long> bucket_bytes_;
    std::uint64_t perturbation_ = 0;
    int rr_cursor_ = 0;
};

std::unique_ptr<QueueDiscipline> make_discipline(AqmKind kind, long long buffer_bytes,
                                                 const AqmParams& params, RandomSource& rng);

// Pure arithmetic, unit-testable without queue state.

// EWMA step: (1-w)*avg + w*q.
double red_avg_update(double avg, double q_packets, double w_q);

// Early-drop probability p_a for the current avg and count. 0 below min_th,
// 1 at/above max_th, p_b/(1 - count*p_b) in between (clamped to [0,1]).
double red_drop_probability(double avg, int count, const RedParams& params);

// price' = max(0, price + gamma*(alpha*(backlog-target) + excess)), with
// both terms in packets per update period.
double rem_price_step(double price, double gamma, double alpha, double backlog_minus_target_pkts,
                      double excess_pkts_per_period);

// Drop probability 1 - phi^(-price).
double rem_mark_prob(double price, double phi);

// Deterministic hash of (src, dst, flow) + perturbation into a bucket.
int sfq_classify(const Addr& src, const Addr& dst, int flow_id, std::uint64_t perturbation,
                 int n_buckets);

} // namespace aqmlab
