#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aqmlab/trace.hpp"

namespace aqmlab {

struct ThroughputSeries {
    double window_s = 1.0;
    std::vector<double> mbps; // one entry per window, index 0 starts at t=0
    double max_mbps = 0.0;
    double min_mbps = 0.0;
};

struct DelayKindStats {
    double min_s = 0.0;
    double max_s = 0.0;
    double sum_s = 0.0;
    long long count = 0;
};

struct DelayStats {
    DelayKindStats all;
    DelayKindStats data;
    DelayKindStats ack;
};

struct DelaySample {
    std::uint64_t pkt_id = 0;
    std::string kind;
    double delay_s = 0.0;
};

struct QueueLengthStats {
    int max_pkts = 0;
    int min_pkts = 0;
    double time_weighted_mean = 0.0;
    std::vector<std::pair<double, int>> series; // change points, post-instant values
};

// Per-run aggregate in the shape of the comparison tables: bottleneck
// sent/lost, loss ratio, utilization, and the three series with extrema.
struct MetricsReport {
    std::string name;

    // scenario fingerprint
    double duration_s = 100.0;
    int packet_size_bytes = 2000;
    double bottleneck_rate_bps = 10e6;

    long long sent_packets = 0; // data '+' at the forward bottleneck queue
    long long lost_packets = 0; // data 'd' at the forward bottleneck queue
    double loss_ratio_pct = 0.0;
    double utilization_pct = 0.0;

    ThroughputSeries throughput;
    DelayStats delay;
    double paper_throughput_bps = 0.0; // literal received-bits / mean-delay ratio

    QueueLengthStats queue;      // all packet kinds at the bottleneck queue
    QueueLengthStats queue_data; // data packets only

    long long total_drops = 0; // every 'd' anywhere in the trace
};

// 100*lost/sent (0 when sent == 0); lost > sent is a trace inconsistency.
double compute_loss_ratio(long long sent, long long lost);

// 100 * sent*size*8 / (rate*duration).
double compute_utilization(long long sent_packets, int packet_size_bytes, double link_rate_bps,
                           double duration_s);

// Received-rate series over fixed windows: bytes of 'r' records whose
// to_node is in sinks, per window, as Mbps.
ThroughputSeries compute_throughput_series(std::span<const TraceRecord> records,
                                           const std::set<int>& sinks, double window_s,
                                           double duration_s);

// Per-packet end-to-end delay: final 'r' at the packet's destination node
// minus its first '+'. Dropped / unfinished packets contribute nothing.
// Throws if a destination receive has no matching send.
std::vector<DelaySample> compute_delays(std::span<const TraceRecord> records);

DelayStats summarize_delays(const std::vector<DelaySample>& samples);

// Backlog step function of one queue from its '+', '-' and 'd' records;
// 'd' removes a packet only when a matching '+' preceded it. Records that
// share a timestamp collapse into one change point. Throws on negative
// backlog. kind_filter restricts to one pkt_type ("" = all).
QueueLengthStats compute_queue_length_series(std::span<const TraceRecord> records, int from_node,
                                             int to_node, double horizon_s,
                                             const std::string& kind_filter = "",
                                             bool keep_series = true);

// Streaming one-pass computation of the full MetricsReport; usable directly
// as a simulation TraceSink so reports never require materializing a trace.
class MetricsAccumulator final : public TraceSink {
  public:
    struct Options {
        int bottleneck_from = 5;
        int bottleneck_to = 6;
        std::set<int> sink_nodes = {7, 8, 9, 10, 11};
        double window_s = 1.0;
        double duration_s = 100.0;
        int packet_size_bytes = 2000;
        double bottleneck_rate_bps = 10e6;
        std::string data_kind = "tcp";
        bool keep_queue_series = false;
        // Round times through the trace text representation so in-process
        // results match a format/parse round trip exactly.
        bool quantize_times = false;
    };

    explicit MetricsAccumulator(Options opts);

    void write(const TraceRecord& rec) override;
    MetricsReport finish();

  private:
    struct QueueTrack {
        std::unordered_set<std::uint64_t> queued;
        int level = 0;
        int max_pkts = 0;
        int min_pkts = 0;
        double mean_num = 0.0; // integral of level dt
        double last_commit_t = 0.0;
        int committed_level = 0;
        bool pending = false;
        double pending_t = 0.0;
        std::vector<std::pair<double, int>> series;

        void apply(char event, double t, std::uint64_t id, bool keep_series);
        void commit(double t, bool keep_series);
        void finalize(double horizon, bool keep_series);
    };

    struct PendingDelay {
        double first_plus = 0.0;
        int dst_node = 0;
        char kind = 't'; // 't' data, 'a' ack, 'c' cbr/other
    };

    Options opts_;
    long long sent_ = 0;
    long long lost_ = 0;
    long long total_drops_ = 0;
    std::vector<double> window_bytes_;
    double received_bytes_ = 0.0;
    QueueTrack queue_all_;
    QueueTrack queue_data_;
    std::unordered_map<std::uint64_t, PendingDelay> pending_;
    DelayStats delay_;
    double last_time_ = 0.0;
};

// Distills options matching how run_scenario lays out a scenario's nodes.
MetricsAccumulator::Options metrics_options_for(const struct ScenarioConfig& config);

// Per-queue conservation tally over a full trace:
//   #'+' == #'-' + #matched-'d' + backlog at end.
class ConservationChecker final : public TraceSink {
  public:
    struct Tally {
        long long plus = 0;
        long long minus = 0;
        long long dropped_matched = 0;
        long long dropped_rejected = 0;
        long long backlog_pkts = 0;
        long long backlog_bytes = 0;
        long long max_backlog_bytes = 0;
        bool balanced() const { return plus == minus + dropped_matched + backlog_pkts; }
    };

    void write(const TraceRecord& rec) override;
    const std::map<std::pair<int, int>, Tally>& queues() const { return queues_; }
    bool all_balanced() const;

  private:
    struct State {
        Tally tally;
        std::unordered_map<std::uint64_t, int> queued; // id -> size
    };
    std::map<std::pair<int, int>, State> states_;
    mutable std::map<std::pair<int, int>, Tally> queues_;
    void snapshot() const;
};

// A/B/C grading of named reports per metric, ties sharing the better grade:
// delay by smaller max, queue length by smaller time-weighted mean (tie on
// max), throughput by larger max, loss rate by smaller ratio.
struct RankingTable {
    std::vector<std::string> names;                          // input order
    std::map<std::string, std::map<std::string, char>> grades; // [name][metric]
    static const std::vector<std::string>& metric_names();   // ranking columns
};

RankingTable rank_algorithms(const std::vector<MetricsReport>& reports);

// Summary CSV: one row per metric (metric,min,max,value); scenario
// fingerprint fields ride along as value-only rows.
void write_report_csv(const MetricsReport& report, std::ostream& out);
MetricsReport read_report_csv(std::istream& in, const std::string& name);

void write_report_text(const MetricsReport& report, std::ostream& out);

} // namespace aqmlab
