#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "aqmlab/aqm.hpp"
#include "aqmlab/tcp.hpp"
#include "aqmlab/trace.hpp"

namespace aqmlab {

// Dumbbell scenario parameters. Defaults are the reference setup: five
// 100 Mbps / 10 ms access links per side, a 10 Mbps / 40 ms bottleneck,
// 2000-byte packets, a 4000-byte AQM buffer, 100 s horizon, seed 42.
struct ScenarioConfig {
    int flows = 5;
    double stagger_s = 0.010;

    int packet_size_bytes = 2000;
    long long buffer_bytes = 4000; // AQM buffer, both bottleneck directions
    double duration_s = 100.0;
    std::uint64_t seed = 42;

    AqmKind aqm = AqmKind::Red;
    double bottleneck_rate_bps = 10e6;
    double bottleneck_delay_s = 0.040;

    double access_rate_bps = 100e6;
    double access_delay_s = 0.010;
    long long access_buffer_bytes = 100000; // 50 data packets, DropTail

    AqmParams aqm_params{};

    double initial_cwnd = 1.0;
    double initial_ssthresh = 64.0;
    double initial_rto_s = 1.0;
    double max_rto_s = 64.0;
    int ack_size_bytes = 40;

    // Node numbering: sources 0..flows-1, R1 = flows, R2 = flows+1,
    // sinks flows+2 .. 2*flows+1.
    int src_node(int flow) const { return flow; }
    int r1_node() const { return flows; }
    int r2_node() const { return flows + 1; }
    int dst_node(int flow) const { return flows + 2 + flow; }
    int node_count() const { return 2 * flows + 2; }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct LinkSpec {
    int from = 0;
    int to = 0;
    double rate_bps = 0.0;
    double prop_delay_s = 0.0;
    AqmKind discipline = AqmKind::DropTail;
    long long buffer_bytes = 0;
};

// The simplex links of the dumbbell, in deterministic construction order.
// Access links are DropTail; both bottleneck directions carry config.aqm.
std::vector<LinkSpec> dumbbell_links(const ScenarioConfig& config);

struct RunStats {
    std::size_t events = 0;
    std::vector<FlowStats> flows;
};

// Builds the network, runs it to config.duration_s, emits the trace into
// sink. Each call is independent; runs share no mutable state.
RunStats run_scenario(const ScenarioConfig& config, TraceSink& sink);

// White-box variant exposing per-queue peak backlog for invariant checks:
// max_backlog_bytes[i] is the high-water mark of links()[i]'s queue.
struct RunProbe {
    std::vector<LinkSpec> links;
    std::vector<long long> max_backlog_bytes;
    std::vector<std::vector<std::pair<double, int>>> backlog_changes; // per link, (time, pkts)
    bool record_backlog_changes = false;
};

RunStats run_scenario(const ScenarioConfig& config, TraceSink& sink, RunProbe* probe);

} // namespace aqmlab
