#pragma once

#include <string>
#include <vector>

#include "aqmlab/metrics.hpp"
#include "aqmlab/topology.hpp"

namespace aqmlab {

// One independent simulation job. Jobs share no mutable state, so a batch
// can run its members in any order or in parallel with identical results.
struct RunRequest {
    ScenarioConfig config;
    bool want_trace_text = false; // collect the formatted trace
    bool keep_queue_series = false;
    bool quantize_times = true; // metrics see file-round-tripped timestamps
};

struct RunResult {
    MetricsReport report;
    std::string trace_text; // empty unless requested
    RunStats stats;
};

// Serial reference implementation: runs jobs one by one in order.
std::vector<RunResult> run_batch_serial(const std::vector<RunRequest>& jobs);

// OpenMP-parallel batch. Output order matches request order regardless of
// scheduling; results are identical to run_batch_serial.
std::vector<RunResult> run_batch_parallel(const std::vector<RunRequest>& jobs);

std::vector<RunResult> run_batch(const std::vector<RunRequest>& jobs, bool parallel = true);

} // namespace aqmlab
