#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aqmlab {

// Subcommand bodies, separated from argv parsing so tests can drive them
// directly. Every function returns a process exit status (0 = success) and
// reports errors on `err`.

struct SimulateArgs {
    std::string config_path;              // empty = defaults
    std::optional<std::string> aqm;       // override [bottleneck] aqm
    std::optional<std::uint64_t> seed;    // override [scenario] seed
    std::string trace_out;                // "-" = stdout
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct AnalyzeArgs {
    std::string trace_path;               // "-" = stdin
    std::string config_path;              // empty = defaults (scenario fingerprint)
    std::pair<int, int> bottleneck{5, 6};
    double window_s = 1.0;
    std::string report_out;               // CSV path; empty = text only
    std::string series_prefix;            // optional PREFIX.{throughput,queue,delay}.csv
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);

struct SweepArgs {
    std::string config_path;
    std::optional<std::string> aqm;
    std::optional<std::uint64_t> seed;
    std::vector<double> rates_mbps;
    std::string out_csv;                  // "-" = stdout
    bool parallel = true;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct CompareArgs {
    std::vector<std::string> report_paths; // >= 2 analyze CSVs
    std::string out_path;                  // ranking CSV; "-" = stdout
};

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);

// argv front end (CLI11). argv[0] is the program name.
int run_cli(int argc, const char* const* argv);

} // namespace aqmlab
