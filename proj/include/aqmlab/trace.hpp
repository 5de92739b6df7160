#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aqmlab/packet.hpp"

namespace aqmlab {

// One 12-field ns-2-style trace line:
//   event time from to type size flags fid src dst seq id
// event codes: '+' enqueue, '-' dequeue, 'r' receive, 'd' drop.
struct TraceRecord {
    char event = '+';
    double time = 0.0;
    int from_node = 0;
    int to_node = 0;
    std::string pkt_type = "tcp";
    int pkt_size = 0;
    std::string flags = "-------";
    int fid = 0;
    Addr src_addr{};
    Addr dst_addr{};
    long long seq_num = 0;
    std::uint64_t pkt_id = 0;

    bool operator==(const TraceRecord&) const = default;
};

class TraceParseError : public std::runtime_error {
  public:
    TraceParseError(long line_no, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line_no) + ": " + what),
          line_no_(line_no) {}
    long line_no() const { return line_no_; }

  private:
    long line_no_;
};

// Shortest decimal form with at most 6 fractional digits ("1.3556", "100").
std::string format_time(double t);

// Inverse of format_time for one value; used to quantize internal times to
// what a trace file round-trip would yield.
double quantize_time(double t);

// One space-separated line, no trailing newline. The flags field is always
// emitted as seven dashes; no flag is ever set by the simulator.
std::string format_record(const TraceRecord& rec);

// Tolerant of repeated whitespace and of any flags token width. Throws
// TraceParseError on wrong field count, unknown event code, or malformed
// numeric/address fields.
TraceRecord parse_record(std::string_view line, long line_no = 1);

// Lazy line-by-line reader; memory use is independent of file size.
class TraceReader {
  public:
    explicit TraceReader(std::istream& in, bool validate_time_order = false)
        : in_(in), validate_(validate_time_order) {}

    // Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<TraceRecord> next();

    long line_no() const { return line_; }

  private:
    std::istream& in_;
    bool validate_;
    long line_ = 0;
    double last_time_ = -1.0;
    std::string buf_;
};

std::vector<TraceRecord> read_all(std::istream& in, bool validate_time_order = false);

// Consumers of simulator output. Sinks see structured records; only the
// text-producing sinks pay for formatting.
class TraceSink {
  public:
    virtual ~TraceSink() = default;
    virtual void write(const TraceRecord& rec) = 0;
};

class NullTraceSink final : public TraceSink {
  public:
    void write(const TraceRecord&) override {}
};

class StreamTraceSink final : public TraceSink {
  public:
    explicit StreamTraceSink(std::ostream& out) : out_(out) {}
    void write(const TraceRecord& rec) override;

  private:
    std::ostream& out_;
};

class StringTraceSink final : public TraceSink {
  public:
    void write(const TraceRecord& rec) override;
    const std::string& text() const { return text_; }

  private:
    std::string text_;
};

class VectorTraceSink final : public TraceSink {
  public:
    void write(const TraceRecord& rec) override { records_.push_back(rec); }
    const std::vector<TraceRecord>& records() const { return records_; }

  private:
    std::vector<TraceRecord> records_;
};

class TeeTraceSink final : public TraceSink {
  public:
    TeeTraceSink(TraceSink& a, TraceSink& b) : a_(a), b_(b) {}
    void write(const TraceRecord& rec) override {
        a_.write(rec);
        b_.write(rec);
    }

  private:
    TraceSink& a_;
    TraceSink& b_;
};

} // namespace aqmlab
