#include "aqmlab/trace.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

namespace aqmlab {

const char* to_token(PacketKind kind) {
    switch (kind) {
    case PacketKind::Tcp: return "tcp";
    case PacketKind::Ack: return "ack";
    case PacketKind::Cbr: return "cbr";
    }
    return "tcp";
}

std::string format_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    std::string s(buf);
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        auto last = s.find_last_not_of('0');
        if (last == dot) --last;
        s.erase(last + 1);
    }
    return s;
}

double quantize_time(double t) {
    std::string s = format_time(t);
    return std::strtod(s.c_str(), nullptr);
}

std::string format_record(const TraceRecord& rec) {
    std::string line;
    line.reserve(64);
    line += rec.event;
    line += ' ';
    line += format_time(rec.time);
    line += ' ';
    line += std::to_string(rec.from_node);
    line += ' ';
    line += std::to_string(rec.to_node);
    line += ' ';
    line += rec.pkt_type;
    line += ' ';
    line += std::to_string(rec.pkt_size);
    line += " ------- ";
    line += std::to_string(rec.fid);
    line += ' ';
    line += std::to_string(rec.src_addr.node);
    line += '.';
    line += std::to_string(rec.src_addr.port);
    line += ' ';
    line += std::to_string(rec.dst_addr.node);
    line += '.';
    line += std::to_string(rec.dst_addr.port);
    line += ' ';
    line += std::to_string(rec.seq_num);
    line += ' ';
    line += std::to_string(rec.pkt_id);
    return line;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

template <typename T>
bool parse_number(std::string_view tok, T& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_time_field(std::string_view tok, double& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_addr(std::string_view tok, Addr& out) {
    auto dot = tok.find('.');
    if (dot == std::string_view::npos) return false;
    return parse_number(tok.substr(0, dot), out.node) && parse_number(tok.substr(dot + 1), out.port);
}

} // namespace

TraceRecord parse_record(std::string_view line, long line_no) {
    std::string_view tok[12];
    int n = 0;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !is_space(line[j])) ++j;
        if (n < 12) tok[n] = line.substr(i, j - i);
        ++n;
        i = j;
    }
    if (n != 12)
        throw TraceParseError(line_no, "expected 12 fields, got " + std::to_string(n));

    TraceRecord rec;
    if (tok[0].size() != 1 ||
        (tok[0][0] != '+' && tok[0][0] != '-' && tok[0][0] != 'r' && tok[0][0] != 'd'))
        throw TraceParseError(line_no, "unknown event code '" + std::string(tok[0]) + "'");
    rec.event = tok[0][0];

    if (!parse_time_field(tok[1], rec.time))
        throw TraceParseError(line_no, "bad time field '" + std::string(tok[1]) + "'");
    if (!parse_number(tok[2], rec.from_node))
        throw TraceParseError(line_no, "bad from-node field '" + std::string(tok[2]) + "'");
    if (!parse_number(tok[3], rec.to_node))
        throw TraceParseError(line_no, "bad to-node field '" + std::string(tok[3]) + "'");
    rec.pkt_type = std::string(tok[4]);
    if (!parse_number(tok[5], rec.pkt_size) || rec.pkt_size < 0)
        throw TraceParseError(line_no, "bad packet-size field '" + std::string(tok[5]) + "'");
    rec.flags = std::string(tok[6]);
    if (!parse_number(tok[7], rec.fid))
        throw TraceParseError(line_no, "bad flow-id field '" + std::string(tok[7]) + "'");
    if (!parse_addr(tok[8], rec.src_addr))
        throw TraceParseError(line_no, "bad source address '" + std::string(tok[8]) + "'");
    if (!parse_addr(tok[9], rec.dst_addr))
        throw TraceParseError(line_no, "bad destination address '" + std::string(tok[9]) + "'");
    if (!parse_number(tok[10], rec.seq_num))
        throw TraceParseError(line_no, "bad sequence-number field '" + std::string(tok[10]) + "'");
    if (!parse_number(tok[11], rec.pkt_id))
        throw TraceParseError(line_no, "bad packet-id field '" + std::string(tok[11]) + "'");
    return rec;
}

std::optional<TraceRecord> TraceReader::next() {
    while (std::getline(in_, buf_)) {
        ++line_;
        bool blank = true;
        for (char c : buf_)
            if (!is_space(c)) {
                blank = false;
                break;
            }
        if (blank) continue;
        TraceRecord rec = parse_record(buf_, line_);
        if (validate_ && rec.time < last_time_)
            throw TraceParseError(line_, "timestamps decrease");
        last_time_ = rec.time;
        return rec;
    }
    return std::nullopt;
}

std::vector<TraceRecord> read_all(std::istream& in, bool validate_time_order) {
    TraceReader reader(in, validate_time_order);
    std::vector<TraceRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

void StreamTraceSink::write(const TraceRecord& rec) { out_ << format_record(rec) << '\n'; }

void StringTraceSink::write(const TraceRecord& rec) {
    text_ += format_record(rec);
    text_ += '\n';
}

} // namespace aqmlab
