#include "aqmlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aqmlab/topology.hpp"

namespace aqmlab {

double compute_loss_ratio(long long sent, long long lost) {
    if (sent < 0 || lost < 0 || lost > sent)
        throw std::runtime_error("loss ratio: lost exceeds sent (trace inconsistency)");
    if (sent == 0) return 0.0;
    return 100.0 * static_cast<double>(lost) / static_cast<double>(sent);
}

double compute_utilization(long long sent_packets, int packet_size_bytes, double link_rate_bps,
                           double duration_s) {
    if (sent_packets <= 0) return 0.0;
    return 100.0 * (static_cast<double>(sent_packets) * packet_size_bytes * 8.0) /
           (link_rate_bps * duration_s);
}

ThroughputSeries compute_throughput_series(std::span<const TraceRecord> records,
                                           const std::set<int>& sinks, double window_s,
                                           double duration_s) {
    ThroughputSeries series;
    series.window_s = window_s;
    std::size_t n = static_cast<std::size_t>(std::ceil(duration_s / window_s));
    if (n == 0) n = 1;
    std::vector<double> bytes(n, 0.0);
    for (const TraceRecord& rec : records) {
        if (rec.event != 'r' || !sinks.count(rec.to_node)) continue;
        auto idx = static_cast<std::size_t>(rec.time / window_s);
        if (idx >= bytes.size()) bytes.resize(idx + 1, 0.0);
        bytes[idx] += rec.pkt_size;
    }
    series.mbps.reserve(bytes.size());
    for (double b : bytes) series.mbps.push_back(8.0 * b / window_s / 1e6);
    series.max_mbps = *std::max_element(series.mbps.begin(), series.mbps.end());
    series.min_mbps = *std::min_element(series.mbps.begin(), series.mbps.end());
    return series;
}

namespace {

struct PendingSend {
    double first_plus;
    int dst_node;
    std::string kind;
};

void delay_add(DelayKindStats& s, double d) {
    if (s.count == 0) {
        s.min_s = d;
        s.max_s = d;
    } else {
        s.min_s = std::min(s.min_s, d);
        s.max_s = std::max(s.max_s, d);
    }
    s.sum_s += d;
    ++s.count;
}

} // namespace

std::vector<DelaySample> compute_delays(std::span<const TraceRecord> records) {
    std::unordered_map<std::uint64_t, PendingSend> pending;
    std::vector<DelaySample> samples;
    for (const TraceRecord& rec : records) {
        if (rec.event == '+') {
            pending.emplace(rec.pkt_id, PendingSend{rec.time, rec.dst_addr.node, rec.pkt_type});
        } else if (rec.event == 'r' && rec.to_node == rec.dst_addr.node) {
            auto it = pending.find(rec.pkt_id);
            if (it == pending.end())
                throw std::runtime_error("delay: receive without matching send for packet id " +
                                         std::to_string(rec.pkt_id));
            samples.push_back({rec.pkt_id, it->second.kind, rec.time - it->second.first_plus});
            pending.erase(it);
        }
    }
    return samples;
}

DelayStats summarize_delays(const std::vector<DelaySample>& samples) {
    DelayStats stats;
    for (const DelaySample& s : samples) {
        delay_add(stats.all, s.delay_s);
        if (s.kind == "ack")
            delay_add(stats.ack, s.delay_s);
        else if (s.kind == "tcp")
            delay_add(stats.data, s.delay_s);
    }
    return stats;
}

// ------------------------------------------------------------- queue length

void MetricsAccumulator::QueueTrack::commit(double t, bool keep_series) {
    // Step function held committed_level on [last_commit_t, pending_t),
    // then jumps to the post-instant level.
    mean_num += committed_level * (pending_t - last_commit_t);
    if (level != committed_level && keep_series) series.emplace_back(pending_t, level);
    committed_level = level;
    last_commit_t = pending_t;
    if (committed_level > max_pkts) max_pkts = committed_level;
    if (committed_level < min_pkts) min_pkts = committed_level;
    pending = false;
    (void)t;
}

void MetricsAccumulator::QueueTrack::apply(char event, double t, std::uint64_t id,
                                           bool keep_series) {
    if (pending && t > pending_t) commit(t, keep_series);
    switch (event) {
    case '+':
        queued.insert(id);
        ++level;
        break;
    case '-':
        --level;
        queued.erase(id);
        if (level < 0) throw std::runtime_error("queue length: negative backlog (trace inconsistency)");
        break;
    case 'd':
        // Removes the packet only when a matching '+' preceded it; a drop
        // rejected at arrival never occupied the queue.
        if (queued.erase(id)) {
            --level;
            if (level < 0)
                throw std::runtime_error("queue length: negative backlog (trace inconsistency)");
        }
        break;
    default:
        return;
    }
    pending = true;
    pending_t = t;
}

void MetricsAccumulator::QueueTrack::finalize(double horizon, bool keep_series) {
    if (pending) commit(pending_t, keep_series);
    double end = std::max(horizon, last_commit_t);
    mean_num += committed_level * (end - last_commit_t);
    last_commit_t = end;
}

QueueLengthStats compute_queue_length_series(std::span<const TraceRecord> records, int from_node,
                                             int to_node, double horizon_s,
                                             const std::string& kind_filter, bool keep_series) {
    MetricsAccumulator::Options opts;
    opts.bottleneck_from = from_node;
    opts.bottleneck_to = to_node;
    opts.sink_nodes.clear();
    opts.duration_s = horizon_s;
    opts.keep_queue_series = keep_series;
    if (!kind_filter.empty()) opts.data_kind = kind_filter;
    MetricsAccumulator acc(opts);
    for (const TraceRecord& rec : records) acc.write(rec);
    MetricsReport report = acc.finish();
    return kind_filter.empty() ? report.queue : report.queue_data;
}

// -------------------------------------------------------------- accumulator

MetricsAccumulator::MetricsAccumulator(Options opts) : opts_(std::move(opts)) {
    std::size_t n = static_cast<std::size_t>(std::ceil(opts_.duration_s / opts_.window_s));
    window_bytes_.assign(n == 0 ? 1 : n, 0.0);
    delay_.all.min_s = delay_.data.min_s = delay_.ack.min_s = 0.0;
}

void MetricsAccumulator::write(const TraceRecord& input) {
    TraceRecord rec = input;
    if (opts_.quantize_times) rec.time = quantize_time(rec.time);
    last_time_ = std::max(last_time_, rec.time);

    bool at_bottleneck = rec.from_node == opts_.bottleneck_from && rec.to_node == opts_.bottleneck_to;
    bool is_data = rec.pkt_type == opts_.data_kind;

    if (rec.event == 'd') ++total_drops_;

    if (at_bottleneck) {
        if (is_data) {
            if (rec.event == '+') ++sent_;
            if (rec.event == 'd') ++lost_;
            queue_data_.apply(rec.event, rec.time, rec.pkt_id, opts_.keep_queue_series);
        }
        queue_all_.apply(rec.event, rec.time, rec.pkt_id, opts_.keep_queue_series);
    }

    if (rec.event == '+') {
        pending_.emplace(rec.pkt_id,
                         PendingDelay{rec.time, rec.dst_addr.node,
                                      is_data ? 't' : (rec.pkt_type == "ack" ? 'a' : 'c')});
    } else if (rec.event == 'r') {
        if (opts_.sink_nodes.count(rec.to_node)) {
            auto idx = static_cast<std::size_t>(rec.time / opts_.window_s);
            if (idx >= window_bytes_.size()) window_bytes_.resize(idx + 1, 0.0);
            window_bytes_[idx] += rec.pkt_size;
            received_bytes_ += rec.pkt_size;
        }
        if (rec.to_node == rec.dst_addr.node) {
            auto it = pending_.find(rec.pkt_id);
            if (it == pending_.end())
                throw std::runtime_error("delay: receive without matching send for packet id " +
                                         std::to_string(rec.pkt_id));
            double d = rec.time - it->second.first_plus;
            delay_add(delay_.all, d);
            if (it->second.kind == 't') delay_add(delay_.data, d);
            else if (it->second.kind == 'a') delay_add(delay_.ack, d);
            pending_.erase(it);
        }
    }
}

MetricsReport MetricsAccumulator::finish() {
    MetricsReport report;
    report.duration_s = opts_.duration_s;
    report.packet_size_bytes = opts_.packet_size_bytes;
    report.bottleneck_rate_bps = opts_.bottleneck_rate_bps;
    report.sent_packets = sent_;
    report.lost_packets = lost_;
    report.loss_ratio_pct = compute_loss_ratio(sent_, lost_);
    report.utilization_pct =
        compute_utilization(sent_, opts_.packet_size_bytes, opts_.bottleneck_rate_bps, opts_.duration_s);

    report.throughput.window_s = opts_.window_s;
    report.throughput.mbps.reserve(window_bytes_.size());
    for (double b : window_bytes_) report.throughput.mbps.push_back(8.0 * b / opts_.window_s / 1e6);
    report.throughput.max_mbps =
        *std::max_element(report.throughput.mbps.begin(), report.throughput.mbps.end());
    report.throughput.min_mbps =
        *std::min_element(report.throughput.mbps.begin(), report.throughput.mbps.end());

    report.delay = delay_;
    if (delay_.data.count > 0)
        report.paper_throughput_bps =
            8.0 * received_bytes_ / (delay_.data.sum_s / delay_.data.count);

    double horizon = std::max(opts_.duration_s, last_time_);
    queue_all_.finalize(horizon, opts_.keep_queue_series);
    queue_data_.finalize(horizon, opts_.keep_queue_series);
    auto fill = [&](QueueLengthStats& out, QueueTrack& track) {
        out.max_pkts = track.max_pkts;
        out.min_pkts = track.min_pkts;
        out.time_weighted_mean = horizon > 0 ? track.mean_num / horizon : 0.0;
        out.series = std::move(track.series);
    };
    fill(report.queue, queue_all_);
    fill(report.queue_data, queue_data_);

    report.total_drops = total_drops_;
    return report;
}

MetricsAccumulator::Options metrics_options_for(const ScenarioConfig& config) {
    MetricsAccumulator::Options opts;
    opts.bottleneck_from = config.r1_node();
    opts.bottleneck_to = config.r2_node();
    opts.sink_nodes.clear();
    for (int i = 0; i < config.flows; ++i) opts.sink_nodes.insert(config.dst_node(i));
    opts.duration_s = config.duration_s;
    opts.packet_size_bytes = config.packet_size_bytes;
    opts.bottleneck_rate_bps = config.bottleneck_rate_bps;
    return opts;
}

// ------------------------------------------------------------- conservation

void ConservationChecker::write(const TraceRecord& rec) {
    if (rec.event != '+' && rec.event != '-' && rec.event != 'd') return;
    State& st = states_[{rec.from_node, rec.to_node}];
    switch (rec.event) {
    case '+':
        ++st.tally.plus;
        st.queued.emplace(rec.pkt_id, rec.pkt_size);
        st.tally.backlog_bytes += rec.pkt_size;
        st.tally.max_backlog_bytes = std::max(st.tally.max_backlog_bytes, st.tally.backlog_bytes);
        break;
    case '-':
        ++st.tally.minus;
        if (auto it = st.queued.find(rec.pkt_id); it != st.queued.end()) {
            st.tally.backlog_bytes -= it->second;
            st.queued.erase(it);
        }
        break;
    case 'd':
        if (auto it = st.queued.find(rec.pkt_id); it != st.queued.end()) {
            st.tally.backlog_bytes -= it->second;
            st.queued.erase(it);
            ++st.tally.dropped_matched;
        } else {
            ++st.tally.dropped_rejected;
        }
        break;
    }
}

void ConservationChecker::snapshot() const {
    queues_.clear();
    for (const auto& [key, st] : states_) {
        Tally t = st.tally;
        t.backlog_pkts = static_cast<long long>(st.queued.size());
        queues_[key] = t;
    }
}

bool ConservationChecker::all_balanced() const {
    snapshot();
    for (const auto& [key, tally] : queues_)
        if (!tally.balanced()) return false;
    return true;
}

// ------------------------------------------------------------------ ranking

const std::vector<std::string>& RankingTable::metric_names() {
    static const std::vector<std::string> names = {"delay", "queue_length", "throughput",
                                                   "loss_rate"};
    return names;
}

RankingTable rank_algorithms(const std::vector<MetricsReport>& reports) {
    if (reports.size() < 2) throw std::invalid_argument("rank_algorithms: need at least 2 reports");
    RankingTable table;
    for (const auto& r : reports) table.names.push_back(r.name);

    struct Metric {
        std::string name;
        std::function<std::pair<double, double>(const MetricsReport&)> key; // ascending = better
    };
    const std::vector<Metric> metrics = {
        {"delay", [](const MetricsReport& r) { return std::pair(r.delay.all.max_s, 0.0); }},
        {"queue_length",
         [](const MetricsReport& r) {
             return std::pair(r.queue.time_weighted_mean, double(r.queue.max_pkts));
         }},
        {"throughput", [](const MetricsReport& r) { return std::pair(-r.throughput.max_mbps, 0.0); }},
        {"loss_rate", [](const MetricsReport& r) { return std::pair(r.loss_ratio_pct, 0.0); }},
    };

    for (const Metric& metric : metrics) {
        std::vector<std::pair<std::pair<double, double>, std::string>> keyed;
        keyed.reserve(reports.size());
        for (const auto& r : reports) keyed.emplace_back(metric.key(r), r.name);
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        char grade = 'A';
        for (std::size_t i = 0; i < keyed.size(); ++i) {
            if (i > 0 && keyed[i].first != keyed[i - 1].first)
                grade = static_cast<char>('A' + i); // ties share the better grade
            table.grades[keyed[i].second][metric.name] = grade;
        }
    }
    return table;
}

// ----------------------------------------------------------------- csv / text

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void row(std::ostream& out, const std::string& name, const std::string& lo, const std::string& hi,
         const std::string& value) {
    out << name << ',' << lo << ',' << hi << ',' << value << '\n';
}

} // namespace

void write_report_csv(const MetricsReport& r, std::ostream& out) {
    out << "metric,min,max,value\n";
    row(out, "duration_s", "", "", num(r.duration_s));
    row(out, "packet_size_bytes", "", "", std::to_string(r.packet_size_bytes));
    row(out, "bottleneck_rate_mbps", "", "", num(r.bottleneck_rate_bps / 1e6));
    row(out, "sent_packets", "", "", std::to_string(r.sent_packets));
    row(out, "lost_packets", "", "", std::to_string(r.lost_packets));
    row(out, "loss_ratio_pct", "", "", num(r.loss_ratio_pct));
    row(out, "utilization_pct", "", "", num(r.utilization_pct));
    row(out, "throughput_mbps", num(r.throughput.min_mbps), num(r.throughput.max_mbps), "");
    row(out, "paper_throughput_bps", "", "", num(r.paper_throughput_bps));
    row(out, "delay_s", num(r.delay.all.min_s), num(r.delay.all.max_s), "");
    row(out, "delay_data_s", num(r.delay.data.min_s), num(r.delay.data.max_s), "");
    row(out, "delay_ack_s", num(r.delay.ack.min_s), num(r.delay.ack.max_s), "");
    row(out, "queue_len_pkts", std::to_string(r.queue.min_pkts), std::to_string(r.queue.max_pkts),
        num(r.queue.time_weighted_mean));
    row(out, "queue_len_data_pkts", std::to_string(r.queue_data.min_pkts),
        std::to_string(r.queue_data.max_pkts), num(r.queue_data.time_weighted_mean));
    row(out, "total_drops", "", "", std::to_string(r.total_drops));
}

MetricsReport read_report_csv(std::istream& in, const std::string& name) {
    MetricsReport r;
    r.name = name;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("metric,", 0) == 0) continue;
        }
        std::array<std::string, 4> col;
        std::size_t start = 0;
        for (int i = 0; i < 4; ++i) {
            auto comma = line.find(',', start);
            if (comma == std::string::npos && i < 3)
                throw std::runtime_error("report csv: malformed row '" + line + "'");
            col[i] = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                   : comma - start);
            start = comma + 1;
        }
        auto lo = [&] { return col[1].empty() ? 0.0 : std::stod(col[1]); };
        auto hi = [&] { return col[2].empty() ? 0.0 : std::stod(col[2]); };
        auto val = [&] { return col[3].empty() ? 0.0 : std::stod(col[3]); };
        const std::string& key = col[0];
        if (key == "duration_s") r.duration_s = val();
        else if (key == "packet_size_bytes") r.packet_size_bytes = static_cast<int>(val());
        else if (key == "bottleneck_rate_mbps") r.bottleneck_rate_bps = val() * 1e6;
        else if (key == "sent_packets") r.sent_packets = static_cast<long long>(val());
        else if (key == "lost_packets") r.lost_packets = static_cast<long long>(val());
        else if (key == "loss_ratio_pct") r.loss_ratio_pct = val();
        else if (key == "utilization_pct") r.utilization_pct = val();
        else if (key == "throughput_mbps") {
            r.throughput.min_mbps = lo();
            r.throughput.max_mbps = hi();
        } else if (key == "paper_throughput_bps") r.paper_throughput_bps = val();
        else if (key == "delay_s") {
            r.delay.all.min_s = lo();
            r.delay.all.max_s = hi();
        } else if (key == "delay_data_s") {
            r.delay.data.min_s = lo();
            r.delay.data.max_s = hi();
        } else if (key == "delay_ack_s") {
            r.delay.ack.min_s = lo();
            r.delay.ack.max_s = hi();
        } else if (key == "queue_len_pkts") {
            r.queue.min_pkts = static_cast<int>(lo());
            r.queue.max_pkts = static_cast<int>(hi());
            r.queue.time_weighted_mean = val();
        } else if (key == "queue_len_data_pkts") {
            r.queue_data.min_pkts = static_cast<int>(lo());
            r.queue_data.max_pkts = static_cast<int>(hi());
            r.queue_data.time_weighted_mean = val();
        } else if (key == "total_drops") r.total_drops = static_cast<long long>(val());
        // unknown rows are ignored
    }
    return r;
}

void write_report_text(const MetricsReport& r, std::ostream& out) {
    char buf[160];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out << buf << '\n';
    };
    if (!r.name.empty()) out << "report: " << r.name << '\n';
    line("queue length (pkts)      max %d / min %d (mean %.3f)", r.queue.max_pkts, r.queue.min_pkts,
         r.queue.time_weighted_mean);
    line("throughput (Mbps)        max %.2f / min %.2f", r.throughput.max_mbps,
         r.throughput.min_mbps);
    line("delay (ms)               max %.2f / min %.2f", r.delay.all.max_s * 1e3,
         r.delay.all.min_s * 1e3);
    line("  data (ms)              max %.2f / min %.2f", r.delay.data.max_s * 1e3,
         r.delay.data.min_s * 1e3);
    line("  ack (ms)               max %.2f / min %.2f", r.delay.ack.max_s * 1e3,
         r.delay.ack.min_s * 1e3);
    line("send packets             %lld", r.sent_packets);
    line("lost packets             %lld", r.lost_packets);
    line("average loss ratio (%%)   %.4f", r.loss_ratio_pct);
    line("utilization (%%)          %.2f", r.utilization_pct);
    line("total drop events        %lld", r.total_drops);
}

} // namespace aqmlab
