#include "aqmlab/topology.hpp"

#include <cassert>
#include <deque>
#include <stdexcept>

#include "aqmlab/log.hpp"

namespace aqmlab {

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("scenario config: ") + what);
}
} // namespace

void ScenarioConfig::validate() const {
    require(flows >= 1, "flows must be >= 1");
    require(packet_size_bytes > 0, "packet_size_bytes must be positive");
    require(buffer_bytes > 0, "buffer_bytes must be positive");
    require(access_buffer_bytes > 0, "access_buffer_bytes must be positive");
    require(duration_s > 0, "duration_s must be positive");
    require(stagger_s >= 0, "stagger_ms must be nonnegative");
    require(bottleneck_rate_bps > 0, "bottleneck rate must be positive");
    require(access_rate_bps > 0, "access rate must be positive");
    require(bottleneck_delay_s >= 0, "bottleneck delay must be nonnegative");
    require(access_delay_s >= 0, "access delay must be nonnegative");
    require(initial_cwnd >= 1, "initial_cwnd must be >= 1");
    require(initial_ssthresh >= 2, "initial_ssthresh must be >= 2");
    require(initial_rto_s > 0, "initial_rto_s must be positive");
    require(ack_size_bytes > 0, "ack_size_bytes must be positive");
    const RedParams& red = aqm_params.red;
    require(red.w_q > 0 && red.w_q <= 1, "red.w_q must be in (0,1]");
    require(red.max_p > 0 && red.max_p <= 1, "red.max_p must be in (0,1]");
    require(red.min_th > 0 && red.min_th < red.max_th, "red thresholds need 0 < min_th < max_th");
    const RemParams& rem = aqm_params.rem;
    require(rem.gamma > 0, "rem.gamma must be positive");
    require(rem.phi > 1, "rem.phi must exceed 1");
    require(rem.alpha > 0, "rem.alpha must be positive");
    require(rem.target_backlog >= 0, "rem.target_backlog must be nonnegative");
    require(rem.update_period_s > 0, "rem.update_period_s must be positive");
    const SfqParams& sfq = aqm_params.sfq;
    require(sfq.n_buckets >= 1, "sfq.n_buckets must be >= 1");
    require(sfq.perturb_period_s > 0, "sfq.perturb_period_s must be positive");
}

std::vector<LinkSpec> dumbbell_links(const ScenarioConfig& c) {
    c.validate();
    std::vector<LinkSpec> links;
    links.reserve(4 * c.flows + 2);
    for (int i = 0; i < c.flows; ++i) {
        links.push_back({c.src_node(i), c.r1_node(), c.access_rate_bps, c.access_delay_s,
                         AqmKind::DropTail, c.access_buffer_bytes});
        links.push_back({c.r1_node(), c.src_node(i), c.access_rate_bps, c.access_delay_s,
                         AqmKind::DropTail, c.access_buffer_bytes});
    }
    links.push_back({c.r1_node(), c.r2_node(), c.bottleneck_rate_bps, c.bottleneck_delay_s, c.aqm,
                     c.buffer_bytes});
    links.push_back({c.r2_node(), c.r1_node(), c.bottleneck_rate_bps, c.bottleneck_delay_s, c.aqm,
                     c.buffer_bytes});
    for (int i = 0; i < c.flows; ++i) {
        links.push_back({c.r2_node(), c.dst_node(i), c.access_rate_bps, c.access_delay_s,
                         AqmKind::DropTail, c.access_buffer_bytes});
        links.push_back({c.dst_node(i), c.r2_node(), c.access_rate_bps, c.access_delay_s,
                         AqmKind::DropTail, c.access_buffer_bytes});
    }
    return links;
}

namespace {

struct SimLink {
    int id;
    LinkSpec spec;
    std::unique_ptr<QueueDiscipline> q;
    bool busy = false;
};

class Simulation final : public EventHandler {
  public:
    Simulation(const ScenarioConfig& cfg, TraceSink& sink, RunProbe* probe)
        : cfg_(cfg), sink_(sink), probe_(probe), engine_(this), rng_(cfg.seed) {
        build();
    }

    RunStats run() {
        for (int i = 0; i < cfg_.flows; ++i) {
            engine_.schedule_timer(i * cfg_.stagger_s, i,
                                   [this, i](SimTime t) { sources_[i]->start(t); });
        }
        // Disciplines with internal clocks tick on their own period.
        for (auto& link : links_) {
            if (auto interval = link.q->periodic_interval()) {
                schedule_periodic(link.id, *interval);
            }
        }
        RunStats stats;
        stats.events = engine_.run(cfg_.duration_s);
        for (auto& src : sources_) {
            FlowStats fs = src->stats;
            fs.final_cwnd = src->state().cwnd;
            stats.flows.push_back(fs);
        }
        if (probe_) {
            probe_->links.clear();
            for (auto& link : links_) probe_->links.push_back(link.spec);
        }
        log_msg(LogLevel::Info, "run done: aqm=%s seed=%llu events=%zu", aqm_name(cfg_.aqm),
                static_cast<unsigned long long>(cfg_.seed), stats.events);
        return stats;
    }

  private:
    void build() {
        auto specs = dumbbell_links(cfg_);
        int n = cfg_.node_count();
        links_.reserve(specs.size());
        out_link_.assign(n, {});
        for (auto& spec : specs) {
            AqmParams params = cfg_.aqm_params;
            params.red.idle_pkt_tx_s = cfg_.packet_size_bytes * 8.0 / spec.rate_bps;
            params.rem.capacity_bps = spec.rate_bps;
            params.rem.mean_pkt_bytes = cfg_.packet_size_bytes;
            int id = static_cast<int>(links_.size());
            links_.push_back(
                {id, spec, make_discipline(spec.discipline, spec.buffer_bytes, params, rng_)});
            out_link_[spec.from].push_back(id);
        }
        if (probe_) {
            probe_->max_backlog_bytes.assign(links_.size(), 0);
            probe_->backlog_changes.assign(links_.size(), {});
        }
        build_routes(n);

        TcpParams tp;
        tp.initial_cwnd = cfg_.initial_cwnd;
        tp.initial_ssthresh = cfg_.initial_ssthresh;
        tp.initial_rto_s = cfg_.initial_rto_s;
        tp.max_rto_s = cfg_.max_rto_s;
        tp.packet_size_bytes = cfg_.packet_size_bytes;
        tp.ack_size_bytes = cfg_.ack_size_bytes;
        for (int i = 0; i < cfg_.flows; ++i) {
            Addr src{cfg_.src_node(i), 0};
            Addr dst{cfg_.dst_node(i), 0};
            int node = cfg_.src_node(i);
            sources_.push_back(std::make_unique<TcpSource>(
                i, src, dst, tp, engine_,
                [this, node](Packet&& p) { forward_from(node, std::move(p)); }, &next_pkt_id_));
            sinks_.push_back(std::make_unique<TcpSink>(i, dst, src, tp.ack_size_bytes, &next_pkt_id_));
        }
    }

    void build_routes(int n) {
        next_link_.assign(n, std::vector<int>(n, -1));
        // BFS from every destination over reversed links; the dumbbell is
        // tiny, so simplicity wins over cleverness.
        for (int dst = 0; dst < n; ++dst) {
            std::vector<int> dist(n, -1);
            std::deque<int> work;
            dist[dst] = 0;
            work.push_back(dst);
            while (!work.empty()) {
                int v = work.front();
                work.pop_front();
                for (auto& link : links_) {
                    if (link.spec.to != v) continue;
                    int u = link.spec.from;
                    if (dist[u] != -1) continue;
                    dist[u] = dist[v] + 1;
                    next_link_[u][dst] = link.id;
                    work.push_back(u);
                }
            }
        }
    }

    void schedule_periodic(int link_id, SimTime interval) {
        schedule_periodic_at(link_id, interval, interval);
    }

    void schedule_periodic_at(int link_id, SimTime at, SimTime interval) {
        engine_.schedule_timer(at, link_id, [this, link_id, interval](SimTime t) {
            links_[link_id].q->on_periodic(t);
            schedule_periodic_at(link_id, t + interval, interval);
        });
    }

    void on_event(const Event& ev) override {
        switch (ev.kind) {
        case EventKind::PacketArrival: {
            SimLink& link = links_[ev.subject];
            trace('r', link, ev.pkt);
            deliver(link.spec.to, ev.pkt);
            break;
        }
        case EventKind::TransmissionComplete: {
            SimLink& link = links_[ev.subject];
            link.busy = false;
            if (link.q->backlog_packets() > 0) start_tx(link);
            break;
        }
        case EventKind::TimeoutExpiry:
            break; // timers dispatch through their registered callbacks
        }
    }

    void deliver(int node, const Packet& pkt) {
        if (pkt.dst.node != node) {
            forward_from(node, Packet(pkt));
            return;
        }
        if (pkt.kind == PacketKind::Tcp && pkt.flow_id < static_cast<int>(sinks_.size()) &&
            node == cfg_.dst_node(pkt.flow_id)) {
            Packet ack = sinks_[pkt.flow_id]->on_data(pkt, engine_.now());
            forward_from(node, std::move(ack));
        } else if (pkt.kind == PacketKind::Ack && pkt.flow_id < static_cast<int>(sources_.size()) &&
                   node == cfg_.src_node(pkt.flow_id)) {
            sources_[pkt.flow_id]->on_ack(pkt, engine_.now());
        }
        // Anything else terminates here silently (no agent for it).
    }

    void forward_from(int node, Packet&& pkt) {
        int link_id = next_link_[node][pkt.dst.node];
        if (link_id < 0) return; // unroutable; cannot happen on a dumbbell
        enqueue(links_[link_id], std::move(pkt));
    }

    void enqueue(SimLink& link, Packet&& pkt) {
        EnqueueOutcome out = link.q->on_enqueue(pkt, engine_.now());
        if (out.admitted) trace('+', link, pkt);
        for (const Packet& victim : out.dropped) trace('d', link, victim);
        probe_backlog(link);
        if (!link.busy && link.q->backlog_packets() > 0) start_tx(link);
    }

    void start_tx(SimLink& link) {
        auto pkt = link.q->on_dequeue(engine_.now());
        assert(pkt.has_value());
        trace('-', link, *pkt);
        probe_backlog(link);
        link.busy = true;
        SimTime now = engine_.now();
        double tx_s = pkt->size_bytes * 8.0 / link.spec.rate_bps;
        Event done;
        done.at = now + tx_s;
        done.kind = EventKind::TransmissionComplete;
        done.subject = link.id;
        engine_.schedule(std::move(done));
        Event arrive;
        arrive.at = now + tx_s + link.spec.prop_delay_s;
        arrive.kind = EventKind::PacketArrival;
        arrive.subject = link.id;
        arrive.pkt = std::move(*pkt);
        engine_.schedule(std::move(arrive));
    }

    void trace(char event, const SimLink& link, const Packet& pkt) {
        TraceRecord rec;
        rec.event = event;
        rec.time = engine_.now();
        rec.from_node = link.spec.from;
        rec.to_node = link.spec.to;
        rec.pkt_type = to_token(pkt.kind);
        rec.pkt_size = pkt.size_bytes;
        rec.fid = pkt.flow_id;
        rec.src_addr = pkt.src;
        rec.dst_addr = pkt.dst;
        rec.seq_num = pkt.seq;
        rec.pkt_id = pkt.id;
        sink_.write(rec);
    }

    void probe_backlog(const SimLink& link) {
        if (!probe_) return;
        long long bytes = link.q->backlog_bytes();
        if (bytes > probe_->max_backlog_bytes[link.id]) probe_->max_backlog_bytes[link.id] = bytes;
        if (probe_->record_backlog_changes)
            probe_->backlog_changes[link.id].emplace_back(engine_.now(), link.q->backlog_packets());
    }

    ScenarioConfig cfg_;
    TraceSink& sink_;
    RunProbe* probe_;
    Engine engine_;
    RandomSource rng_;
    std::vector<SimLink> links_;
    std::vector<std::vector<int>> out_link_;
    std::vector<std::vector<int>> next_link_;
    std::vector<std::unique_ptr<TcpSource>> sources_;
    std::vector<std::unique_ptr<TcpSink>> sinks_;
    std::uint64_t next_pkt_id_ = 0;
};

} // namespace

RunStats run_scenario(const ScenarioConfig& config, TraceSink& sink, RunProbe* probe) {
    Simulation sim(config, sink, probe);
    return sim.run();
}

RunStats run_scenario(const ScenarioConfig& config, TraceSink& sink) {
    return run_scenario(config, sink, nullptr);
}

} // namespace aqmlab
