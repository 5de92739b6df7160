#include "aqmlab/sim.hpp"

#include <stdexcept>
#include <utility>

namespace aqmlab {

EventHandle Engine::schedule(Event ev) {
    if (ev.at < now_) throw std::invalid_argument("schedule: event time precedes current clock");
    std::uint64_t seq = ++next_seq_;
    if (ev.kind == EventKind::TimeoutExpiry && ev.token == 0) ev.token = seq;
    heap_.push(Entry{ev.at, seq, std::move(ev)});
    return EventHandle{seq};
}

EventHandle Engine::schedule_timer(SimTime at, int owner, std::function<void(SimTime)> fn) {
    Event ev;
    ev.at = at;
    ev.kind = EventKind::TimeoutExpiry;
    ev.subject = owner;
    EventHandle h = schedule(std::move(ev));
    timers_.emplace(h.seq, std::move(fn));
    return h;
}

void Engine::cancel(EventHandle h) {
    if (h.seq == 0) return;
    cancelled_.insert(h.seq);
    timers_.erase(h.seq);
}

std::size_t Engine::run(SimTime until) {
    std::size_t dispatched = 0;
    while (!heap_.empty() && heap_.top().at <= until) {
        Entry entry = heap_.top();
        heap_.pop();
        now_ = entry.at;
        if (cancelled_.erase(entry.seq)) continue;
        if (entry.ev.kind == EventKind::TimeoutExpiry) {
            auto it = timers_.find(entry.seq);
            if (it != timers_.end()) {
                auto fn = std::move(it->second);
                timers_.erase(it);
                fn(now_);
                ++dispatched;
                continue;
            }
        }
        if (handler_) handler_->on_event(entry.ev);
        ++dispatched;
    }
    if (until > now_) now_ = until;
    return dispatched;
}

} // namespace aqmlab
