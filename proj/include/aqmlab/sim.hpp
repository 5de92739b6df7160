#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aqmlab/packet.hpp"

namespace aqmlab {

// Simulation time in seconds. Event times are exact doubles internally; the
// trace layer rounds to microsecond-level text on output.
using SimTime = double;

enum class EventKind {
    PacketArrival,        // subject = link id, pkt carries the payload
    TransmissionComplete, // subject = link id
    TimeoutExpiry,        // subject = owner id, token identifies the timer
};

struct Event {
    SimTime at = 0.0;
    EventKind kind = EventKind::TimeoutExpiry;
    int subject = -1;
    Packet pkt{};
    std::uint64_t token = 0;
};

struct EventHandle {
    std::uint64_t seq = 0;
};

class EventHandler {
  public:
    virtual ~EventHandler() = default;
    virtual void on_event(const Event& ev) = 0;
};

// Time-ordered event queue with FIFO tie-breaking among equal timestamps.
// Single-threaded by contract: one engine drives one simulation run.
class Engine {
  public:
    explicit Engine(EventHandler* handler = nullptr) : handler_(handler) {}

    SimTime now() const { return now_; }

    // Rejects events scheduled in the past (throws std::invalid_argument).
    EventHandle schedule(Event ev);

    // Convenience for timer-style events: fn fires once at `at` unless the
    // handle is cancelled first.
    EventHandle schedule_timer(SimTime at, int owner, std::function<void(SimTime)> fn);

    void cancel(EventHandle h);

    // Processes every pending event with at <= until, in nondecreasing time
    // order; returns the number of events dispatched (cancelled ones are
    // skipped). The clock ends at max(now, until) even if no events fired.
    std::size_t run(SimTime until);

  private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        Event ev;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::unordered_map<std::uint64_t, std::function<void(SimTime)>> timers_;
    std::unordered_set<std::uint64_t> cancelled_;
    EventHandler* handler_;
    SimTime now_ = 0.0;
    std::uint64_t next_seq_ = 0;
};

// Seeded uniform source shared by all stochastic decisions of one run.
// mt19937_64 has a standard-specified sequence, so traces are portable.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed = 42) : gen_(seed) {}

    // Uniform on [0,1) with 53 significant bits; advances state once.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t bits() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

} // namespace aqmlab
