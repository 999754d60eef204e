#pragma once

#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/time.hpp"
#include "volley/core/trace.hpp"
#include "volley/sim/metrics.hpp"
#include "volley/sim/scenario.hpp"

namespace volley::sim {

enum class EventKind : std::uint8_t {
    host_on,
    host_off,
    host_departed,
    job_complete,
    deadline,
    rpc,
    feeder_tick,
    checkpoint_tick,
    metrics_tick,
    batch_arrival,
};

std::string_view to_string(EventKind kind);

struct Event {
    SimMs time = 0;
    /// Assigned at insertion; orders events with equal times.
    std::uint64_t seq = 0;
    EventKind kind = EventKind::metrics_tick;
    /// Host or project index, depending on the kind.
    std::uint32_t target = 0;
    InstanceId instance{};
    /// Completion events carry the host's epoch; a changed epoch voids them.
    std::uint64_t epoch = 0;
};

/// Events in (time, sequence) order.
class EventQueue {
public:
    void push(Event event);
    Event pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Credit granted to one validated instance.
struct CreditRecord {
    JobId job;
    std::uint32_t project = 0;
    HostId host;
    double claimed = 0.0;
    double granted = 0.0;
};

struct RunResult {
    Metrics metrics;
    std::vector<CreditRecord> credits;
    std::uint64_t events = 0;
};

/// Runs a scenario to its duration plus a drain of the longest delay bound,
/// or until every submitted job is terminal once arrivals have ended.
/// Deterministic in the scenario and its seed.
RunResult run(const Scenario& scenario, TraceSink* trace = nullptr);

}  // namespace volley::sim
