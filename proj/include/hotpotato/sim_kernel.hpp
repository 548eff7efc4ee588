#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hotpotato {

/// Simulated clock. Integer milliseconds since simulation start, so the
/// protocol constants (500 ms beacons, 1 s fuse ticks, 3 s reboot) are exact.
struct SimClock {
    using rep = std::int64_t;
    using period = std::milli;
    using duration = std::chrono::duration<rep, period>;
    using time_point = std::chrono::time_point<SimClock>;
    static constexpr bool is_steady = true;
};

using Duration = SimClock::duration;
using SimTime = SimClock::time_point;

using DeviceId = std::uint16_t;

constexpr std::int64_t to_ms(SimTime t) { return t.time_since_epoch().count(); }
constexpr std::int64_t to_ms(Duration d) { return d.count(); }
constexpr SimTime at_ms(std::int64_t ms) { return SimTime{Duration{ms}}; }

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Identifies a scheduled event; ordering matches execution order.
struct EventHandle {
    SimTime fire_at{};
    std::uint64_t seq = 0;

    auto operator<=>(const EventHandle&) const = default;
    bool valid() const { return seq != 0; }
};

/// Deterministic discrete-event scheduler. Events with equal fire_at run in
/// ascending insertion sequence.
class Scheduler {
public:
    using Callback = std::function<void()>;

    struct TraceEntry {
        SimTime fire_at;
        std::uint64_t seq;
        std::optional<DeviceId> target;
        std::string_view label;

        bool operator==(const TraceEntry&) const = default;
    };

    SimTime now() const { return now_; }

    /// Throws SchedulingError if fire_at lies in the past. `target` is the
    /// owning device (nullopt for the network / world); `label` must point
    /// at static storage.
    EventHandle schedule(SimTime fire_at, std::optional<DeviceId> target, std::string_view label,
                         Callback cb);
    EventHandle schedule_in(Duration delay, std::optional<DeviceId> target,
                            std::string_view label, Callback cb) {
        return schedule(now_ + delay, target, label, std::move(cb));
    }

    /// Returns true if the event was still pending.
    bool cancel(EventHandle handle);
    /// Cancels every pending event owned by `target`; returns how many.
    std::size_t cancel_target(DeviceId target);
    bool pending(EventHandle handle) const { return queue_.contains(handle); }

    /// Executes every event with fire_at <= end, then sets the clock to end.
    std::size_t run_until(SimTime end);
    /// Executes the single earliest event, if any.
    bool step();

    std::optional<SimTime> next_time() const;
    std::size_t pending_count() const { return queue_.size(); }
    std::uint64_t executed_count() const { return executed_; }

    void enable_trace(bool on) { tracing_ = on; }
    const std::vector<TraceEntry>& trace() const { return trace_; }

private:
    struct Entry {
        std::optional<DeviceId> target;
        std::string_view label;
        Callback cb;
    };

    std::map<EventHandle, Entry> queue_;
    SimTime now_{};
    std::uint64_t next_seq_ = 1;
    std::uint64_t executed_ = 0;
    bool tracing_ = false;
    std::vector<TraceEntry> trace_;
};

/// Named deterministic random stream (xoshiro256**), keyed by
/// (seed, label, index) so streams are independent and adding a device
/// never perturbs another device's draws. Identical on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

    std::uint64_t next_u64();
    /// Uniform real in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Standard normal via Box-Muller (no std:: distributions: their output
    /// is implementation-defined).
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::uint64_t s_[4];
    std::optional<double> spare_normal_;
};

std::uint64_t fnv1a(std::string_view text);
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace hotpotato
