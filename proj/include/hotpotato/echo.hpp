#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hotpotato/messages.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::echo {

struct Config {
    Duration period{500};
    /// Entries (and heard-list members) older than this are stale.
    Duration staleness{1500};
    Duration max_jitter{50};
    std::size_t heard_cap = 32;
};

struct NeighborEntry {
    Role role = Role::Player;
    SimTime last_heard{};
    bool bidirectional = false;

    bool operator==(const NeighborEntry&) const = default;
};

/// Neighbor table of one device. Every read takes `now` and ignores stale
/// entries, so answers never depend on when expire_stale last ran.
class NeighborTable {
public:
    NeighborTable(DeviceId self, Duration staleness) : self_(self), staleness_(staleness) {}

    void on_beacon(const Beacon& beacon, SimTime now);
    /// Physically drops stale entries; returns the removed ids.
    std::vector<DeviceId> expire_stale(SimTime now);
    void clear() { entries_.clear(); }

    bool fresh(const NeighborEntry& e, SimTime now) const { return now - e.last_heard < staleness_; }

    /// Ids heard within the staleness window, most recently heard first,
    /// truncated to `cap`, then sorted ascending.
    std::vector<DeviceId> heard_list(SimTime now, std::size_t cap) const;
    std::vector<DeviceId> bidirectional(SimTime now, std::optional<Role> role = std::nullopt) const;
    std::size_t bidirectional_count(SimTime now, std::optional<Role> role = std::nullopt) const;
    std::optional<NeighborEntry> find(DeviceId id, SimTime now) const;

    const std::map<DeviceId, NeighborEntry>& raw() const { return entries_; }

private:
    DeviceId self_;
    Duration staleness_;
    std::map<DeviceId, NeighborEntry> entries_;
};

/// Periodic beaconing for one device: beacon k is sent at
/// epoch + k * period + jitter_k, jitter_k uniform in [0, max_jitter].
class EchoProtocol {
public:
    using BeaconObserver = std::function<void(const Beacon&)>;

    EchoProtocol(DeviceId self, Role role, Config config, Scheduler& scheduler, Radio& radio,
                 std::uint64_t seed);

    void start(SimTime epoch);
    void stop();
    void on_beacon(const Beacon& beacon);

    Beacon make_beacon() const;
    void set_role(Role role) { role_ = role; }
    Role role() const { return role_; }

    NeighborTable& table() { return table_; }
    const NeighborTable& table() const { return table_; }
    const Config& config() const { return config_; }
    void set_beacon_observer(BeaconObserver obs) { observer_ = std::move(obs); }

private:
    void arm_next();
    void emit();

    DeviceId self_;
    Role role_;
    Config config_;
    Scheduler& scheduler_;
    Radio& radio_;
    RngStream jitter_rng_;
    NeighborTable table_;
    SimTime epoch_{};
    std::uint64_t round_ = 0;
    EventHandle timer_;
    BeaconObserver observer_;
};

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Beacon trace record, little-endian: sender u16, role u8, heard-count u8,
/// heard ids u16 each, timestamp u64 (ms).
std::vector<std::uint8_t> encode(const Beacon& beacon);
void encode_into(const Beacon& beacon, std::vector<std::uint8_t>& out);
/// Decodes one record starting at `offset`; advances `offset` past it.
Beacon decode(std::span<const std::uint8_t> bytes, std::size_t& offset);
std::vector<Beacon> decode_all(std::span<const std::uint8_t> bytes);

}  // namespace hotpotato::echo
