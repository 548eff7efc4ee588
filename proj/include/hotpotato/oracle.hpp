#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hotpotato/events.hpp"
#include "hotpotato/game.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

class PlayerDevice;

struct Violation {
    std::string invariant;
    SimTime at{};
    std::vector<DeviceId> devices;
    std::string detail;
};

struct RecoveryRecord {
    DeviceId device = 0;
    SimTime crash_at{};
    std::optional<SimTime> reboot_at;
    /// Potato -> remaining seconds at the crash instant.
    std::map<PotatoId, int> held_at_crash;
    /// Potato -> remaining seconds when restored.
    std::map<PotatoId, int> restored;
};

/// Test-only global observer. Sees every device's true state, which the
/// devices themselves never can.
class Oracle {
public:
    void on_log(const LogEntry& entry);
    void on_potato_active(DeviceId device, const game::Potato& potato, SimTime now);
    void on_potato_inactive(DeviceId device, const game::Potato& potato, SimTime now);
    void on_commit_sent(ActionId action) { committed_.insert(action); }
    void on_negotiation(Duration d) { negotiation_ms_.push_back(to_ms(d)); }
    /// Call right before the device goes down.
    void on_crash(const PlayerDevice& device, SimTime now);

    /// Ownership check at an action-quiescent instant. A potato held by
    /// zero devices is a violation; one held by two or more is recorded as
    /// a duplicate-window occurrence.
    void check_ownership(const std::vector<const PlayerDevice*>& devices, SimTime now);

    void set_reboot_delay(Duration d) { reboot_delay_ = d; }
    void add_violation(Violation v) { violations_.push_back(std::move(v)); }

    const std::vector<Violation>& violations() const { return violations_; }
    const game::GameState& state() const { return state_; }
    const std::set<PotatoId>& duplicated() const { return duplicated_; }
    std::size_t transfers_committed() const { return committed_.size(); }
    std::size_t preservation_checks() const { return preservation_checks_; }
    std::size_t fuse_checks() const { return fuse_checks_; }
    std::size_t ownership_checks() const { return ownership_checks_; }
    const std::vector<std::int64_t>& negotiation_ms() const { return negotiation_ms_; }
    const std::vector<RecoveryRecord>& recoveries() const { return recoveries_; }
    /// Active milliseconds of every exploded potato lineage, in explosion order.
    const std::vector<std::pair<PotatoId, std::int64_t>>& lifetimes() const { return lifetimes_; }

private:
    struct Instance {
        std::int64_t base_ms = 0;
        std::int64_t active_ms = 0;
        std::optional<SimTime> since;
        int crashes = 0;
    };
    struct Suspension {
        int remaining_s = 0;
        int progress_ms = 0;
        std::int64_t lineage_ms = 0;
        int crashes = 0;
        bool received = false;
    };

    Instance& instance(PotatoId id, DeviceId dev) { return instances_[{id, dev}]; }

    game::GameState state_;
    std::map<std::pair<PotatoId, DeviceId>, Instance> instances_;
    std::map<ActionId, Suspension> suspensions_;
    std::set<PotatoId> live_;
    std::map<PotatoId, int> fuse_;
    std::set<PotatoId> duplicated_;
    std::set<PotatoId> lost_;
    Duration reboot_delay_{3000};
    std::set<ActionId> committed_;
    std::vector<Violation> violations_;
    std::vector<std::int64_t> negotiation_ms_;
    std::vector<RecoveryRecord> recoveries_;
    std::vector<std::pair<PotatoId, std::int64_t>> lifetimes_;
    std::size_t preservation_checks_ = 0;
    std::size_t fuse_checks_ = 0;
    std::size_t ownership_checks_ = 0;
};

}  // namespace hotpotato
