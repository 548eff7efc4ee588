#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "hotpotato/events.hpp"
#include "hotpotato/messages.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::game {

enum class PotatoStatus : std::uint8_t { Active, Suspended, Exploded, Removed };

std::string_view to_string(PotatoStatus status);

struct Potato {
    PotatoId id = 0;
    int fuse_s = 0;
    int remaining_s = 0;
    DeviceId holder = 0;
    PotatoStatus status = PotatoStatus::Active;
    int pass_count = 0;
    /// Active milliseconds already spent toward the next tick (0..999).
    int progress_ms = 0;
    /// Start of the current active stretch; meaningful while Active.
    SimTime active_since{};
    /// Last time this potato's countdown state changed.
    SimTime recorded_at{};
    /// Pass in progress while Suspended.
    std::optional<ActionId> action;

    PotatoSnapshot snapshot() const { return {id, fuse_s, remaining_s, progress_ms, pass_count}; }
};

struct Rules {
    /// Base generation probability per check for an isolated player.
    double p0 = 0.02;
    int fuse_s = 30;
    Duration tick{1000};
    Duration generation_period{1000};

    bool operator==(const Rules&) const = default;
};

/// p0 / (1 + n): n is the number of bidirectional player neighbors.
double generation_probability(double p0, std::size_t bidirectional_players);

/// The potatoes one device holds, with their per-second countdowns.
class PotatoBag {
public:
    struct Callbacks {
        std::function<void(const Potato&)> exploded;
        /// Countdown state changed (tick, suspension, activation, removal).
        std::function<void()> changed;
        std::function<void(const Potato&)> activated;
        std::function<void(const Potato&)> deactivated;
    };

    PotatoBag(DeviceId owner, Rules rules, Scheduler& scheduler, Callbacks callbacks);

    /// Adds a potato in Active state (ticking unless frozen).
    void activate(Potato potato);
    /// Freezes the countdown for a pass; returns the frozen snapshot.
    PotatoSnapshot suspend(PotatoId id, ActionId action);
    /// Resumes a suspended potato after a failed pass.
    void resume(PotatoId id);
    std::optional<Potato> remove(PotatoId id);

    /// Stops all countdowns (game over); potatoes keep their state.
    void freeze();
    bool frozen() const { return frozen_; }
    /// Crash: drops everything without touching timers (the scheduler has
    /// already cancelled them).
    void wipe();

    const std::map<PotatoId, Potato>& all() const { return potatoes_; }
    const Potato* find(PotatoId id) const;
    bool holds_active() const;
    /// Active potato with the least remaining fuse (ties: lowest id).
    std::optional<PotatoId> most_urgent() const;

    /// Manual tick, exposed for tests; no-op unless the potato is Active.
    void tick(PotatoId id);

private:
    void arm(Potato& p);
    void disarm(PotatoId id);
    void settle_progress(Potato& p);

    DeviceId owner_;
    Rules rules_;
    Scheduler& scheduler_;
    Callbacks cb_;
    std::map<PotatoId, Potato> potatoes_;
    std::map<PotatoId, EventHandle> timers_;
    bool frozen_ = false;
};

struct PotatoRecord {
    int fuse_s = 0;
    PotatoStatus status = PotatoStatus::Active;
    DeviceId holder = 0;
    int pass_count = 0;

    bool operator==(const PotatoRecord&) const = default;
};

struct Elimination {
    DeviceId player = 0;
    SimTime at{};

    bool operator==(const Elimination&) const = default;
};

/// Global view of one game. Exists only in the simulation oracle and the
/// Engine, never on player devices.
struct GameState {
    std::set<DeviceId> players;
    std::set<DeviceId> alive;
    std::vector<Elimination> eliminated;
    std::map<PotatoId, PotatoRecord> potatoes;
    SimTime started_at{};
    std::optional<SimTime> ended_at;
    std::optional<DeviceId> winner;

    bool over() const { return ended_at.has_value(); }
    void start(const std::set<DeviceId>& ids, SimTime at);
    /// Removes the player; ends the game when one remains. Returns true if
    /// this elimination ended the game.
    bool eliminate(DeviceId player, SimTime at);

    bool operator==(const GameState&) const = default;
};

}  // namespace hotpotato::game
