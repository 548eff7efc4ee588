#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

/// Globally unique potato id: the generating device in the high 16 bits and
/// that device's durable generation counter in the low 16 bits.
using PotatoId = std::uint32_t;

constexpr PotatoId make_potato_id(DeviceId origin, std::uint16_t counter) {
    return (static_cast<PotatoId>(origin) << 16) | counter;
}

/// Unique per initiated pass: (initiator, initiator-local counter).
struct ActionId {
    DeviceId initiator = 0;
    std::uint32_t counter = 0;

    auto operator<=>(const ActionId&) const = default;
};

std::string to_string(ActionId id);
std::optional<ActionId> parse_action_id(std::string_view text);

/// The canonical game-event vocabulary shared by storage, DTS upload, the
/// Engine and metrics.
enum class EventKind : std::uint8_t {
    GameStarted,
    GestureRecognized,
    Generated,
    PassInitiated,
    PassCompleted,
    PassReceived,
    PassFailed,
    Exploded,
    PotatoDiscarded,
    Eliminated,
    GameOver,
    Rebooted,
    Recovered,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

/// Lifecycle and bookkeeping events carry no game action; they may be
/// evicted under storage pressure and are allowed after elimination.
bool is_essential(EventKind kind);

/// Why a pass did not complete. `CommitUnacked` marks the uncertainty window
/// where the target may already hold the potato.
enum class FailReason : std::uint8_t {
    NoNeighbor,
    Aborted,
    PrepareTimeout,
    CommitUnacked,
};

std::string_view to_string(FailReason reason);
std::optional<FailReason> parse_fail_reason(std::string_view text);

struct GameEvent {
    EventKind kind = EventKind::GameStarted;
    std::optional<PotatoId> potato;
    std::optional<ActionId> action;
    /// Counterparty: pass target/source, or the winner for GameOver.
    std::optional<DeviceId> peer;
    std::optional<int> remaining_s;
    /// Milliseconds of active time already spent toward the next fuse tick.
    std::optional<int> progress_ms;
    std::optional<int> fuse_s;
    std::optional<std::int64_t> since_ms;
    std::optional<FailReason> reason;
    std::string label;

    bool operator==(const GameEvent&) const = default;
};

struct LogEntry {
    std::uint64_t seq = 0;
    SimTime time{};
    DeviceId device = 0;
    GameEvent event;

    bool operator==(const LogEntry&) const = default;
};

}  // namespace hotpotato
