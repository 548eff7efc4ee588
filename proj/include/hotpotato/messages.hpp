#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "hotpotato/events.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

/// Advertised in every beacon. A player that has been eliminated keeps
/// beaconing (for DTS upload) as a Spectator so others stop counting it.
enum class Role : std::uint8_t { Player = 0, Station = 1, Spectator = 2 };

std::string_view to_string(Role role);

struct Beacon {
    DeviceId sender = 0;
    Role role = Role::Player;
    std::vector<DeviceId> heard;
    SimTime sent_at{};

    bool operator==(const Beacon&) const = default;
};

enum class ActionKind : std::uint8_t { Prepare, Ready, Abort, Commit, CommitAck };

std::string_view to_string(ActionKind kind);

/// Countdown state carried by a Prepare. `progress_ms` is active time already
/// spent toward the next one-second tick, so conservation is exact across
/// holders.
struct PotatoSnapshot {
    PotatoId id = 0;
    int fuse_s = 0;
    int remaining_s = 0;
    int progress_ms = 0;
    int pass_count = 0;

    bool operator==(const PotatoSnapshot&) const = default;
};

struct ActionMessage {
    ActionKind kind = ActionKind::Prepare;
    ActionId action;
    DeviceId sender = 0;
    DeviceId receiver = 0;
    std::optional<PotatoSnapshot> potato;

    bool operator==(const ActionMessage&) const = default;
};

/// Player -> Station upload of durable log entries.
struct DtsBatch {
    DeviceId player = 0;
    DeviceId station = 0;
    std::vector<LogEntry> entries;

    bool operator==(const DtsBatch&) const = default;
};

/// Station -> player acknowledgement; every entry with seq <= acked_through
/// is now the Station's responsibility.
struct DtsAck {
    DeviceId station = 0;
    DeviceId player = 0;
    std::uint64_t acked_through = 0;

    bool operator==(const DtsAck&) const = default;
};

using DtsMessage = std::variant<DtsBatch, DtsAck>;
using Message = std::variant<Beacon, ActionMessage, DtsMessage>;

enum class MessageFamily : std::uint8_t { Beacon, Action, Dts };

inline MessageFamily family_of(const Message& m) { return static_cast<MessageFamily>(m.index()); }

struct RadioFrame {
    DeviceId sender = 0;
    std::shared_ptr<const Message> payload;
    SimTime sent_at{};
};

}  // namespace hotpotato
