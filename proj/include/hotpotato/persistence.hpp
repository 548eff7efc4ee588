#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hotpotato/events.hpp"
#include "hotpotato/game.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::persistence {

struct CheckpointPotato {
    PotatoId id = 0;
    int fuse_s = 0;
    int remaining_s = 0;
    int progress_ms = 0;
    int pass_count = 0;
    game::PotatoStatus status = game::PotatoStatus::Active;
    SimTime recorded_at{};
    std::optional<ActionId> action;

    bool operator==(const CheckpointPotato&) const = default;
};

/// Durable device state, rewritten on every potato state change.
struct Checkpoint {
    std::vector<CheckpointPotato> potatoes;
    bool eliminated = false;
    std::uint32_t game_id = 0;
    SimTime taken_at{};
    std::uint16_t potato_counter = 0;
    std::uint32_t action_counter = 0;

    bool operator==(const Checkpoint&) const = default;
};

/// Flash-backed storage of one device: append-only event log, latest
/// checkpoint, and the DTS upload watermark. Everything here survives a
/// crash; appends are durable by the time append() returns.
class Storage {
public:
    explicit Storage(DeviceId device, std::size_t capacity = 100000)
        : device_(device), capacity_(capacity) {}

    /// Returns the new entry's seq (1, 2, 3, ...). When full, the oldest
    /// non-essential entry is evicted; essential entries are never evicted.
    std::uint64_t append(SimTime at, GameEvent event);

    std::uint64_t last_seq() const { return next_seq_ - 1; }
    /// Highest seq guaranteed to survive a crash.
    std::uint64_t flushed_watermark() const { return last_seq(); }
    const std::vector<LogEntry>& entries() const { return log_; }
    /// Entries with seq > after, at most `max` of them.
    std::vector<LogEntry> entries_after(std::uint64_t after, std::size_t max) const;
    /// Post-game or post-mortem read-out of every durable entry.
    std::vector<LogEntry> extract() const { return log_; }

    void write_checkpoint(Checkpoint cp) { checkpoint_ = std::move(cp); }
    const std::optional<Checkpoint>& checkpoint() const { return checkpoint_; }

    std::uint64_t upload_watermark() const { return acked_; }
    void set_upload_watermark(std::uint64_t seq) { acked_ = std::max(acked_, seq); }

    std::size_t evicted() const { return evicted_; }
    DeviceId device() const { return device_; }

private:
    DeviceId device_;
    std::size_t capacity_;
    std::uint64_t next_seq_ = 1;
    std::vector<LogEntry> log_;
    std::optional<Checkpoint> checkpoint_;
    std::uint64_t acked_ = 0;
    std::size_t evicted_ = 0;
};

/// One event per line: seq<TAB>time_ms<TAB>kind<TAB>key=value fields
/// (space-separated, fixed order, `dev` always first).
std::string format_line(const LogEntry& entry);

struct ParseResult {
    std::optional<LogEntry> entry;
    std::string error;
};

ParseResult parse_line(std::string_view line);

void write_log(std::ostream& out, const std::vector<LogEntry>& entries);

struct ReadResult {
    std::vector<LogEntry> entries;
    /// Lines that failed to parse, with line number and reason.
    std::vector<std::string> quarantined;
};

/// Lines starting with '#' are comments (summary blocks) and are skipped.
ReadResult read_log(std::istream& in);

}  // namespace hotpotato::persistence
