#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hotpotato/echo.hpp"
#include "hotpotato/events.hpp"
#include "hotpotato/game.hpp"
#include "hotpotato/messages.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::backbone {

enum class ReportKind : std::uint8_t {
    DuplicateResolved,
    DoubleActive,
    UnmatchedTransfer,
    EventAfterElimination,
    FuseViolation,
    OutcomeMismatch,
    Malformed,
};

std::string_view to_string(ReportKind kind);

struct Report {
    ReportKind kind = ReportKind::Malformed;
    SimTime at{};
    DeviceId device = 0;
    std::optional<PotatoId> potato;
    std::string detail;
};

/// Allowed gap between a potato's summed Active time and its fuse, per
/// quantization event (the lifetime itself, plus one per crash of a holder).
inline constexpr std::int64_t kFuseToleranceMs = 1000;

struct EngineView {
    /// Merged log ordered by (time, device, seq).
    std::vector<LogEntry> log;
    game::GameState state;
    std::vector<Report> reports;

    std::size_t count(ReportKind kind) const;
};

/// Pure fold of a merged log into the derived game state plus rule reports.
/// Reports are never fixes, except duplicate-potato resolution: when a pass
/// is found to have forked (the holder reactivated after the target applied
/// the Commit) the later activation is canonical and the other branch is void.
EngineView fold(std::vector<LogEntry> entries);

/// The distinguished Station holding the merged global view.
class Engine {
public:
    /// Returns the number of new (device, seq) entries.
    std::size_t merge(const std::vector<LogEntry>& entries);
    void quarantine(std::string reason, SimTime at = {});

    std::size_t size() const { return merged_.size(); }
    bool contains(DeviceId device, std::uint64_t seq) const {
        return merged_.contains({device, seq});
    }
    std::uint64_t batches_merged() const { return batches_; }
    std::uint64_t duplicates_dropped() const { return duplicates_; }
    std::vector<LogEntry> entries() const;
    /// Recomputed from the merged log on each call.
    EngineView view() const;

private:
    std::map<std::pair<DeviceId, std::uint64_t>, LogEntry> merged_;
    std::vector<Report> quarantined_;
    std::uint64_t batches_ = 0;
    std::uint64_t duplicates_ = 0;
};

struct BackboneConfig {
    /// Station -> Engine one-way latency over the wired backbone.
    Duration latency{10};
    std::size_t forward_batch = 64;
};

/// Infrastructure node: collects player uploads over the radio, acks them,
/// and forwards them to the Engine. Ingestion and forwarding are separate
/// event chains; a batch in flight to the Engine never delays an upload.
class Station {
public:
    struct Activity {
        SimTime at;
        bool ingest;  // false: forward completion
        std::size_t queue_after;
    };

    Station(DeviceId id, Position pos, Scheduler& scheduler, Radio& radio, Engine& engine,
            echo::Config echo_config, BackboneConfig backbone, std::uint64_t seed,
            bool colocated_engine);

    void start(SimTime epoch);
    void on_frame(const RadioFrame& frame);
    void ingest(const DtsBatch& batch);

    DeviceId id() const { return id_; }
    std::size_t queue_size() const { return queue_.size(); }
    bool forwarding() const { return in_flight_ > 0; }
    bool idle() const { return queue_.empty() && in_flight_ == 0; }
    std::uint64_t ingested() const { return ingested_; }
    std::uint64_t forwarded() const { return forwarded_; }
    const std::vector<Activity>& activity() const { return activity_; }
    void record_activity(bool on) { record_ = on; }
    echo::EchoProtocol& echo() { return echo_; }

private:
    void pump();

    DeviceId id_;
    Scheduler& scheduler_;
    Radio& radio_;
    Engine& engine_;
    BackboneConfig backbone_;
    echo::EchoProtocol echo_;
    std::set<std::pair<DeviceId, std::uint64_t>> seen_;
    std::deque<LogEntry> queue_;
    std::size_t in_flight_ = 0;
    std::uint64_t ingested_ = 0;
    std::uint64_t forwarded_ = 0;
    bool record_ = false;
    std::vector<Activity> activity_;
};

}  // namespace hotpotato::backbone
