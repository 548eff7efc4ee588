#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hotpotato/backbone.hpp"
#include "hotpotato/device.hpp"
#include "hotpotato/mobility.hpp"
#include "hotpotato/oracle.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/scenario.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

inline constexpr DeviceId kFirstStationId = 1000;
inline constexpr Duration kMobilityStep{100};
inline constexpr Duration kDrainCheckPeriod{500};

inline constexpr const char* kMetricsHeader =
    "time_ms,neighbors,potatoes_received,potatoes_sent,potatoes_generated,gestures_recognized,"
    "failed_actions";

struct RunOptions {
    /// Build the output files in memory. Batch runs turn this off.
    bool artifacts = true;
    /// Adds the scheduler trace as trace.log.
    bool trace = false;
    std::uint32_t game_id = 1;
};

struct DeviceReport {
    DeviceId id = 0;
    DeviceCounters counters;
    std::optional<SimTime> eliminated_at;
    bool permanently_failed = false;
    std::size_t log_entries = 0;
};

struct RunResult {
    std::uint64_t seed = 0;
    /// Unset when the duration cap ended the game.
    std::optional<DeviceId> winner;
    bool capped = false;
    /// Game start to game end (last elimination or cap).
    std::int64_t duration_ms = 0;
    /// Game end plus the post-game upload phase.
    std::int64_t finished_ms = 0;
    bool drained = false;
    std::vector<Violation> violations;
    std::uint64_t transfers = 0;
    std::uint64_t crashes = 0;
    std::size_t duplicates = 0;
    std::size_t duplicates_resolved = 0;
    std::vector<std::int64_t> negotiation_ms;
    std::vector<DeviceReport> devices;
    /// file name -> contents
    std::map<std::string, std::string> artifacts;

    bool ok() const { return violations.empty(); }
};

/// One simulated game: players, stations, the Engine, agents and the oracle.
class World final : public DeviceObserver {
public:
    explicit World(Scenario scenario, RunOptions options = {});
    ~World() override;

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    /// Runs to the end of the post-game upload phase.
    RunResult run();

    /// Step-wise control for tests. start() once, then advance as needed.
    void start();
    void advance_until(SimTime t);
    bool game_ended() const { return game_ended_; }
    bool finished() const { return finished_; }

    const Scenario& scenario() const { return scenario_; }
    Scheduler& scheduler() { return scheduler_; }
    Radio& radio() { return radio_; }
    backbone::Engine& engine() { return engine_; }
    const Oracle& oracle() const { return oracle_; }
    std::vector<PlayerDevice*> players();
    PlayerDevice& player(DeviceId id);
    backbone::Station& station(std::size_t index) { return *stations_.at(index); }
    std::size_t station_count() const { return stations_.size(); }

    // DeviceObserver
    void on_log(const LogEntry& entry) override;
    void on_potato_active(DeviceId device, const game::Potato& potato) override;
    void on_potato_inactive(DeviceId device, const game::Potato& potato) override;
    void on_acquired(DeviceId device, PotatoId potato) override;
    void on_pass_completed(DeviceId device, PotatoId potato, Duration negotiation) override;
    void on_eliminated(DeviceId device) override;
    void on_action_message(const ActionMessage& msg, bool delivered) override;

private:
    struct Agent {
        mobility::Strategy strategy;
        Position waypoint;
        RngStream move_rng;
        RngStream gesture_rng;
        EventHandle gesture;
        Duration since_decision{0};
    };

    void step_once();
    bool action_quiescent() const;
    void mobility_tick();
    void sample();
    void write_sample(const PlayerDevice& d);
    void crash_event(const CrashSpec& spec);
    void schedule_gesture(DeviceId id, Duration delay);
    void gesture_event(DeviceId id);
    void end_game();
    void drain_check();
    bool drained() const;
    void finish();
    void final_checks();
    void build_artifacts();

    Scenario scenario_;
    RunOptions options_;
    Scheduler scheduler_;
    Radio radio_;
    backbone::Engine engine_;
    Oracle oracle_;
    std::vector<std::unique_ptr<backbone::Station>> stations_;
    std::map<DeviceId, std::unique_ptr<PlayerDevice>> players_;
    std::map<DeviceId, Agent> agents_;

    bool started_ = false;
    bool game_ended_ = false;
    bool finished_ = false;
    bool drained_ = false;
    bool capped_ = false;
    bool dirty_ = false;
    SimTime game_end_{};
    SimTime finish_at_{};
    std::optional<SimTime> last_sample_;
    std::uint64_t crashes_ = 0;
    std::set<DeviceId> extracted_;

    std::map<DeviceId, std::string> csv_;
    std::string actions_log_;
    std::vector<std::uint8_t> beacons_;
    RunResult result_;
};

/// Convenience: build, run, return.
RunResult run_scenario(const Scenario& scenario, RunOptions options = {});

/// Text of summary.txt for a finished run.
std::string summary_text(const Scenario& scenario, const RunResult& result);

}  // namespace hotpotato
