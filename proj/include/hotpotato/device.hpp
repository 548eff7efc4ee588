#pragma once

#include <cstdint>
#include <optional>

#include "hotpotato/action.hpp"
#include "hotpotato/dts.hpp"
#include "hotpotato/echo.hpp"
#include "hotpotato/game.hpp"
#include "hotpotato/gesture.hpp"
#include "hotpotato/persistence.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

struct DeviceConfig {
    echo::Config echo;
    action::Config action;
    game::Rules rules;
    dts::ClientConfig dts;
    gesture::Thresholds thresholds = gesture::default_thresholds();
    Duration reboot_delay{3000};
    std::size_t storage_capacity = 100000;
};

/// The seven per-device counters sampled into the metrics CSV (neighbors is
/// read live from the Echo table).
struct DeviceCounters {
    std::uint64_t potatoes_received = 0;
    std::uint64_t potatoes_sent = 0;
    std::uint64_t potatoes_generated = 0;
    std::uint64_t gestures_recognized = 0;
    std::uint64_t failed_actions = 0;
};

enum class GestureOutcome : std::uint8_t {
    Ignored,       // device offline, eliminated, or game over
    Unrecognized,  // classified as None or as a non-pass gesture
    NoPotato,
    Busy,
    Started,
    Failed,        // recognized flick, no eligible target
};

std::string_view to_string(GestureOutcome outcome);

/// Hooks the simulation uses to observe a device. Never used by protocol
/// logic.
class DeviceObserver {
public:
    virtual ~DeviceObserver() = default;
    virtual void on_log(const LogEntry&) {}
    virtual void on_potato_active(DeviceId, const game::Potato&) {}
    virtual void on_potato_inactive(DeviceId, const game::Potato&) {}
    /// A potato started ticking here (generated, received, retaken, restored).
    virtual void on_acquired(DeviceId, PotatoId) {}
    virtual void on_pass_completed(DeviceId, PotatoId, Duration) {}
    virtual void on_eliminated(DeviceId) {}
    virtual void on_action_message(const ActionMessage&, bool) {}
};

class PlayerDevice final : public action::Host {
public:
    PlayerDevice(DeviceId id, Position pos, double tx_factor, DeviceConfig config,
                 Scheduler& scheduler, Radio& radio, std::uint64_t seed,
                 DeviceObserver* observer = nullptr);

    PlayerDevice(const PlayerDevice&) = delete;
    PlayerDevice& operator=(const PlayerDevice&) = delete;

    void start_game(SimTime at, std::uint32_t game_id);
    /// World-level notification that the game ended (frozen countdowns).
    void end_game(DeviceId winner);

    GestureOutcome perform_gesture(const gesture::AccelTrace& trace);

    /// Power loss. Volatile state is gone; the device comes back after the
    /// reboot delay. A crash while already down restarts the delay.
    void crash();
    /// Permanent failure: no reboot is scheduled.
    void fail_permanently();

    DeviceId id() const { return id_; }
    bool online() const { return online_; }
    bool alive() const { return alive_; }
    bool game_over() const { return game_over_; }
    bool permanently_failed() const { return failed_; }
    std::optional<SimTime> down_since() const { return down_since_; }

    const game::PotatoBag& bag() const { return bag_; }
    const persistence::Storage& storage() const { return storage_; }
    persistence::Storage& storage() { return storage_; }
    const echo::EchoProtocol& echo() const { return echo_; }
    echo::EchoProtocol& echo() { return echo_; }
    const action::ActionProtocol& action() const { return action_; }
    action::ActionProtocol& action() { return action_; }
    const dts::Client& dts() const { return dts_; }
    const DeviceCounters& counters() const { return counters_; }
    std::size_t neighbor_count() const;
    std::size_t player_neighbor_count() const;

    /// Potatoes this device owns: the live bag when online, the durable
    /// checkpoint while down.
    std::vector<PotatoId> held_potatoes(bool active_only) const;

    // action::Host
    bool accepts_potatoes() const override;
    std::optional<DeviceId> choose_target() override;
    PotatoSnapshot suspend_for_pass(PotatoId potato, ActionId action, DeviceId target) override;
    void pass_failed(PotatoId potato, ActionId action, FailReason reason) override;
    void pass_without_target(PotatoId potato, ActionId action) override;
    void pass_completed(PotatoId potato, ActionId action, DeviceId target,
                        Duration negotiation) override;
    void potato_received(const PotatoSnapshot& snapshot, ActionId action, DeviceId from) override;
    void message_sent(const ActionMessage& msg, bool delivered) override;

private:
    void on_frame(const RadioFrame& frame);
    void log(GameEvent event);
    void checkpoint();
    void arm_generation();
    void generation_check();
    void on_exploded(const game::Potato& potato);
    void reboot();

    DeviceId id_;
    DeviceConfig config_;
    Scheduler& scheduler_;
    Radio& radio_;
    DeviceObserver* observer_;
    RngStream game_rng_;
    persistence::Storage storage_;
    echo::EchoProtocol echo_;
    game::PotatoBag bag_;
    action::ActionProtocol action_;
    dts::Client dts_;
    DeviceCounters counters_;

    std::uint32_t game_id_ = 0;
    std::uint16_t potato_counter_ = 0;
    bool started_ = false;
    bool online_ = true;
    bool alive_ = true;
    bool game_over_ = false;
    bool failed_ = false;
    std::optional<SimTime> down_since_;
    std::optional<DeviceId> winner_;
    EventHandle generation_timer_;
    EventHandle reboot_timer_;
};

}  // namespace hotpotato
