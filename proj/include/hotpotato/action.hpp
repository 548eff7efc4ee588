#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>

#include "hotpotato/events.hpp"
#include "hotpotato/messages.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::action {

struct Config {
    Duration prepare_timeout{800};
    Duration commit_retry_interval{400};
    int commit_retries = 3;
    /// Target drops a readied-but-uncommitted action after this long. Must
    /// exceed prepare_timeout + (1 + commit_retries) * commit_retry_interval.
    Duration pending_timeout{3000};
    /// CommitAck copies sent per Commit received, spaced apart.
    int commit_ack_copies = 3;
    Duration commit_ack_spacing{100};
};

enum class Phase : std::uint8_t { Idle, Preparing, Committing, Done, Aborted };

std::string_view to_string(Phase phase);

struct TransferState {
    Phase phase = Phase::Idle;
    ActionId action;
    PotatoId potato = 0;
    DeviceId target = 0;
    int retries_left = 0;
    PotatoSnapshot snapshot;
    SimTime started_at{};
    EventHandle timer;
};

/// What the protocol needs from the device it runs on.
class Host {
public:
    virtual ~Host() = default;

    /// Alive, not eliminated, game still running.
    virtual bool accepts_potatoes() const = 0;
    /// Nearest bidirectional Player neighbor (ties: lowest id).
    virtual std::optional<DeviceId> choose_target() = 0;
    /// Freezes the potato's countdown for the pass and records it.
    virtual PotatoSnapshot suspend_for_pass(PotatoId potato, ActionId action, DeviceId target) = 0;
    /// The pass failed; the potato is ticking again on this device.
    virtual void pass_failed(PotatoId potato, ActionId action, FailReason reason) = 0;
    /// No eligible target: nothing was suspended.
    virtual void pass_without_target(PotatoId potato, ActionId action) = 0;
    /// CommitAck arrived: ownership moved, drop the suspended copy.
    virtual void pass_completed(PotatoId potato, ActionId action, DeviceId target,
                                Duration negotiation) = 0;
    /// Commit applied on this (target) device.
    virtual void potato_received(const PotatoSnapshot& snapshot, ActionId action, DeviceId from) = 0;
    virtual void message_sent(const ActionMessage&, bool delivered) { (void)delivered; }
};

/// Two-phase-commit potato transfer. One outgoing pass at a time; a device
/// with an outgoing pass or a readied incoming one refuses new Prepares.
class ActionProtocol {
public:
    ActionProtocol(DeviceId self, Config config, Scheduler& scheduler, Radio& radio, Host& host);

    /// Returns Preparing, or Aborted when no target exists.
    Phase initiate_pass(PotatoId potato);
    void on_message(const ActionMessage& msg);

    bool idle() const { return transfer_.phase == Phase::Idle; }
    /// Outgoing pass in flight or an incoming pass readied.
    bool busy() const { return !idle() || !pending_.empty(); }
    /// No protocol timers outstanding.
    bool quiescent() const { return !busy() && ack_timers_.empty(); }
    const TransferState& transfer() const { return transfer_; }
    std::size_t pending_incoming() const { return pending_.size(); }

    /// Crash: every volatile record is gone (timers were cancelled by the
    /// scheduler).
    void reset();
    /// Elimination: stop participating; the caller disposes of the potato.
    void abandon();

    std::uint32_t action_counter() const { return counter_; }
    void set_action_counter(std::uint32_t c) { counter_ = c; }
    const Config& config() const { return config_; }

private:
    struct Incoming {
        DeviceId initiator = 0;
        PotatoSnapshot snapshot;
        EventHandle timeout;
    };

    void send(ActionKind kind, ActionId action, DeviceId to,
              std::optional<PotatoSnapshot> potato = std::nullopt);
    void send_ack_burst(ActionId action, DeviceId to);
    void finish(Phase outcome);

    void on_prepare(const ActionMessage& msg);
    void on_ready(const ActionMessage& msg);
    void on_abort(const ActionMessage& msg);
    void on_commit(const ActionMessage& msg);
    void on_commit_ack(const ActionMessage& msg);
    void on_prepare_timeout();
    void on_commit_timer();

    DeviceId self_;
    Config config_;
    Scheduler& scheduler_;
    Radio& radio_;
    Host& host_;
    std::uint32_t counter_ = 0;
    TransferState transfer_;
    std::map<ActionId, Incoming> pending_;
    std::map<ActionId, ActionKind> responses_;
    std::set<ActionId> applied_;
    std::set<EventHandle> ack_timers_;
};

}  // namespace hotpotato::action
