#include "hotpotato/device.hpp"

#include <algorithm>

namespace hotpotato {

std::string_view to_string(GestureOutcome outcome) {
    switch (outcome) {
        case GestureOutcome::Ignored: return "ignored";
        case GestureOutcome::Unrecognized: return "unrecognized";
        case GestureOutcome::NoPotato: return "no_potato";
        case GestureOutcome::Busy: return "busy";
        case GestureOutcome::Started: return "started";
        case GestureOutcome::Failed: return "failed";
    }
    return "?";
}

PlayerDevice::PlayerDevice(DeviceId id, Position pos, double tx_factor, DeviceConfig config,
                           Scheduler& scheduler, Radio& radio, std::uint64_t seed,
                           DeviceObserver* observer)
    : id_(id),
      config_(config),
      scheduler_(scheduler),
      radio_(radio),
      observer_(observer),
      game_rng_(seed, "game", id),
      storage_(id, config.storage_capacity),
      echo_(id, Role::Player, config.echo, scheduler, radio, seed),
      bag_(id, config.rules, scheduler,
           game::PotatoBag::Callbacks{
               [this](const game::Potato& p) { on_exploded(p); },
               [this] { checkpoint(); },
               [this](const game::Potato& p) {
                   if (observer_) observer_->on_potato_active(id_, p);
               },
               [this](const game::Potato& p) {
                   if (observer_) observer_->on_potato_inactive(id_, p);
               },
           }),
      action_(id, config.action, scheduler, radio, *this),
      dts_(id, config.dts, scheduler, radio, storage_, echo_.table()) {
    radio_.add_node(id_, pos, tx_factor);
    radio_.set_handler(id_, [this](const RadioFrame& f) { on_frame(f); });
}

void PlayerDevice::start_game(SimTime at, std::uint32_t game_id) {
    (void)at;
    game_id_ = game_id;
    started_ = true;
    GameEvent ev;
    ev.kind = EventKind::GameStarted;
    ev.label = "game" + std::to_string(game_id);
    log(std::move(ev));
    checkpoint();
    echo_.start(scheduler_.now());
    dts_.start();
    arm_generation();
}

void PlayerDevice::end_game(DeviceId winner) {
    if (game_over_) return;
    game_over_ = true;
    winner_ = winner;
    scheduler_.cancel(generation_timer_);
    if (!online_) return;
    bag_.freeze();
    if (winner == id_ && alive_) {
        GameEvent ev;
        ev.kind = EventKind::GameOver;
        ev.peer = winner;
        log(std::move(ev));
    }
}

void PlayerDevice::on_frame(const RadioFrame& frame) {
    if (!online_) return;
    const Message& m = *frame.payload;
    if (const auto* b = std::get_if<Beacon>(&m)) {
        echo_.on_beacon(*b);
    } else if (const auto* a = std::get_if<ActionMessage>(&m)) {
        action_.on_message(*a);
    } else if (const auto* d = std::get_if<DtsMessage>(&m)) {
        if (const auto* ack = std::get_if<DtsAck>(d)) dts_.on_ack(*ack);
    }
}

void PlayerDevice::log(GameEvent event) {
    storage_.append(scheduler_.now(), std::move(event));
    if (observer_) observer_->on_log(storage_.entries().back());
}

void PlayerDevice::checkpoint() {
    if (!online_) return;
    persistence::Checkpoint cp;
    const SimTime now = scheduler_.now();
    for (const auto& [id, p] : bag_.all()) {
        persistence::CheckpointPotato c;
        c.id = id;
        c.fuse_s = p.fuse_s;
        c.remaining_s = p.remaining_s;
        c.progress_ms = p.progress_ms;
        if (p.status == game::PotatoStatus::Active && !bag_.frozen()) {
            c.progress_ms = std::min<int>(p.progress_ms + static_cast<int>(to_ms(now - p.active_since)),
                                          static_cast<int>(config_.rules.tick.count()) - 1);
        }
        c.pass_count = p.pass_count;
        c.status = p.status;
        c.recorded_at = p.recorded_at;
        c.action = p.action;
        cp.potatoes.push_back(c);
    }
    cp.eliminated = !alive_;
    cp.game_id = game_id_;
    cp.taken_at = now;
    cp.potato_counter = potato_counter_;
    cp.action_counter = action_.action_counter();
    storage_.write_checkpoint(std::move(cp));
}

void PlayerDevice::arm_generation() {
    generation_timer_ = scheduler_.schedule_in(config_.rules.generation_period, id_, "game.generate",
                                               [this] { generation_check(); });
}

void PlayerDevice::generation_check() {
    if (!online_ || !alive_ || game_over_) return;
    arm_generation();
    const std::size_t n = echo_.table().bidirectional_count(scheduler_.now(), Role::Player);
    if (!game_rng_.bernoulli(game::generation_probability(config_.rules.p0, n))) return;
    const PotatoId id = make_potato_id(id_, ++potato_counter_);
    GameEvent ev;
    ev.kind = EventKind::Generated;
    ev.potato = id;
    ev.fuse_s = config_.rules.fuse_s;
    ev.remaining_s = config_.rules.fuse_s;
    log(std::move(ev));
    ++counters_.potatoes_generated;
    game::Potato p;
    p.id = id;
    p.fuse_s = config_.rules.fuse_s;
    p.remaining_s = config_.rules.fuse_s;
    bag_.activate(p);
    if (observer_) observer_->on_acquired(id_, id);
}

GestureOutcome PlayerDevice::perform_gesture(const gesture::AccelTrace& trace) {
    if (!started_ || !online_ || !alive_ || game_over_) return GestureOutcome::Ignored;
    gesture::Label label = gesture::Label::None;
    try {
        label = gesture::classify(trace, config_.thresholds);
    } catch (const gesture::GestureError&) {
        return GestureOutcome::Unrecognized;
    }
    if (label == gesture::Label::None) return GestureOutcome::Unrecognized;
    ++counters_.gestures_recognized;
    GameEvent ev;
    ev.kind = EventKind::GestureRecognized;
    ev.label = std::string(gesture::to_string(label));
    log(std::move(ev));
    if (!gesture::is_flick(label)) return GestureOutcome::Unrecognized;
    const auto potato = bag_.most_urgent();
    if (!potato) return GestureOutcome::NoPotato;
    if (!action_.idle()) return GestureOutcome::Busy;
    return action_.initiate_pass(*potato) == action::Phase::Preparing ? GestureOutcome::Started
                                                                       : GestureOutcome::Failed;
}

void PlayerDevice::crash() {
    if (failed_) return;
    if (online_) {
        online_ = false;
        down_since_ = scheduler_.now();
        radio_.set_online(id_, false);
        scheduler_.cancel_target(id_);
        echo_.stop();
        dts_.stop();
        bag_.wipe();
        action_.reset();
        echo_.table().clear();
    } else {
        scheduler_.cancel(reboot_timer_);
    }
    reboot_timer_ = scheduler_.schedule_in(config_.reboot_delay, std::nullopt, "device.reboot",
                                           [this] { reboot(); });
}

void PlayerDevice::fail_permanently() {
    crash();
    scheduler_.cancel(reboot_timer_);
    failed_ = true;
}

void PlayerDevice::reboot() {
    online_ = true;
    radio_.set_online(id_, true);
    GameEvent rb;
    rb.kind = EventKind::Rebooted;
    rb.since_ms = to_ms(down_since_.value_or(scheduler_.now()));
    log(std::move(rb));
    down_since_.reset();

    std::vector<PotatoId> restored;
    // Copy: restoring rewrites the checkpoint as potatoes come back.
    if (const auto cp = storage_.checkpoint()) {
        potato_counter_ = cp->potato_counter;
        action_.set_action_counter(cp->action_counter);
        alive_ = !cp->eliminated;
        for (const auto& c : cp->potatoes) {
            if (c.status != game::PotatoStatus::Active && c.status != game::PotatoStatus::Suspended) {
                continue;
            }
            game::Potato p;
            p.id = c.id;
            p.fuse_s = c.fuse_s;
            p.remaining_s = c.remaining_s;
            p.progress_ms = c.progress_ms;
            p.pass_count = c.pass_count;
            bag_.activate(p);
            GameEvent ev;
            ev.kind = EventKind::Recovered;
            ev.potato = c.id;
            ev.action = c.action;
            ev.remaining_s = c.remaining_s;
            ev.progress_ms = c.progress_ms;
            ev.fuse_s = c.fuse_s;
            ev.since_ms = to_ms(c.recorded_at);
            log(std::move(ev));
            // An interrupted outgoing pass counts as a failed action.
            if (c.action) ++counters_.failed_actions;
            restored.push_back(c.id);
        }
    }
    checkpoint();
    echo_.set_role(alive_ ? Role::Player : Role::Spectator);
    echo_.start(scheduler_.now());
    if (started_) dts_.start();
    if (game_over_) {
        bag_.freeze();
        if (winner_ == id_ && alive_) {
            GameEvent ev;
            ev.kind = EventKind::GameOver;
            ev.peer = *winner_;
            log(std::move(ev));
        }
        return;
    }
    if (started_ && alive_) arm_generation();
    if (observer_) {
        for (PotatoId id : restored) observer_->on_acquired(id_, id);
    }
}

void PlayerDevice::on_exploded(const game::Potato& potato) {
    GameEvent ex;
    ex.kind = EventKind::Exploded;
    ex.potato = potato.id;
    ex.fuse_s = potato.fuse_s;
    ex.remaining_s = 0;
    log(std::move(ex));
    alive_ = false;
    scheduler_.cancel(generation_timer_);
    action_.abandon();
    std::vector<PotatoId> others;
    for (const auto& [id, p] : bag_.all()) others.push_back(id);
    for (PotatoId id : others) {
        auto removed = bag_.remove(id);
        GameEvent ev;
        ev.kind = EventKind::PotatoDiscarded;
        ev.potato = id;
        ev.remaining_s = removed->remaining_s;
        log(std::move(ev));
    }
    echo_.set_role(Role::Spectator);
    checkpoint();
    GameEvent el;
    el.kind = EventKind::Eliminated;
    el.potato = potato.id;
    log(std::move(el));
    if (observer_) observer_->on_eliminated(id_);
}

std::size_t PlayerDevice::neighbor_count() const {
    return echo_.table().bidirectional_count(scheduler_.now());
}

std::size_t PlayerDevice::player_neighbor_count() const {
    return echo_.table().bidirectional_count(scheduler_.now(), Role::Player);
}

std::vector<PotatoId> PlayerDevice::held_potatoes(bool active_only) const {
    std::vector<PotatoId> out;
    if (online_) {
        for (const auto& [id, p] : bag_.all()) {
            if (!active_only || p.status == game::PotatoStatus::Active) out.push_back(id);
        }
    } else if (const auto& cp = storage_.checkpoint()) {
        // Everything checkpointed comes back Active on reboot.
        for (const auto& c : cp->potatoes) {
            if (c.status == game::PotatoStatus::Active || c.status == game::PotatoStatus::Suspended) {
                out.push_back(c.id);
            }
        }
    }
    return out;
}

bool PlayerDevice::accepts_potatoes() const { return started_ && online_ && alive_ && !game_over_; }

std::optional<DeviceId> PlayerDevice::choose_target() {
    std::optional<DeviceId> best;
    double best_d = 0.0;
    for (DeviceId id : echo_.table().bidirectional(scheduler_.now(), Role::Player)) {
        const double d = radio_.distance_between(id_, id);
        if (!best || d < best_d) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

PotatoSnapshot PlayerDevice::suspend_for_pass(PotatoId potato, ActionId action, DeviceId target) {
    const PotatoSnapshot snap = bag_.suspend(potato, action);
    GameEvent ev;
    ev.kind = EventKind::PassInitiated;
    ev.potato = potato;
    ev.action = action;
    ev.peer = target;
    ev.remaining_s = snap.remaining_s;
    ev.progress_ms = snap.progress_ms;
    log(std::move(ev));
    return snap;
}

void PlayerDevice::pass_failed(PotatoId potato, ActionId action, FailReason reason) {
    const game::Potato* p = bag_.find(potato);
    if (p == nullptr || p->status != game::PotatoStatus::Suspended) return;
    bag_.resume(potato);
    ++counters_.failed_actions;
    GameEvent ev;
    ev.kind = EventKind::PassFailed;
    ev.potato = potato;
    ev.action = action;
    ev.reason = reason;
    ev.remaining_s = p->remaining_s;
    ev.progress_ms = p->progress_ms;
    log(std::move(ev));
    if (observer_) observer_->on_acquired(id_, potato);
}

void PlayerDevice::pass_without_target(PotatoId potato, ActionId action) {
    ++counters_.failed_actions;
    GameEvent ev;
    ev.kind = EventKind::PassFailed;
    ev.potato = potato;
    ev.action = action;
    ev.reason = FailReason::NoNeighbor;
    if (const auto* p = bag_.find(potato)) ev.remaining_s = p->remaining_s;
    log(std::move(ev));
    checkpoint();
}

void PlayerDevice::pass_completed(PotatoId potato, ActionId action, DeviceId target,
                                  Duration negotiation) {
    bag_.remove(potato);
    ++counters_.potatoes_sent;
    GameEvent ev;
    ev.kind = EventKind::PassCompleted;
    ev.potato = potato;
    ev.action = action;
    ev.peer = target;
    log(std::move(ev));
    if (observer_) observer_->on_pass_completed(id_, potato, negotiation);
}

void PlayerDevice::potato_received(const PotatoSnapshot& snapshot, ActionId action, DeviceId from) {
    game::Potato p;
    p.id = snapshot.id;
    p.fuse_s = snapshot.fuse_s;
    p.remaining_s = snapshot.remaining_s;
    p.progress_ms = snapshot.progress_ms;
    p.pass_count = snapshot.pass_count + 1;
    bag_.activate(p);
    const game::Potato& active = *bag_.find(snapshot.id);
    ++counters_.potatoes_received;
    GameEvent ev;
    ev.kind = EventKind::PassReceived;
    ev.potato = snapshot.id;
    ev.action = action;
    ev.peer = from;
    ev.remaining_s = active.remaining_s;
    ev.progress_ms = active.progress_ms;
    ev.fuse_s = active.fuse_s;
    log(std::move(ev));
    if (observer_) observer_->on_acquired(id_, snapshot.id);
}

void PlayerDevice::message_sent(const ActionMessage& msg, bool delivered) {
    if (observer_) observer_->on_action_message(msg, delivered);
}

}  // namespace hotpotato
