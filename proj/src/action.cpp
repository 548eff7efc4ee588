#include "hotpotato/action.hpp"

#include <memory>
#include <stdexcept>

namespace hotpotato::action {

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Idle: return "idle";
        case Phase::Preparing: return "preparing";
        case Phase::Committing: return "committing";
        case Phase::Done: return "done";
        case Phase::Aborted: return "aborted";
    }
    return "?";
}

ActionProtocol::ActionProtocol(DeviceId self, Config config, Scheduler& scheduler, Radio& radio,
                               Host& host)
    : self_(self), config_(config), scheduler_(scheduler), radio_(radio), host_(host) {}

void ActionProtocol::send(ActionKind kind, ActionId action, DeviceId to,
                          std::optional<PotatoSnapshot> potato) {
    ActionMessage msg{kind, action, self_, to, potato};
    const bool delivered = radio_.unicast(self_, to, Message{msg}).has_value();
    host_.message_sent(msg, delivered);
}

void ActionProtocol::send_ack_burst(ActionId action, DeviceId to) {
    send(ActionKind::CommitAck, action, to);
    for (int k = 1; k < config_.commit_ack_copies; ++k) {
        auto slot = std::make_shared<EventHandle>();
        *slot = scheduler_.schedule_in(config_.commit_ack_spacing * k, self_, "action.ack_copy",
                                       [this, slot, action, to] {
                                           ack_timers_.erase(*slot);
                                           send(ActionKind::CommitAck, action, to);
                                       });
        ack_timers_.insert(*slot);
    }
}

void ActionProtocol::finish(Phase outcome) {
    (void)outcome;
    scheduler_.cancel(transfer_.timer);
    transfer_ = TransferState{};
}

Phase ActionProtocol::initiate_pass(PotatoId potato) {
    if (!idle()) throw std::logic_error("initiate_pass: a transfer is already in progress");
    const auto target = host_.choose_target();
    const ActionId id{self_, ++counter_};
    if (!target) {
        host_.pass_without_target(potato, id);
        return Phase::Aborted;
    }
    const PotatoSnapshot snapshot = host_.suspend_for_pass(potato, id, *target);
    transfer_.phase = Phase::Preparing;
    transfer_.action = id;
    transfer_.potato = potato;
    transfer_.target = *target;
    transfer_.retries_left = 0;
    transfer_.snapshot = snapshot;
    transfer_.started_at = scheduler_.now();
    send(ActionKind::Prepare, id, *target, snapshot);
    transfer_.timer = scheduler_.schedule_in(config_.prepare_timeout, self_, "action.prepare_timeout",
                                             [this] { on_prepare_timeout(); });
    return Phase::Preparing;
}

void ActionProtocol::on_message(const ActionMessage& msg) {
    if (msg.receiver != self_) return;
    switch (msg.kind) {
        case ActionKind::Prepare: on_prepare(msg); break;
        case ActionKind::Ready: on_ready(msg); break;
        case ActionKind::Abort: on_abort(msg); break;
        case ActionKind::Commit: on_commit(msg); break;
        case ActionKind::CommitAck: on_commit_ack(msg); break;
    }
}

void ActionProtocol::on_prepare(const ActionMessage& msg) {
    if (auto it = responses_.find(msg.action); it != responses_.end()) {
        send(it->second, msg.action, msg.sender);
        return;
    }
    const bool valid = msg.potato && msg.potato->remaining_s > 0 &&
                       msg.potato->remaining_s <= msg.potato->fuse_s &&
                       msg.action.initiator == msg.sender;
    if (!valid || !host_.accepts_potatoes() || busy()) {
        responses_[msg.action] = ActionKind::Abort;
        send(ActionKind::Abort, msg.action, msg.sender);
        return;
    }
    const ActionId id = msg.action;
    Incoming in;
    in.initiator = msg.sender;
    in.snapshot = *msg.potato;
    in.timeout = scheduler_.schedule_in(config_.pending_timeout, self_, "action.pending_timeout",
                                        [this, id] { pending_.erase(id); });
    pending_[id] = in;
    responses_[id] = ActionKind::Ready;
    send(ActionKind::Ready, id, msg.sender);
}

void ActionProtocol::on_ready(const ActionMessage& msg) {
    if (transfer_.action == msg.action && transfer_.phase == Phase::Committing) return;
    if (transfer_.action != msg.action || transfer_.phase != Phase::Preparing ||
        msg.sender != transfer_.target) {
        // Late Ready for an action we already gave up on: release the target.
        send(ActionKind::Abort, msg.action, msg.sender);
        return;
    }
    scheduler_.cancel(transfer_.timer);
    transfer_.phase = Phase::Committing;
    transfer_.retries_left = config_.commit_retries;
    send(ActionKind::Commit, transfer_.action, transfer_.target);
    transfer_.timer = scheduler_.schedule_in(config_.commit_retry_interval, self_,
                                             "action.commit_retry", [this] { on_commit_timer(); });
}

void ActionProtocol::on_abort(const ActionMessage& msg) {
    if (msg.action.initiator == self_) {
        if (transfer_.phase != Phase::Preparing || transfer_.action != msg.action) return;
        const PotatoId potato = transfer_.potato;
        const ActionId id = transfer_.action;
        finish(Phase::Aborted);
        host_.pass_failed(potato, id, FailReason::Aborted);
        return;
    }
    auto it = pending_.find(msg.action);
    if (it == pending_.end() || it->second.initiator != msg.sender) return;
    scheduler_.cancel(it->second.timeout);
    pending_.erase(it);
}

void ActionProtocol::on_commit(const ActionMessage& msg) {
    if (applied_.contains(msg.action)) {
        send_ack_burst(msg.action, msg.sender);
        return;
    }
    auto it = pending_.find(msg.action);
    if (it == pending_.end() || it->second.initiator != msg.sender) return;
    scheduler_.cancel(it->second.timeout);
    const Incoming in = it->second;
    pending_.erase(it);
    applied_.insert(msg.action);
    host_.potato_received(in.snapshot, msg.action, in.initiator);
    send_ack_burst(msg.action, in.initiator);
}

void ActionProtocol::on_commit_ack(const ActionMessage& msg) {
    if (transfer_.phase != Phase::Committing || transfer_.action != msg.action) return;
    const TransferState done = transfer_;
    finish(Phase::Done);
    host_.pass_completed(done.potato, done.action, done.target,
                         scheduler_.now() - done.started_at);
}

void ActionProtocol::on_prepare_timeout() {
    if (transfer_.phase != Phase::Preparing) return;
    const TransferState t = transfer_;
    finish(Phase::Aborted);
    send(ActionKind::Abort, t.action, t.target);
    host_.pass_failed(t.potato, t.action, FailReason::PrepareTimeout);
}

void ActionProtocol::on_commit_timer() {
    if (transfer_.phase != Phase::Committing) return;
    if (transfer_.retries_left > 0) {
        --transfer_.retries_left;
        send(ActionKind::Commit, transfer_.action, transfer_.target);
        transfer_.timer = scheduler_.schedule_in(config_.commit_retry_interval, self_,
                                                 "action.commit_retry",
                                                 [this] { on_commit_timer(); });
        return;
    }
    const TransferState t = transfer_;
    finish(Phase::Aborted);
    host_.pass_failed(t.potato, t.action, FailReason::CommitUnacked);
}

void ActionProtocol::reset() {
    transfer_ = TransferState{};
    pending_.clear();
    responses_.clear();
    applied_.clear();
    ack_timers_.clear();
}

void ActionProtocol::abandon() {
    scheduler_.cancel(transfer_.timer);
    transfer_ = TransferState{};
    for (auto& [id, in] : pending_) scheduler_.cancel(in.timeout);
    pending_.clear();
    for (const auto& h : ack_timers_) scheduler_.cancel(h);
    ack_timers_.clear();
}

}  // namespace hotpotato::action
