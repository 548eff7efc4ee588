#include "hotpotato/oracle.hpp"

#include <cstdlib>

#include "hotpotato/backbone.hpp"
#include "hotpotato/device.hpp"

namespace hotpotato {

void Oracle::on_potato_active(DeviceId device, const game::Potato& potato, SimTime now) {
    // Copies can die out before the next quiescent instant, so look here too.
    for (auto it = instances_.lower_bound({potato.id, 0});
         it != instances_.end() && it->first.first == potato.id; ++it) {
        if (it->first.second != device && it->second.since) duplicated_.insert(potato.id);
    }
    instance(potato.id, device).since = now;
    if (auto it = state_.potatoes.find(potato.id); it != state_.potatoes.end()) {
        it->second.holder = device;
        it->second.status = game::PotatoStatus::Active;
        it->second.pass_count = potato.pass_count;
    }
}

void Oracle::on_potato_inactive(DeviceId device, const game::Potato& potato, SimTime now) {
    Instance& inst = instance(potato.id, device);
    if (inst.since) {
        inst.active_ms += to_ms(now - *inst.since);
        inst.since.reset();
    }
    if (potato.status == game::PotatoStatus::Suspended) {
        if (auto it = state_.potatoes.find(potato.id); it != state_.potatoes.end()) {
            it->second.status = game::PotatoStatus::Suspended;
        }
    }
}

void Oracle::on_crash(const PlayerDevice& device, SimTime now) {
    // The wiped bag reports no deactivations.
    for (auto& [key, inst] : instances_) {
        if (key.second != device.id() || !inst.since) continue;
        inst.active_ms += to_ms(now - *inst.since);
        inst.since.reset();
    }
    if (!device.online()) {
        for (auto it = recoveries_.rbegin(); it != recoveries_.rend(); ++it) {
            if (it->device == device.id() && !it->reboot_at) {
                it->crash_at = now;
                break;
            }
        }
        return;
    }
    RecoveryRecord r;
    r.device = device.id();
    r.crash_at = now;
    for (const auto& [id, p] : device.bag().all()) {
        if (p.status == game::PotatoStatus::Active || p.status == game::PotatoStatus::Suspended) {
            r.held_at_crash[id] = p.remaining_s;
        }
    }
    recoveries_.push_back(std::move(r));
}

void Oracle::on_log(const LogEntry& e) {
    const GameEvent& ev = e.event;
    const DeviceId dev = e.device;
    switch (ev.kind) {
        case EventKind::GameStarted:
            if (state_.players.empty() || e.time < state_.started_at) state_.started_at = e.time;
            state_.players.insert(dev);
            state_.alive.insert(dev);
            break;
        case EventKind::Generated:
            live_.insert(*ev.potato);
            fuse_[*ev.potato] = *ev.fuse_s;
            state_.potatoes[*ev.potato] =
                game::PotatoRecord{*ev.fuse_s, game::PotatoStatus::Active, dev, 0};
            break;
        case EventKind::PassInitiated: {
            const Instance& inst = instance(*ev.potato, dev);
            suspensions_[*ev.action] = Suspension{*ev.remaining_s, ev.progress_ms.value_or(0),
                                                  inst.base_ms + inst.active_ms, inst.crashes};
            break;
        }
        case EventKind::PassReceived: {
            ++preservation_checks_;
            // Also covers a pass whose initiator was eliminated mid-commit.
            live_.insert(*ev.potato);
            auto it = suspensions_.find(*ev.action);
            Instance& inst = instance(*ev.potato, dev);
            if (it == suspensions_.end()) {
                violations_.push_back({"counter-preservation", e.time, {dev},
                                       "potato " + std::to_string(*ev.potato) +
                                           " received without a suspension"});
                break;
            }
            Suspension& s = it->second;
            s.received = true;
            if (s.remaining_s != *ev.remaining_s || s.progress_ms != ev.progress_ms.value_or(0)) {
                violations_.push_back(
                    {"counter-preservation", e.time, {ev.action->initiator, dev},
                     "potato " + std::to_string(*ev.potato) + ": suspended at " +
                         std::to_string(s.remaining_s) + "s+" + std::to_string(s.progress_ms) +
                         "ms, activated at " + std::to_string(*ev.remaining_s) + "s+" +
                         std::to_string(ev.progress_ms.value_or(0)) + "ms"});
            }
            inst.base_ms = s.lineage_ms;
            inst.active_ms = 0;
            inst.crashes = s.crashes;
            break;
        }
        case EventKind::PassCompleted:
            instances_.erase({*ev.potato, dev});
            break;
        case EventKind::Exploded: {
            ++fuse_checks_;
            const Instance inst = instance(*ev.potato, dev);
            instances_.erase({*ev.potato, dev});
            const std::int64_t total = inst.base_ms + inst.active_ms;
            const std::int64_t fuse_ms = static_cast<std::int64_t>(fuse_[*ev.potato]) * 1000;
            lifetimes_.emplace_back(*ev.potato, total);
            if (std::llabs(total - fuse_ms) > backbone::kFuseToleranceMs * (1 + inst.crashes)) {
                violations_.push_back({"fuse-conservation", e.time, {dev},
                                       "potato " + std::to_string(*ev.potato) + " was active " +
                                           std::to_string(total) + " ms for a " +
                                           std::to_string(fuse_ms) + " ms fuse"});
            }
            live_.erase(*ev.potato);
            if (auto it = state_.potatoes.find(*ev.potato); it != state_.potatoes.end()) {
                it->second.holder = dev;
                it->second.status = game::PotatoStatus::Exploded;
            }
            break;
        }
        case EventKind::PotatoDiscarded:
            instances_.erase({*ev.potato, dev});
            if (auto it = state_.potatoes.find(*ev.potato);
                it != state_.potatoes.end() && it->second.holder == dev) {
                it->second.status = game::PotatoStatus::Removed;
                live_.erase(*ev.potato);
            }
            break;
        case EventKind::Eliminated:
            state_.eliminate(dev, e.time);
            break;
        case EventKind::Rebooted: {
            for (auto& [key, inst] : instances_) {
                if (key.second == dev) ++inst.crashes;
            }
            for (auto it = recoveries_.rbegin(); it != recoveries_.rend(); ++it) {
                if (it->device != dev || it->reboot_at) continue;
                it->reboot_at = e.time;
                if (e.time - it->crash_at != reboot_delay_) {
                    violations_.push_back({"crash-recovery", e.time, {dev},
                                           "offline for " + std::to_string(to_ms(e.time - it->crash_at)) +
                                               " ms"});
                }
                break;
            }
            break;
        }
        case EventKind::Recovered: {
            if (ev.action) {
                if (auto it = suspensions_.find(*ev.action); it != suspensions_.end() && it->second.received) {
                    duplicated_.insert(*ev.potato);
                }
            }
            for (auto it = recoveries_.rbegin(); it != recoveries_.rend(); ++it) {
                if (it->device != dev) continue;
                it->restored[*ev.potato] = *ev.remaining_s;
                auto held = it->held_at_crash.find(*ev.potato);
                if (held == it->held_at_crash.end() || held->second != *ev.remaining_s) {
                    violations_.push_back({"crash-recovery", e.time, {dev},
                                           "potato " + std::to_string(*ev.potato) +
                                               " restored with " + std::to_string(*ev.remaining_s) +
                                               "s, held " +
                                               (held == it->held_at_crash.end()
                                                    ? std::string("nothing")
                                                    : std::to_string(held->second) + "s") +
                                               " at the crash"});
                }
                break;
            }
            break;
        }
        case EventKind::PassFailed:
            // Taking back a potato the target already holds forks it.
            if (ev.action) {
                if (auto it = suspensions_.find(*ev.action); it != suspensions_.end() && it->second.received) {
                    duplicated_.insert(*ev.potato);
                }
            }
            break;
        case EventKind::GestureRecognized:
        case EventKind::GameOver:
            break;
    }
}

void Oracle::check_ownership(const std::vector<const PlayerDevice*>& devices, SimTime now) {
    ++ownership_checks_;
    std::map<PotatoId, std::vector<DeviceId>> holders;
    for (const PlayerDevice* d : devices) {
        for (PotatoId id : d->held_potatoes(true)) holders[id].push_back(d->id());
    }
    for (PotatoId id : live_) {
        auto it = holders.find(id);
        const std::size_t n = it == holders.end() ? 0 : it->second.size();
        if (n == 0) {
            if (lost_.insert(id).second) {
                violations_.push_back({"no-lost-potato", now, {},
                                       "potato " + std::to_string(id) + " is held by no device"});
            }
        } else if (n > 1) {
            duplicated_.insert(id);
        }
    }
}

}  // namespace hotpotato
