#include "hotpotato/game.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hotpotato::game {

std::string_view to_string(PotatoStatus status) {
    switch (status) {
        case PotatoStatus::Active: return "active";
        case PotatoStatus::Suspended: return "suspended";
        case PotatoStatus::Exploded: return "exploded";
        case PotatoStatus::Removed: return "removed";
    }
    return "?";
}

double generation_probability(double p0, std::size_t bidirectional_players) {
    return p0 / (1.0 + static_cast<double>(bidirectional_players));
}

PotatoBag::PotatoBag(DeviceId owner, Rules rules, Scheduler& scheduler, Callbacks callbacks)
    : owner_(owner), rules_(rules), scheduler_(scheduler), cb_(std::move(callbacks)) {}

const Potato* PotatoBag::find(PotatoId id) const {
    auto it = potatoes_.find(id);
    return it == potatoes_.end() ? nullptr : &it->second;
}

bool PotatoBag::holds_active() const {
    return std::any_of(potatoes_.begin(), potatoes_.end(),
                       [](const auto& kv) { return kv.second.status == PotatoStatus::Active; });
}

std::optional<PotatoId> PotatoBag::most_urgent() const {
    std::optional<PotatoId> best;
    int best_remaining = 0;
    for (const auto& [id, p] : potatoes_) {
        if (p.status != PotatoStatus::Active) continue;
        if (!best || p.remaining_s < best_remaining) {
            best = id;
            best_remaining = p.remaining_s;
        }
    }
    return best;
}

void PotatoBag::settle_progress(Potato& p) {
    const auto now = scheduler_.now();
    p.progress_ms += static_cast<int>(to_ms(now - p.active_since));
    // A tick due at this very millisecond may still be queued behind us;
    // keep the fraction strictly below one tick.
    p.progress_ms = std::min(p.progress_ms, static_cast<int>(rules_.tick.count()) - 1);
    p.active_since = now;
}

void PotatoBag::arm(Potato& p) {
    const PotatoId id = p.id;
    const auto due = scheduler_.now() + (rules_.tick - Duration{p.progress_ms});
    timers_[id] = scheduler_.schedule(due, owner_, "potato.tick", [this, id] { tick(id); });
}

void PotatoBag::disarm(PotatoId id) {
    auto it = timers_.find(id);
    if (it == timers_.end()) return;
    scheduler_.cancel(it->second);
    timers_.erase(it);
}

void PotatoBag::activate(Potato potato) {
    const auto now = scheduler_.now();
    potato.holder = owner_;
    potato.status = PotatoStatus::Active;
    potato.active_since = now;
    potato.recorded_at = now;
    potato.action.reset();
    // Two copies of a duplicated potato met here: the incoming one replaces ours.
    if (auto old = potatoes_.find(potato.id); old != potatoes_.end()) {
        disarm(potato.id);
        if (cb_.deactivated) cb_.deactivated(old->second);
    }
    auto [it, inserted] = potatoes_.insert_or_assign(potato.id, potato);
    if (!frozen_) arm(it->second);
    if (cb_.activated) cb_.activated(it->second);
    if (cb_.changed) cb_.changed();
}

void PotatoBag::tick(PotatoId id) {
    auto it = potatoes_.find(id);
    if (it == potatoes_.end() || it->second.status != PotatoStatus::Active || frozen_) return;
    timers_.erase(id);
    Potato& p = it->second;
    const auto now = scheduler_.now();
    p.remaining_s -= 1;
    p.progress_ms = 0;
    p.active_since = now;
    p.recorded_at = now;
    if (p.remaining_s <= 0) {
        p.remaining_s = 0;
        p.status = PotatoStatus::Exploded;
        const Potato snapshot = p;
        potatoes_.erase(it);
        if (cb_.deactivated) cb_.deactivated(snapshot);
        if (cb_.changed) cb_.changed();
        if (cb_.exploded) cb_.exploded(snapshot);
        return;
    }
    arm(p);
    if (cb_.changed) cb_.changed();
}

PotatoSnapshot PotatoBag::suspend(PotatoId id, ActionId action) {
    auto it = potatoes_.find(id);
    if (it == potatoes_.end() || it->second.status != PotatoStatus::Active) {
        throw std::logic_error("suspend: potato " + std::to_string(id) + " is not active here");
    }
    Potato& p = it->second;
    if (!frozen_) settle_progress(p);
    disarm(id);
    p.status = PotatoStatus::Suspended;
    p.action = action;
    p.recorded_at = scheduler_.now();
    if (cb_.deactivated) cb_.deactivated(p);
    if (cb_.changed) cb_.changed();
    return p.snapshot();
}

void PotatoBag::resume(PotatoId id) {
    auto it = potatoes_.find(id);
    if (it == potatoes_.end() || it->second.status != PotatoStatus::Suspended) {
        throw std::logic_error("resume: potato " + std::to_string(id) + " is not suspended here");
    }
    Potato& p = it->second;
    p.status = PotatoStatus::Active;
    p.action.reset();
    p.active_since = scheduler_.now();
    p.recorded_at = p.active_since;
    if (!frozen_) arm(p);
    if (cb_.activated) cb_.activated(p);
    if (cb_.changed) cb_.changed();
}

std::optional<Potato> PotatoBag::remove(PotatoId id) {
    auto it = potatoes_.find(id);
    if (it == potatoes_.end()) return std::nullopt;
    Potato p = it->second;
    const bool was_active = p.status == PotatoStatus::Active;
    if (was_active && !frozen_) settle_progress(p);
    disarm(id);
    potatoes_.erase(it);
    p.status = PotatoStatus::Removed;
    if (was_active && cb_.deactivated) cb_.deactivated(p);
    if (cb_.changed) cb_.changed();
    return p;
}

void PotatoBag::freeze() {
    if (frozen_) return;
    for (auto& [id, p] : potatoes_) {
        if (p.status != PotatoStatus::Active) continue;
        settle_progress(p);
        disarm(id);
        if (cb_.deactivated) cb_.deactivated(p);
    }
    frozen_ = true;
}

void PotatoBag::wipe() {
    for (auto& [id, p] : potatoes_) {
        if (p.status == PotatoStatus::Active && !frozen_) {
            settle_progress(p);
            if (cb_.deactivated) cb_.deactivated(p);
        }
    }
    potatoes_.clear();
    timers_.clear();
    frozen_ = false;
}

void GameState::start(const std::set<DeviceId>& ids, SimTime at) {
    players = ids;
    alive = ids;
    eliminated.clear();
    potatoes.clear();
    started_at = at;
    ended_at.reset();
    winner.reset();
}

bool GameState::eliminate(DeviceId player, SimTime at) {
    if (over() || !alive.erase(player)) return false;
    // Canonical order, so simultaneous eliminations compare equal however they were observed.
    const auto pos = std::find_if(eliminated.begin(), eliminated.end(), [&](const Elimination& e) {
        return e.at > at || (e.at == at && e.player > player);
    });
    eliminated.insert(pos, {player, at});
    if (alive.size() == 1) {
        ended_at = at;
        winner = *alive.begin();
        return true;
    }
    if (alive.empty()) ended_at = at;
    return false;
}

}  // namespace hotpotato::game
