#include "hotpotato/backbone.hpp"

#include <algorithm>
#include <cstdlib>

namespace hotpotato::backbone {

std::string_view to_string(ReportKind kind) {
    switch (kind) {
        case ReportKind::DuplicateResolved: return "DuplicateResolved";
        case ReportKind::DoubleActive: return "DoubleActive";
        case ReportKind::UnmatchedTransfer: return "UnmatchedTransfer";
        case ReportKind::EventAfterElimination: return "EventAfterElimination";
        case ReportKind::FuseViolation: return "FuseViolation";
        case ReportKind::OutcomeMismatch: return "OutcomeMismatch";
        case ReportKind::Malformed: return "Malformed";
    }
    return "?";
}

std::size_t EngineView::count(ReportKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(reports.begin(), reports.end(), [&](const Report& r) { return r.kind == kind; }));
}

namespace {

struct Instance {
    bool active = false;
    SimTime since{};
    std::int64_t lineage_ms = 0;
    int crashes = 0;
    bool void_branch = false;
    std::optional<ActionId> suspended_for;
};

struct Track {
    int fuse_s = 0;
    std::map<DeviceId, Instance> holders;
};

struct ActionTrack {
    PotatoId potato = 0;
    DeviceId from = 0;
    DeviceId to = 0;
    int remaining_s = 0;
    int progress_ms = 0;
    std::int64_t lineage_ms = 0;
    int crashes = 0;
    bool void_branch = false;
    std::optional<DeviceId> received_by;
};

class Folder {
public:
    EngineView run(std::vector<LogEntry> entries) {
        std::stable_sort(entries.begin(), entries.end(), [](const LogEntry& a, const LogEntry& b) {
            if (a.time != b.time) return a.time < b.time;
            if (a.device != b.device) return a.device < b.device;
            return a.seq < b.seq;
        });
        for (const auto& e : entries) apply(e);
        for (const auto& e : game_over_claims_) {
            if (!view_.state.winner || e.event.peer != view_.state.winner) {
                report(ReportKind::OutcomeMismatch, e, "GameOver winner disagrees with eliminations");
            }
        }
        view_.log = std::move(entries);
        return std::move(view_);
    }

private:
    void report(ReportKind kind, const LogEntry& e, std::string detail) {
        view_.reports.push_back(Report{kind, e.time, e.device, e.event.potato, std::move(detail)});
    }

    static void close(Instance& inst, SimTime at) {
        if (!inst.active) return;
        inst.lineage_ms += to_ms(at - inst.since);
        inst.active = false;
    }

    game::PotatoRecord* record(PotatoId id) {
        auto it = view_.state.potatoes.find(id);
        return it == view_.state.potatoes.end() ? nullptr : &it->second;
    }

    bool require(const LogEntry& e, bool potato, bool action) {
        if ((potato && !e.event.potato) || (action && !e.event.action)) {
            report(ReportKind::Malformed, e, "missing potato or action field");
            return false;
        }
        return true;
    }

    void check_double_active(const LogEntry& e, PotatoId id, DeviceId self) {
        for (const auto& [dev, inst] : tracks_[id].holders) {
            if (dev != self && inst.active && !inst.void_branch) {
                report(ReportKind::DoubleActive, e,
                       "potato active on dev " + std::to_string(dev) + " and dev " +
                           std::to_string(self));
                return;
            }
        }
    }

    /// The holder takes the potato back after an uncertain or crashed pass.
    void reactivate(const LogEntry& e, PotatoId id, Instance& inst, std::optional<ActionId> action) {
        inst.active = true;
        inst.since = e.time;
        inst.suspended_for.reset();
        bool forked = false;
        if (action) {
            auto at = actions_.find(*action);
            forked = at != actions_.end() && at->second.received_by.has_value();
        }
        if (forked) {
            for (auto& [dev, other] : tracks_[id].holders) {
                if (dev != e.device) other.void_branch = true;
            }
            report(ReportKind::DuplicateResolved, e,
                   "action " + to_string(*action) + ": canonical instance on dev " +
                       std::to_string(e.device));
        } else if (!inst.void_branch) {
            check_double_active(e, id, e.device);
        }
        if (!inst.void_branch) {
            if (auto* r = record(id)) {
                r->holder = e.device;
                r->status = game::PotatoStatus::Active;
            }
        }
    }

    void apply(const LogEntry& e) {
        const GameEvent& ev = e.event;
        auto& state = view_.state;
        if (eliminated_.contains(e.device) && is_essential(ev.kind)) {
            report(ReportKind::EventAfterElimination, e,
                   std::string(to_string(ev.kind)) + " after elimination");
            return;
        }
        switch (ev.kind) {
            case EventKind::GameStarted: {
                if (state.players.empty() || e.time < state.started_at) state.started_at = e.time;
                state.players.insert(e.device);
                state.alive.insert(e.device);
                break;
            }
            case EventKind::GestureRecognized:
                break;
            case EventKind::Generated: {
                if (!require(e, true, false)) return;
                const int fuse = ev.fuse_s.value_or(0);
                Track& t = tracks_[*ev.potato];
                if (!t.holders.empty() || record(*ev.potato)) {
                    report(ReportKind::Malformed, e, "potato id generated twice");
                    return;
                }
                t.fuse_s = fuse;
                Instance inst;
                inst.active = true;
                inst.since = e.time;
                t.holders[e.device] = inst;
                state.potatoes[*ev.potato] = game::PotatoRecord{fuse, game::PotatoStatus::Active,
                                                                e.device, 0};
                break;
            }
            case EventKind::PassInitiated: {
                if (!require(e, true, true)) return;
                auto& holders = tracks_[*ev.potato].holders;
                auto it = holders.find(e.device);
                if (it == holders.end() || !it->second.active) {
                    report(ReportKind::UnmatchedTransfer, e, "pass initiated without holding the potato");
                    return;
                }
                Instance& inst = it->second;
                close(inst, e.time);
                inst.suspended_for = ev.action;
                ActionTrack a;
                a.potato = *ev.potato;
                a.from = e.device;
                a.to = ev.peer.value_or(0);
                a.remaining_s = ev.remaining_s.value_or(-1);
                a.progress_ms = ev.progress_ms.value_or(0);
                a.lineage_ms = inst.lineage_ms;
                a.crashes = inst.crashes;
                a.void_branch = inst.void_branch;
                actions_[*ev.action] = a;
                if (!inst.void_branch) {
                    if (auto* r = record(*ev.potato)) r->status = game::PotatoStatus::Suspended;
                }
                break;
            }
            case EventKind::PassReceived: {
                if (!require(e, true, true)) return;
                const PotatoId id = *ev.potato;
                auto at = actions_.find(*ev.action);
                Instance inst;
                inst.active = true;
                inst.since = e.time;
                if (at == actions_.end() || at->second.potato != id ||
                    at->second.from != ev.peer.value_or(0)) {
                    report(ReportKind::UnmatchedTransfer, e,
                           "received without a matching initiated pass");
                    const int fuse = tracks_[id].fuse_s;
                    inst.lineage_ms = static_cast<std::int64_t>(fuse - ev.remaining_s.value_or(0)) * 1000 +
                                      ev.progress_ms.value_or(0);
                } else {
                    ActionTrack& a = at->second;
                    if (a.received_by) {
                        report(ReportKind::DoubleActive, e, "pass applied twice");
                    }
                    a.received_by = e.device;
                    if (a.remaining_s != ev.remaining_s.value_or(-2) ||
                        a.progress_ms != ev.progress_ms.value_or(0)) {
                        report(ReportKind::FuseViolation, e,
                               "countdown changed across pass " + to_string(*ev.action));
                    }
                    inst.lineage_ms = a.lineage_ms;
                    inst.crashes = a.crashes;
                    inst.void_branch = a.void_branch;
                }
                if (!inst.void_branch) check_double_active(e, id, e.device);
                tracks_[id].holders[e.device] = inst;
                if (!inst.void_branch) {
                    if (auto* r = record(id)) {
                        r->holder = e.device;
                        r->status = game::PotatoStatus::Active;
                        ++r->pass_count;
                    }
                }
                break;
            }
            case EventKind::PassCompleted: {
                if (!require(e, true, true)) return;
                auto at = actions_.find(*ev.action);
                if (at == actions_.end() || !at->second.received_by ||
                    at->second.from != e.device) {
                    report(ReportKind::UnmatchedTransfer, e, "completed pass never received");
                }
                tracks_[*ev.potato].holders.erase(e.device);
                break;
            }
            case EventKind::PassFailed: {
                if (!require(e, true, true)) return;
                if (ev.reason == FailReason::NoNeighbor) break;
                auto& holders = tracks_[*ev.potato].holders;
                auto it = holders.find(e.device);
                if (it == holders.end()) {
                    report(ReportKind::UnmatchedTransfer, e, "failed pass for a potato not held");
                    return;
                }
                reactivate(e, *ev.potato, it->second, ev.action);
                break;
            }
            case EventKind::Exploded: {
                if (!require(e, true, false)) return;
                Track& t = tracks_[*ev.potato];
                auto it = t.holders.find(e.device);
                if (it == t.holders.end()) {
                    report(ReportKind::UnmatchedTransfer, e, "exploded potato was not held");
                    return;
                }
                Instance inst = it->second;
                t.holders.erase(it);
                close(inst, e.time);
                const std::int64_t fuse_ms = static_cast<std::int64_t>(t.fuse_s) * 1000;
                const std::int64_t tol = kFuseToleranceMs * (1 + inst.crashes);
                if (std::llabs(inst.lineage_ms - fuse_ms) > tol) {
                    report(ReportKind::FuseViolation, e,
                           "active " + std::to_string(inst.lineage_ms) + " ms vs fuse " +
                               std::to_string(fuse_ms) + " ms");
                }
                if (!inst.void_branch) {
                    if (auto* r = record(*ev.potato)) {
                        r->holder = e.device;
                        r->status = game::PotatoStatus::Exploded;
                    }
                }
                break;
            }
            case EventKind::PotatoDiscarded: {
                if (!require(e, true, false)) return;
                auto& holders = tracks_[*ev.potato].holders;
                auto it = holders.find(e.device);
                const bool void_branch = it != holders.end() && it->second.void_branch;
                if (it != holders.end()) holders.erase(it);
                if (!void_branch) {
                    // A pass that landed before the holder died keeps the potato in play.
                    if (auto* r = record(*ev.potato); r && r->holder == e.device) {
                        r->status = game::PotatoStatus::Removed;
                    }
                }
                break;
            }
            case EventKind::Eliminated: {
                state.eliminate(e.device, e.time);
                eliminated_.insert(e.device);
                break;
            }
            case EventKind::GameOver:
                // Checked after the fold: the last Eliminated may sort after it.
                game_over_claims_.push_back(e);
                break;
            case EventKind::Rebooted: {
                const SimTime down = ev.since_ms ? at_ms(*ev.since_ms) : e.time;
                for (auto& [id, t] : tracks_) {
                    auto it = t.holders.find(e.device);
                    if (it == t.holders.end()) continue;
                    close(it->second, down);
                    ++it->second.crashes;
                }
                break;
            }
            case EventKind::Recovered: {
                if (!require(e, true, false)) return;
                Track& t = tracks_[*ev.potato];
                auto it = t.holders.find(e.device);
                if (it == t.holders.end()) {
                    Instance inst;
                    if (t.fuse_s == 0) t.fuse_s = ev.fuse_s.value_or(0);
                    inst.lineage_ms =
                        static_cast<std::int64_t>(t.fuse_s - ev.remaining_s.value_or(0)) * 1000 +
                        ev.progress_ms.value_or(0);
                    inst.crashes = 1;
                    it = t.holders.emplace(e.device, inst).first;
                }
                reactivate(e, *ev.potato, it->second, ev.action);
                break;
            }
        }
    }

    EngineView view_;
    std::map<PotatoId, Track> tracks_;
    std::map<ActionId, ActionTrack> actions_;
    std::set<DeviceId> eliminated_;
    std::vector<LogEntry> game_over_claims_;
};

}  // namespace

EngineView fold(std::vector<LogEntry> entries) { return Folder{}.run(std::move(entries)); }

std::size_t Engine::merge(const std::vector<LogEntry>& entries) {
    ++batches_;
    std::size_t added = 0;
    for (const auto& e : entries) {
        if (merged_.emplace(std::make_pair(e.device, e.seq), e).second) {
            ++added;
        } else {
            ++duplicates_;
        }
    }
    return added;
}

void Engine::quarantine(std::string reason, SimTime at) {
    quarantined_.push_back(Report{ReportKind::Malformed, at, 0, std::nullopt, std::move(reason)});
}

std::vector<LogEntry> Engine::entries() const {
    std::vector<LogEntry> out;
    out.reserve(merged_.size());
    for (const auto& [key, e] : merged_) out.push_back(e);
    return out;
}

EngineView Engine::view() const {
    EngineView v = fold(entries());
    v.reports.insert(v.reports.begin(), quarantined_.begin(), quarantined_.end());
    return v;
}

Station::Station(DeviceId id, Position pos, Scheduler& scheduler, Radio& radio, Engine& engine,
                 echo::Config echo_config, BackboneConfig backbone, std::uint64_t seed,
                 bool colocated_engine)
    : id_(id),
      scheduler_(scheduler),
      radio_(radio),
      engine_(engine),
      backbone_(backbone),
      echo_(id, Role::Station, echo_config, scheduler, radio, seed) {
    if (colocated_engine) backbone_.latency = Duration{0};
    if (!radio_.has_node(id_)) radio_.add_node(id_, pos);
    radio_.set_handler(id_, [this](const RadioFrame& f) { on_frame(f); });
}

void Station::start(SimTime epoch) { echo_.start(epoch); }

void Station::on_frame(const RadioFrame& frame) {
    if (const auto* b = std::get_if<Beacon>(frame.payload.get())) {
        echo_.on_beacon(*b);
        return;
    }
    if (const auto* d = std::get_if<DtsMessage>(frame.payload.get())) {
        if (const auto* batch = std::get_if<DtsBatch>(d); batch && batch->station == id_) {
            ingest(*batch);
        }
    }
}

void Station::ingest(const DtsBatch& batch) {
    if (batch.entries.empty()) return;
    for (const auto& e : batch.entries) {
        if (e.device != batch.player) continue;
        if (seen_.insert({e.device, e.seq}).second) {
            queue_.push_back(e);
            ++ingested_;
        }
    }
    radio_.unicast(id_, batch.player,
                   Message{DtsMessage{DtsAck{id_, batch.player, batch.entries.back().seq}}});
    if (record_) activity_.push_back({scheduler_.now(), true, queue_.size()});
    pump();
}

void Station::pump() {
    if (in_flight_ > 0 || queue_.empty()) return;
    const std::size_t n = std::min(queue_.size(), backbone_.forward_batch);
    std::vector<LogEntry> batch(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n));
    in_flight_ = n;
    scheduler_.schedule_in(backbone_.latency, std::nullopt, "backbone.forward",
                           [this, batch = std::move(batch)] {
                               engine_.merge(batch);
                               scheduler_.schedule_in(backbone_.latency, std::nullopt, "backbone.ack",
                                                      [this] {
                                                          for (std::size_t i = 0; i < in_flight_; ++i)
                                                              queue_.pop_front();
                                                          forwarded_ += in_flight_;
                                                          in_flight_ = 0;
                                                          if (record_)
                                                              activity_.push_back({scheduler_.now(), false,
                                                                                   queue_.size()});
                                                          pump();
                                                      });
                           });
}

}  // namespace hotpotato::backbone
