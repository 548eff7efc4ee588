#include "hotpotato/world.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hotpotato/gesture.hpp"
#include "hotpotato/persistence.hpp"

namespace hotpotato {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string join_ids(const std::vector<DeviceId>& ids) {
    std::string out;
    for (DeviceId id : ids) {
        if (!out.empty()) out += ',';
        out += std::to_string(id);
    }
    return out.empty() ? "-" : out;
}

}  // namespace

World::World(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      radio_(scheduler_, scenario_.field, scenario_.radio, scenario_.seed) {
    validate(scenario_);
    scheduler_.enable_trace(options_.trace);
    oracle_.set_reboot_delay(DeviceConfig{}.reboot_delay);

    const echo::Config echo_cfg;
    for (std::size_t k = 0; k < scenario_.stations.size(); ++k) {
        const auto id = static_cast<DeviceId>(kFirstStationId + k);
        stations_.push_back(std::make_unique<backbone::Station>(
            id, scenario_.stations[k], scheduler_, radio_, engine_, echo_cfg,
            backbone::BackboneConfig{}, scenario_.seed, k == 0));
    }

    DeviceConfig cfg;
    cfg.rules = scenario_.rules;
    const auto strategies = scenario_.strategies();
    for (int i = 1; i <= scenario_.players; ++i) {
        const auto id = static_cast<DeviceId>(i);
        RngStream place(scenario_.seed, "placement", id);
        const Position pos{place.uniform(0.0, scenario_.field.width),
                           place.uniform(0.0, scenario_.field.height)};
        double tx = 1.0;
        if (auto it = scenario_.tx_factor.find(id); it != scenario_.tx_factor.end()) {
            tx = it->second;
        } else if (scenario_.tx_factor_spread > 0.0) {
            RngStream txr(scenario_.seed, "txpower", id);
            tx = 1.0 + txr.uniform(-scenario_.tx_factor_spread, scenario_.tx_factor_spread);
        }
        players_.emplace(id, std::make_unique<PlayerDevice>(id, pos, tx, cfg, scheduler_, radio_,
                                                            scenario_.seed, this));
        agents_.emplace(id, Agent{strategies[static_cast<std::size_t>(i - 1)], pos,
                                  RngStream(scenario_.seed, "mobility", id),
                                  RngStream(scenario_.seed, "gesture", id), {}, Duration{0}});
    }

    if (options_.artifacts) {
        auto record = [this](const Beacon& b) { echo::encode_into(b, beacons_); };
        for (auto& s : stations_) s->echo().set_beacon_observer(record);
        for (auto& [id, p] : players_) p->echo().set_beacon_observer(record);
    }
}

World::~World() = default;

std::vector<PlayerDevice*> World::players() {
    std::vector<PlayerDevice*> out;
    for (auto& [id, p] : players_) out.push_back(p.get());
    return out;
}

PlayerDevice& World::player(DeviceId id) { return *players_.at(id); }

void World::start() {
    if (started_) return;
    started_ = true;
    const SimTime t0 = scheduler_.now();
    for (auto& s : stations_) s->start(t0);
    for (auto& [id, p] : players_) p->start_game(t0, options_.game_id);
    scheduler_.schedule_in(kMobilityStep, std::nullopt, "world.mobility", [this] { mobility_tick(); });
    sample();
    for (const CrashSpec& c : scenario_.crashes) {
        scheduler_.schedule(c.at, std::nullopt, "world.crash", [this, c] { crash_event(c); });
    }
    scheduler_.schedule(t0 + scenario_.duration_cap, std::nullopt, "world.cap", [this] {
        if (game_ended_) return;
        capped_ = true;
        end_game();
    });
}

void World::step_once() {
    scheduler_.step();
    if (dirty_ && action_quiescent()) {
        dirty_ = false;
        std::vector<const PlayerDevice*> devs;
        for (auto& [id, p] : players_) devs.push_back(p.get());
        oracle_.check_ownership(devs, scheduler_.now());
    }
}

void World::advance_until(SimTime t) {
    start();
    while (!finished_) {
        const auto next = scheduler_.next_time();
        if (!next || *next > t) break;
        step_once();
    }
}

RunResult World::run() {
    start();
    while (!finished_) {
        if (!scheduler_.next_time()) {
            // Nothing left to happen: treat as the end of the upload phase.
            if (!game_ended_) end_game();
            finish();
            break;
        }
        step_once();
    }
    return result_;
}

bool World::action_quiescent() const {
    if (radio_.in_flight(MessageFamily::Action) != 0) return false;
    for (const auto& [id, p] : players_) {
        if (!p->action().quiescent()) return false;
    }
    return true;
}

void World::on_log(const LogEntry& entry) { oracle_.on_log(entry); }

void World::on_potato_active(DeviceId device, const game::Potato& potato) {
    dirty_ = true;
    oracle_.on_potato_active(device, potato, scheduler_.now());
}

void World::on_potato_inactive(DeviceId device, const game::Potato& potato) {
    dirty_ = true;
    oracle_.on_potato_inactive(device, potato, scheduler_.now());
}

void World::on_acquired(DeviceId device, PotatoId) {
    schedule_gesture(device, scenario_.agent.reaction_delay);
}

void World::on_pass_completed(DeviceId device, PotatoId, Duration negotiation) {
    oracle_.on_negotiation(negotiation);
    if (players_.at(device)->bag().holds_active()) {
        schedule_gesture(device, scenario_.agent.decision_period);
    }
}

void World::on_eliminated(DeviceId) {
    if (!game_ended_ && oracle_.state().over()) {
        scheduler_.schedule_in(Duration{0}, std::nullopt, "world.game_over", [this] {
            if (!game_ended_) end_game();
        });
    }
}

void World::on_action_message(const ActionMessage& msg, bool delivered) {
    dirty_ = true;
    if (msg.kind == ActionKind::Commit) oracle_.on_commit_sent(msg.action);
    if (!options_.artifacts) return;
    actions_log_ += std::to_string(to_ms(scheduler_.now()));
    actions_log_ += '\t';
    actions_log_ += to_string(msg.kind);
    actions_log_ += '\t';
    actions_log_ += to_string(msg.action);
    actions_log_ += '\t';
    actions_log_ += std::to_string(msg.sender) + "->" + std::to_string(msg.receiver);
    actions_log_ += delivered ? "\tdelivered" : "\tlost";
    if (msg.potato) {
        actions_log_ += "\tpotato=" + std::to_string(msg.potato->id) +
                        " remaining=" + std::to_string(msg.potato->remaining_s) +
                        " progress=" + std::to_string(msg.potato->progress_ms);
    }
    actions_log_ += '\n';
}

void World::schedule_gesture(DeviceId id, Duration delay) {
    Agent& a = agents_.at(id);
    if (scheduler_.pending(a.gesture)) return;
    a.gesture = scheduler_.schedule_in(delay, id, "agent.gesture",
                                       [this, id] { gesture_event(id); });
}

void World::gesture_event(DeviceId id) {
    PlayerDevice& d = *players_.at(id);
    if (game_ended_ || !d.online() || !d.alive() || !d.bag().holds_active()) return;
    Agent& a = agents_.at(id);
    const gesture::Label label =
        a.gesture_rng.bernoulli(0.5) ? gesture::Label::FlickRight : gesture::Label::FlickLeft;
    const gesture::AccelTrace trace =
        gesture::synthesize(label, scenario_.agent.gesture_noise, a.gesture_rng);
    switch (d.perform_gesture(trace)) {
        case GestureOutcome::Unrecognized:
        case GestureOutcome::Busy:
            schedule_gesture(id, scenario_.agent.decision_period);
            break;
        case GestureOutcome::Failed:
            schedule_gesture(id, scenario_.agent.reaction_delay);
            break;
        case GestureOutcome::Ignored:
        case GestureOutcome::NoPotato:
        case GestureOutcome::Started:
            break;
    }
}

void World::mobility_tick() {
    scheduler_.schedule_in(kMobilityStep, std::nullopt, "world.mobility", [this] { mobility_tick(); });
    const SimTime now = scheduler_.now();
    std::vector<Position> alive_positions;
    for (const auto& [id, p] : players_) {
        if (p->alive()) alive_positions.push_back(radio_.position(id));
    }
    for (auto& [id, p] : players_) {
        if (!p->online()) continue;
        Agent& a = agents_.at(id);
        const Position here = radio_.position(id);
        if (game_ended_) {
            // Everyone heads for a Station to upload.
            std::vector<Position> targets(scenario_.stations.begin(), scenario_.stations.end());
            if (targets.empty()) continue;
            const Position goal = mobility::nearest(here, targets);
            radio_.set_position(id, mobility::step_toward(here, goal, scenario_.agent.speed,
                                                          kMobilityStep, scenario_.field));
            continue;
        }
        if (!p->alive()) continue;
        a.since_decision += kMobilityStep;
        if (a.since_decision >= scenario_.agent.decision_period) {
            a.since_decision = Duration{0};
            mobility::View view;
            view.self = here;
            view.holding = p->bag().holds_active();
            view.field = scenario_.field;
            bool self_skipped = false;
            for (const Position& q : alive_positions) {
                if (!self_skipped && q == here) {
                    self_skipped = true;
                    continue;
                }
                view.alive_others.push_back(q);
            }
            for (DeviceId n : p->echo().table().bidirectional(now, Role::Player)) {
                view.neighbors.push_back(radio_.position(n));
            }
            a.waypoint = mobility::choose_waypoint(a.strategy, view, a.waypoint, a.move_rng);
        }
        radio_.set_position(id, mobility::step_toward(here, a.waypoint, scenario_.agent.speed,
                                                      kMobilityStep, scenario_.field));
    }
}

void World::write_sample(const PlayerDevice& d) {
    const DeviceCounters& c = d.counters();
    std::string& out = csv_[d.id()];
    if (out.empty()) {
        out += kMetricsHeader;
        out += '\n';
    }
    out += std::to_string(to_ms(scheduler_.now())) + ',' + std::to_string(d.neighbor_count()) + ',' +
           std::to_string(c.potatoes_received) + ',' + std::to_string(c.potatoes_sent) + ',' +
           std::to_string(c.potatoes_generated) + ',' + std::to_string(c.gestures_recognized) + ',' +
           std::to_string(c.failed_actions) + '\n';
}

void World::sample() {
    if (game_ended_) return;
    last_sample_ = scheduler_.now();
    if (options_.artifacts) {
        for (const auto& [id, p] : players_) write_sample(*p);
    }
    scheduler_.schedule_in(scenario_.sample_period, std::nullopt, "world.sample", [this] { sample(); });
}

void World::crash_event(const CrashSpec& spec) {
    if (game_ended_) return;
    std::optional<DeviceId> victim = spec.device;
    if (!victim) {
        for (const auto& [id, p] : players_) {
            if (p->online() && p->bag().holds_active()) {
                victim = id;
                break;
            }
        }
        if (!victim) {
            // Nobody holds a potato yet; try again shortly.
            scheduler_.schedule_in(kMobilityStep, std::nullopt, "world.crash",
                                   [this, spec] { crash_event(spec); });
            return;
        }
    }
    auto it = players_.find(*victim);
    if (it == players_.end() || it->second->permanently_failed()) return;
    PlayerDevice& d = *it->second;
    ++crashes_;
    dirty_ = true;
    oracle_.on_crash(d, scheduler_.now());
    if (spec.permanent) {
        d.fail_permanently();
    } else {
        d.crash();
    }
}

void World::end_game() {
    game_ended_ = true;
    game_end_ = scheduler_.now();
    const DeviceId winner = oracle_.state().winner.value_or(0);
    for (auto& [id, p] : players_) p->end_game(capped_ ? DeviceId{0} : winner);
    if (options_.artifacts && last_sample_ != game_end_) {
        for (const auto& [id, p] : players_) write_sample(*p);
    }
    // Devices that will never come back are read out by hand.
    for (auto& [id, p] : players_) {
        if (p->permanently_failed() && extracted_.insert(id).second) {
            engine_.merge(p->storage().extract());
        }
    }
    scheduler_.schedule_in(kDrainCheckPeriod, std::nullopt, "world.drain", [this] { drain_check(); });
}

bool World::drained() const {
    if (!action_quiescent()) return false;
    for (const auto& [id, p] : players_) {
        if (p->permanently_failed()) continue;
        if (!p->online() || p->dts().backlog() != 0 || p->dts().awaiting_ack()) return false;
    }
    for (const auto& s : stations_) {
        if (!s->idle()) return false;
    }
    return radio_.in_flight(MessageFamily::Dts) == 0;
}

void World::drain_check() {
    if (finished_) return;
    if (drained()) {
        drained_ = true;
        finish();
        return;
    }
    if (scheduler_.now() - game_end_ >= scenario_.post_game_cap) {
        finish();
        return;
    }
    scheduler_.schedule_in(kDrainCheckPeriod, std::nullopt, "world.drain", [this] { drain_check(); });
}

void World::finish() {
    if (finished_) return;
    finished_ = true;
    finish_at_ = scheduler_.now();
    std::vector<const PlayerDevice*> devs;
    for (auto& [id, p] : players_) devs.push_back(p.get());
    oracle_.check_ownership(devs, finish_at_);
    final_checks();
    if (options_.artifacts) build_artifacts();
}

void World::final_checks() {
    RunResult& r = result_;
    r.seed = scenario_.seed;
    r.capped = capped_;
    if (!capped_) r.winner = oracle_.state().winner;
    r.duration_ms = to_ms(game_end_ - oracle_.state().started_at);
    r.finished_ms = to_ms(finish_at_);
    r.drained = drained_;
    r.crashes = crashes_;
    r.negotiation_ms = oracle_.negotiation_ms();
    r.violations = oracle_.violations();
    for (const auto& [id, p] : players_) {
        DeviceReport d;
        d.id = id;
        d.counters = p->counters();
        d.permanently_failed = p->permanently_failed();
        d.log_entries = p->storage().entries().size();
        for (const auto& e : oracle_.state().eliminated) {
            if (e.player == id) d.eliminated_at = e.at;
        }
        r.transfers += d.counters.potatoes_sent;
        r.devices.push_back(d);
    }

    const backbone::EngineView view = engine_.view();
    std::set<PotatoId> resolved;
    for (const backbone::Report& rep : view.reports) {
        if (rep.kind == backbone::ReportKind::DuplicateResolved) {
            if (rep.potato) resolved.insert(*rep.potato);
            continue;
        }
        r.violations.push_back({"engine-rule", rep.at, {rep.device},
                                std::string(to_string(rep.kind)) + ": " + rep.detail});
    }
    r.duplicates = oracle_.duplicated().size();
    r.duplicates_resolved = view.count(backbone::ReportKind::DuplicateResolved);

    if (!drained_) {
        r.violations.push_back({"dts-completeness", finish_at_, {},
                                "upload phase did not drain within the post-game cap"});
    } else {
        std::vector<LogEntry> expected;
        for (const auto& [id, p] : players_) {
            const auto log = p->storage().extract();
            expected.insert(expected.end(), log.begin(), log.end());
        }
        const std::vector<LogEntry> merged = engine_.entries();
        if (merged != expected) {
            r.violations.push_back({"dts-completeness", finish_at_, {},
                                    "engine holds " + std::to_string(merged.size()) +
                                        " entries, devices logged " +
                                        std::to_string(expected.size())});
        }
        for (PotatoId id : oracle_.duplicated()) {
            if (!resolved.contains(id)) {
                r.violations.push_back({"duplicate-resolution", finish_at_, {},
                                        "potato " + std::to_string(id) +
                                            " was duplicated without a DuplicateResolved report"});
            }
        }
        if (crashes_ == 0 && oracle_.duplicated().empty() && !(view.state == oracle_.state())) {
            r.violations.push_back({"engine-convergence", finish_at_, {},
                                    "engine-derived game state differs from the oracle's"});
        }
    }
}

void World::build_artifacts() {
    auto& files = result_.artifacts;
    for (const auto& [id, p] : players_) {
        files["device_" + std::to_string(id) + ".csv"] = csv_[id];
        std::ostringstream ev;
        persistence::write_log(ev, p->storage().extract());
        files["events_" + std::to_string(id) + ".log"] = ev.str();
    }
    {
        const backbone::EngineView view = engine_.view();
        std::ostringstream out;
        out << "# winner=" << (result_.winner ? std::to_string(*result_.winner) : "none") << '\n';
        out << "# duration_ms=" << result_.duration_ms << '\n';
        for (const auto& d : result_.devices) {
            out << "# device=" << d.id << " received=" << d.counters.potatoes_received
                << " sent=" << d.counters.potatoes_sent
                << " generated=" << d.counters.potatoes_generated
                << " gestures=" << d.counters.gestures_recognized
                << " failed=" << d.counters.failed_actions << '\n';
        }
        for (const auto& rep : view.reports) {
            out << "# report=" << to_string(rep.kind) << " t=" << to_ms(rep.at)
                << " dev=" << rep.device << ' ' << rep.detail << '\n';
        }
        persistence::write_log(out, view.log);
        files["engine.log"] = out.str();
    }
    files["actions.log"] = actions_log_;
    files["beacons.bin"] = std::string(beacons_.begin(), beacons_.end());
    if (options_.trace) {
        std::string t;
        for (const auto& e : scheduler_.trace()) {
            t += std::to_string(to_ms(e.fire_at)) + '\t' + std::to_string(e.seq) + '\t' +
                 (e.target ? std::to_string(*e.target) : std::string("-")) + '\t' +
                 std::string(e.label) + '\n';
        }
        files["trace.log"] = std::move(t);
    }
    files["summary.txt"] = summary_text(scenario_, result_);
}

RunResult run_scenario(const Scenario& scenario, RunOptions options) {
    World w(scenario, options);
    return w.run();
}

std::string summary_text(const Scenario& scenario, const RunResult& r) {
    std::ostringstream out;
    out << "seed=" << r.seed << '\n';
    out << "preset=" << scenario.preset << '\n';
    out << "players=" << scenario.players << '\n';
    out << "winner=" << (r.winner ? std::to_string(*r.winner) : "none") << '\n';
    out << "duration_ms=" << r.duration_ms << '\n';
    out << "capped=" << (r.capped ? "yes" : "no") << '\n';
    out << "finished_ms=" << r.finished_ms << '\n';
    out << "drained=" << (r.drained ? "yes" : "no") << '\n';
    out << "transfers=" << r.transfers << '\n';
    out << "crashes=" << r.crashes << '\n';
    out << "duplicates=" << r.duplicates << '\n';
    out << "duplicates_resolved=" << r.duplicates_resolved << '\n';
    if (!r.negotiation_ms.empty()) {
        auto sorted = r.negotiation_ms;
        std::sort(sorted.begin(), sorted.end());
        out << "negotiation_median_ms=" << sorted[sorted.size() / 2] << '\n';
        out << "negotiation_max_ms=" << sorted.back() << '\n';
    }
    for (const auto& d : r.devices) {
        const std::string k = "device." + std::to_string(d.id) + '.';
        out << k << "potatoes_received=" << d.counters.potatoes_received << '\n';
        out << k << "potatoes_sent=" << d.counters.potatoes_sent << '\n';
        out << k << "potatoes_generated=" << d.counters.potatoes_generated << '\n';
        out << k << "gestures_recognized=" << d.counters.gestures_recognized << '\n';
        out << k << "failed_actions=" << d.counters.failed_actions << '\n';
        out << k << "eliminated_ms="
            << (d.eliminated_at ? std::to_string(to_ms(*d.eliminated_at)) : "-") << '\n';
    }
    static const char* kInvariants[] = {"no-lost-potato",   "counter-preservation",
                                        "fuse-conservation", "crash-recovery",
                                        "engine-rule",       "engine-convergence",
                                        "dts-completeness",  "duplicate-resolution"};
    for (const char* inv : kInvariants) {
        const bool failed = std::any_of(r.violations.begin(), r.violations.end(),
                                        [&](const Violation& v) { return v.invariant == inv; });
        out << "verdict." << inv << '=' << (failed ? "fail" : "pass") << '\n';
    }
    out << "violations=" << r.violations.size() << '\n';
    for (const auto& v : r.violations) {
        out << "violation=" << v.invariant << " t=" << to_ms(v.at) << " devices=" << join_ids(v.devices)
            << ' ' << v.detail << '\n';
    }
    out << "tx_factor_spread=" << fmt_double(scenario.tx_factor_spread) << '\n';
    out << "note=cpu and memory usage are not modeled\n";
    return out.str();
}

}  // namespace hotpotato
