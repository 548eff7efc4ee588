#include <doctest.h>

#include "hotpotato/oracle.hpp"
#include "hotpotato/world.hpp"

using namespace hotpotato;

namespace {

LogEntry entry(std::int64_t t, DeviceId dev, GameEvent ev) { return LogEntry{0, at_ms(t), dev, ev}; }

GameEvent ev(EventKind k, std::optional<PotatoId> potato = std::nullopt) {
    GameEvent e;
    e.kind = k;
    e.potato = potato;
    return e;
}

game::Potato potato(PotatoId id, int remaining) {
    game::Potato p;
    p.id = id;
    p.fuse_s = 30;
    p.remaining_s = remaining;
    return p;
}

std::size_t count(const Oracle& o, const std::string& inv) {
    std::size_t n = 0;
    for (const auto& v : o.violations()) n += v.invariant == inv;
    return n;
}

}  // namespace

TEST_CASE("changed countdown across a pass is a violation") {
    Oracle o;
    GameEvent gen = ev(EventKind::Generated, 5);
    gen.fuse_s = 30;
    o.on_log(entry(0, 1, gen));
    GameEvent init = ev(EventKind::PassInitiated, 5);
    init.action = ActionId{1, 1};
    init.remaining_s = 20;
    o.on_log(entry(10000, 1, init));
    GameEvent recv = ev(EventKind::PassReceived, 5);
    recv.action = ActionId{1, 1};
    recv.remaining_s = 19;
    o.on_log(entry(10010, 2, recv));
    CHECK(count(o, "counter-preservation") == 1);
    CHECK(o.preservation_checks() == 1);
}

TEST_CASE("early explosion breaks fuse conservation") {
    Oracle o;
    GameEvent gen = ev(EventKind::Generated, 5);
    gen.fuse_s = 30;
    o.on_log(entry(0, 1, gen));
    o.on_potato_active(1, potato(5, 30), at_ms(0));
    o.on_potato_inactive(1, potato(5, 0), at_ms(25000));
    o.on_log(entry(25000, 1, ev(EventKind::Exploded, 5)));
    CHECK(count(o, "fuse-conservation") == 1);
}

TEST_CASE("on-time explosion passes") {
    Oracle o;
    GameEvent gen = ev(EventKind::Generated, 5);
    gen.fuse_s = 30;
    o.on_log(entry(0, 1, gen));
    o.on_potato_active(1, potato(5, 30), at_ms(0));
    o.on_potato_inactive(1, potato(5, 0), at_ms(30000));
    o.on_log(entry(30000, 1, ev(EventKind::Exploded, 5)));
    CHECK(o.violations().empty());
    CHECK(o.fuse_checks() == 1);
}

TEST_CASE("overlapping activation on two devices marks a duplicate") {
    Oracle o;
    o.on_potato_active(1, potato(5, 20), at_ms(0));
    o.on_potato_active(2, potato(5, 20), at_ms(10));
    CHECK(o.duplicated().count(5) == 1);
}

TEST_CASE("a live potato held by nobody is lost") {
    Oracle o;
    std::vector<const PlayerDevice*> none;
    GameEvent gen = ev(EventKind::Generated, 5);
    gen.fuse_s = 30;
    o.on_log(entry(0, 1, gen));
    o.check_ownership(none, at_ms(3000));
    o.check_ownership(none, at_ms(3100));
    CHECK(count(o, "no-lost-potato") == 1);
}

TEST_CASE("wrong offline time is a crash-recovery violation") {
    Scenario s = preset("indoor-room");
    World w(s, RunOptions{false, false, 1});
    w.start();
    w.advance_until(at_ms(1000));
    Oracle o;
    o.on_crash(w.player(1), at_ms(1000));
    GameEvent rb = ev(EventKind::Rebooted);
    rb.since_ms = 1000;
    o.on_log(entry(5000, 1, rb));
    CHECK(count(o, "crash-recovery") == 1);
}
