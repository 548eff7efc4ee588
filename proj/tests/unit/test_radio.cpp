#include <doctest.h>

#include <vector>

#include "hotpotato/radio.hpp"

using namespace hotpotato;

namespace {

struct Net {
    Scheduler sched;
    Radio radio;
    std::vector<std::pair<DeviceId, SimTime>> got;

    explicit Net(LinkModel m, std::uint64_t seed = 1, Field f = {10, 15})
        : radio(sched, f, m, seed) {}

    void add(DeviceId id, Position p, double tx = 1.0) {
        radio.add_node(id, p, tx);
        radio.set_handler(id, [this, id](const RadioFrame&) { got.emplace_back(id, sched.now()); });
    }
};

Message beacon(DeviceId from) { return Beacon{from, Role::Player, {}, {}}; }

LinkModel lossless() {
    LinkModel m;
    m.p_loss = 0.0;
    return m;
}

}  // namespace

TEST_CASE("in-range lossless pair delivers both ways") {
    Net n(lossless());
    n.add(1, {1, 1});
    n.add(2, {2, 1});
    CHECK(n.radio.broadcast(1, beacon(1)).size() == 1);
    CHECK(n.radio.broadcast(2, beacon(2)).size() == 1);
    n.sched.run_until(at_ms(100));
    CHECK(n.got.size() == 2);
}

TEST_CASE("out of range delivers nothing") {
    Net n(lossless(), 1, {20, 20});
    n.add(1, {0, 0});
    n.add(2, {11, 0});
    CHECK(n.radio.broadcast(1, beacon(1)).empty());
    CHECK(n.radio.broadcast(2, beacon(2)).empty());
    CHECK_FALSE(n.radio.reaches(1, 2));
}

TEST_CASE("tx factors make links asymmetric") {
    // 9 m apart: A reaches 10 * 1.2 = 12 m, B only 10 * 0.8 = 8 m.
    Net n(lossless(), 1, {20, 20});
    n.add(1, {0, 0}, 1.2);
    n.add(2, {9, 0}, 0.8);
    CHECK(n.radio.reaches(1, 2));
    CHECK_FALSE(n.radio.reaches(2, 1));
    CHECK(n.radio.broadcast(1, beacon(1)).size() == 1);
    CHECK(n.radio.broadcast(2, beacon(2)).empty());
}

TEST_CASE("range boundary is inclusive") {
    LinkModel m = lossless();
    CHECK(reaches(m, {0, 0}, 1.0, {10, 0}));
    CHECK_FALSE(reaches(m, {0, 0}, 1.0, {10.0001, 0}));
}

TEST_CASE("unicast arrives after exactly the latency") {
    LinkModel m = lossless();
    m.latency = Duration{7};
    Net n(m);
    n.add(1, {1, 1});
    n.add(2, {3, 1});
    n.sched.run_until(at_ms(40));
    const auto at = n.radio.unicast(1, 2, beacon(1));
    REQUIRE(at);
    CHECK(*at == at_ms(47));
    n.sched.run_until(at_ms(46));
    CHECK(n.got.empty());
    n.sched.run_until(at_ms(47));
    REQUIRE(n.got.size() == 1);
    CHECK(n.got[0].second == at_ms(47));
}

TEST_CASE("certain loss never delivers") {
    LinkModel m;
    m.p_loss = 1.0;
    Net n(m);
    n.add(1, {1, 1});
    n.add(2, {2, 1});
    for (int i = 0; i < 100; ++i) CHECK_FALSE(n.radio.unicast(1, 2, beacon(1)));
    CHECK(n.radio.frames_lost() == 100);
}

TEST_CASE("delivery rate matches 1 - p_loss") {
    LinkModel m;
    m.p_loss = 0.3;
    Net n(m, 99);
    n.add(1, {1, 1});
    n.add(2, {2, 1});
    int ok = 0;
    for (int i = 0; i < 10000; ++i) ok += n.radio.unicast(1, 2, beacon(1)).has_value();
    CHECK(ok / 10000.0 == doctest::Approx(0.70).epsilon(0.02 / 0.70));
}

TEST_CASE("broadcast receivers draw loss independently") {
    LinkModel m;
    m.p_loss = 0.5;
    Net n(m, 3);
    n.add(1, {5, 5});
    n.add(2, {5, 6});
    n.add(3, {5, 4});
    int both = 0, one = 0;
    for (int i = 0; i < 4000; ++i) {
        const auto d = n.radio.broadcast(1, beacon(1));
        both += d.size() == 2;
        one += d.size() == 1;
    }
    CHECK(both / 4000.0 == doctest::Approx(0.25).epsilon(0.15));
    CHECK(one / 4000.0 == doctest::Approx(0.50).epsilon(0.1));
}

TEST_CASE("moving closer creates a link on the next transmission") {
    Net n(lossless(), 1, {30, 30});
    n.add(1, {0, 0});
    n.add(2, {20, 0});
    CHECK(n.radio.broadcast(1, beacon(1)).empty());
    n.radio.set_position(2, {5, 0});
    CHECK(n.radio.broadcast(1, beacon(1)).size() == 1);
}

TEST_CASE("positions are clamped to the field") {
    Net n(lossless());
    n.add(1, {1, 1});
    std::vector<Position> clamps;
    n.radio.set_clamp_observer([&](DeviceId, Position, Position c) { clamps.push_back(c); });
    CHECK(n.radio.set_position(1, {-1, 5}) == Position{0, 5});
    CHECK(n.radio.set_position(1, {12, 20}) == Position{10, 15});
    CHECK(n.radio.set_position(1, {3, 3}) == Position{3, 3});
    CHECK(clamps.size() == 2);
}

TEST_CASE("seeded placement gives a reproducible reachability matrix") {
    auto matrix = [](std::uint64_t seed) {
        Scheduler s;
        LinkModel m;
        Radio r(s, {10, 15}, m, seed);
        for (DeviceId id = 1; id <= 14; ++id) {
            RngStream p(seed, "placement", id);
            RngStream tx(seed, "txpower", id);
            r.add_node(id, {p.uniform(0, 10), p.uniform(0, 15)}, tx.uniform(0.4, 1.2));
        }
        std::vector<bool> out;
        for (DeviceId a = 1; a <= 14; ++a)
            for (DeviceId b = 1; b <= 14; ++b) out.push_back(a != b && r.reaches(a, b));
        return out;
    };
    const auto m1 = matrix(8), m2 = matrix(8);
    CHECK(m1 == m2);
    CHECK(m1 != matrix(9));
}

TEST_CASE("topology changes consume no random numbers") {
    LinkModel m;
    m.p_loss = 0.4;
    Net a(m, 11), b(m, 11);
    for (Net* n : {&a, &b}) {
        n->add(1, {1, 1});
        n->add(2, {2, 2});
    }
    std::vector<bool> ra, rb;
    for (int i = 0; i < 200; ++i) {
        ra.push_back(a.radio.unicast(1, 2, beacon(1)).has_value());
        a.radio.set_position(2, {9, 14});
        (void)a.radio.reaches(1, 2);
        a.radio.set_position(2, {2, 2});
        rb.push_back(b.radio.unicast(1, 2, beacon(1)).has_value());
    }
    CHECK(ra == rb);
}

TEST_CASE("offline nodes neither send nor receive") {
    Net n(lossless());
    n.add(1, {1, 1});
    n.add(2, {2, 1});
    n.radio.set_online(2, false);
    CHECK(n.radio.broadcast(2, beacon(2)).empty());
    n.radio.broadcast(1, beacon(1));
    n.sched.run_until(at_ms(50));
    CHECK(n.got.empty());
}

TEST_CASE("frames in flight to a node that goes down are dropped") {
    Net n(lossless());
    n.add(1, {1, 1});
    n.add(2, {2, 1});
    n.radio.unicast(1, 2, beacon(1));
    CHECK(n.radio.in_flight(MessageFamily::Beacon) == 1);
    n.radio.set_online(2, false);
    n.sched.run_until(at_ms(50));
    CHECK(n.got.empty());
    CHECK(n.radio.in_flight(MessageFamily::Beacon) == 0);
}
