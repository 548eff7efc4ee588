#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hotpotato/mobility.hpp"
#include "hotpotato/world.hpp"

using namespace hotpotato;
using namespace hotpotato::mobility;

namespace {

const Field kRoom{10, 15};

View view_at(Position self) {
    View v;
    v.self = self;
    v.field = kRoom;
    return v;
}

}  // namespace

TEST_CASE("strategy names round trip") {
    for (Strategy s : {Strategy::Aggressive, Strategy::Periphery, Strategy::RandomWaypoint}) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK_FALSE(parse_strategy("lazy"));
}

TEST_CASE("one step never exceeds speed times dt") {
    RngStream rng(1, "test", 0);
    for (int i = 0; i < 1000; ++i) {
        const Position a{rng.uniform(0, 10), rng.uniform(0, 15)};
        const Position b{rng.uniform(-5, 15), rng.uniform(-5, 20)};
        const Position c = step_toward(a, b, 1.5, Duration{1000}, kRoom);
        CHECK(distance(a, c) <= 1.5 + 1e-9);
        CHECK(kRoom.contains(c));
    }
    CHECK(step_toward({0, 0}, {1, 0}, 1.5, Duration{1000}, kRoom) == Position{1, 0});
}

TEST_CASE("periphery agent heads for the boundary") {
    View v = view_at({5, 7});
    v.alive_others = {{5, 7.5}, {5, 7.5}, {5, 7.5}};
    RngStream rng(1, "test", 0);
    const Position w = choose_waypoint(Strategy::Periphery, v, v.self, rng);
    const bool on_edge = w.x == 0.0 || w.x == 10.0 || w.y == 0.0 || w.y == 15.0;
    CHECK(on_edge);
    CHECK(distance(w, {5, 7.5}) == doctest::Approx(std::hypot(5.0, 7.5)));
}

TEST_CASE("aggressive holder walks to its neighbour") {
    View v = view_at({1, 1});
    v.holding = true;
    v.neighbors = {{5, 5}};
    v.alive_others = {{2, 2}, {5, 5}};
    RngStream rng(1, "test", 0);
    CHECK(choose_waypoint(Strategy::Aggressive, v, v.self, rng) == Position{5, 5});
    v.holding = false;
    CHECK(choose_waypoint(Strategy::Aggressive, v, v.self, rng) == Position{2, 2});
}

TEST_CASE("only random waypoint consumes randomness") {
    View v = view_at({3, 3});
    v.alive_others = {{4, 4}};
    RngStream a(1, "mobility", 1), b(1, "mobility", 1);
    (void)choose_waypoint(Strategy::Aggressive, v, v.self, a);
    (void)choose_waypoint(Strategy::Periphery, v, v.self, a);
    CHECK(a.next_u64() == b.next_u64());
    const Position w = choose_waypoint(Strategy::RandomWaypoint, v, v.self, a);
    CHECK(kRoom.contains(w));
    // Kept until reached.
    CHECK(choose_waypoint(Strategy::RandomWaypoint, v, w, a) == w);
}

TEST_CASE("helpers") {
    CHECK(centroid({{0, 0}, {2, 4}}) == Position{1, 2});
    CHECK(nearest({0, 0}, {{3, 3}, {1, 1}, {2, 0}}) == Position{1, 1});
    CHECK(farthest_corner(kRoom, {1, 1}) == Position{10, 15});
}

TEST_CASE("players stay inside the field during a game") {
    Scenario s = preset("outdoor");
    s.random_waypoint = 4;
    s.seed = 12;
    s.duration_cap = Duration{60000};
    World w(s, RunOptions{false, false, 1});
    w.start();
    for (int t = 0; t <= 60000; t += 100) {
        w.advance_until(at_ms(t));
        for (PlayerDevice* p : w.players()) CHECK(s.field.contains(w.radio().position(p->id())));
        if (w.game_ended()) break;
    }
}

TEST_CASE("holders gesture within reaction delay plus one decision period") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Scenario s = preset("indoor-room");
        s.seed = seed;
        World w(s, RunOptions{true, true, 1});
        const RunResult r = w.run();
        REQUIRE(r.ok());
        const std::int64_t end = r.duration_ms;
        std::map<DeviceId, std::vector<std::int64_t>> gestures;
        std::istringstream trace(r.artifacts.at("trace.log"));
        std::string line;
        while (std::getline(trace, line)) {
            std::istringstream f(line);
            std::int64_t t;
            std::uint64_t seq;
            std::string target, label;
            f >> t >> seq >> target >> label;
            if (label == "agent.gesture") gestures[std::stoul(target)].push_back(t);
        }
        std::size_t checked = 0;
        for (PlayerDevice* p : w.players()) {
            std::optional<std::int64_t> out;
            for (const auto& e : p->storage().extract()) {
                if (e.event.kind == EventKind::Eliminated) out = to_ms(e.time);
            }
            for (const auto& e : p->storage().extract()) {
                const auto k = e.event.kind;
                if (k != EventKind::Generated && k != EventKind::PassReceived) continue;
                const std::int64_t t = to_ms(e.time);
                const std::int64_t deadline = t + 2000 + 500;
                if (deadline > end || (out && *out <= deadline)) continue;
                const auto& g = gestures[p->id()];
                const bool found = std::any_of(g.begin(), g.end(), [&](std::int64_t x) {
                    return x >= t && x <= deadline;
                });
                INFO("seed " << seed << " dev " << p->id() << " acquired at " << t);
                CHECK(found);
                ++checked;
            }
        }
        CHECK(checked > 10);
    }
}

TEST_CASE("the periphery agent has fewer neighbours than the population") {
    // Mean over samples taken every 500 ms while both the agent and the game are alive.
    int lower = 0;
    const int runs = 20;
    for (int seed = 1; seed <= runs; ++seed) {
        Scenario s = preset("narrative");
        s.seed = static_cast<std::uint64_t>(seed);
        s.duration_cap = Duration{180000};
        World w(s, RunOptions{false, false, 1});
        w.start();
        const DeviceId periphery = static_cast<DeviceId>(s.players);
        std::map<DeviceId, std::pair<double, int>> sums;
        for (int t = 1000; !w.game_ended() && t <= 180000; t += 500) {
            w.advance_until(at_ms(t));
            if (w.game_ended()) break;
            for (PlayerDevice* p : w.players()) {
                if (!p->alive()) continue;
                auto& [sum, n] = sums[p->id()];
                sum += static_cast<double>(p->player_neighbor_count());
                ++n;
            }
        }
        double pop = 0.0;
        for (const auto& [id, sn] : sums) pop += sn.first / sn.second;
        pop /= static_cast<double>(sums.size());
        const double mine = sums[periphery].first / sums[periphery].second;
        INFO("seed " << seed << ": periphery " << mine << ", population " << pop);
        CHECK(mine < pop);
        lower += mine < pop;
    }
    CHECK(lower == runs);
}

TEST_CASE("an isolated player generates more potatoes than clustered ones") {
    double isolated = 0.0, clustered = 0.0;
    const int runs = 50;
    for (int seed = 1; seed <= runs; ++seed) {
        Scheduler sched;
        LinkModel m;
        Radio radio(sched, {40, 40}, m, static_cast<std::uint64_t>(seed));
        DeviceConfig cfg;
        cfg.rules.p0 = kDefaultP0;
        std::vector<std::unique_ptr<PlayerDevice>> devs;
        devs.push_back(std::make_unique<PlayerDevice>(1, Position{38, 38}, 1.0, cfg, sched, radio,
                                                      static_cast<std::uint64_t>(seed)));
        for (DeviceId id = 2; id <= 7; ++id) {
            devs.push_back(std::make_unique<PlayerDevice>(
                id, Position{2.0 + id % 3, 2.0 + id / 3}, 1.0, cfg, sched, radio,
                static_cast<std::uint64_t>(seed)));
        }
        for (auto& d : devs) d->start_game(at_ms(0), 1);
        // Stop before the first possible explosion.
        sched.run_until(at_ms(29000));
        isolated += static_cast<double>(devs[0]->counters().potatoes_generated);
        for (std::size_t i = 1; i < devs.size(); ++i) {
            clustered += static_cast<double>(devs[i]->counters().potatoes_generated) / 6.0;
        }
    }
    CHECK(isolated / runs > clustered / runs);
}
