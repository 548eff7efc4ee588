#include <doctest.h>

#include <cmath>
#include <vector>

#include "hotpotato/sim_kernel.hpp"
#include "hotpotato/world.hpp"

using namespace hotpotato;

TEST_CASE("events fire in time order") {
    Scheduler s;
    std::vector<int> order;
    s.schedule(at_ms(501), std::nullopt, "b", [&] { order.push_back(501); });
    s.schedule(at_ms(500), std::nullopt, "a", [&] { order.push_back(500); });
    CHECK(s.run_until(at_ms(1000)) == 2);
    CHECK(order == std::vector<int>{500, 501});
}

TEST_CASE("equal fire times run in insertion order") {
    Scheduler s;
    std::vector<int> order;
    const auto h1 = s.schedule(at_ms(100), std::nullopt, "x", [&] { order.push_back(1); });
    const auto h2 = s.schedule(at_ms(100), std::nullopt, "x", [&] { order.push_back(2); });
    CHECK(h1 < h2);
    s.run_until(at_ms(100));
    CHECK(order == std::vector<int>{1, 2});
}

TEST_CASE("cancelled event never runs") {
    Scheduler s;
    bool ran = false;
    const auto h = s.schedule(at_ms(10), std::nullopt, "x", [&] { ran = true; });
    CHECK(s.cancel(h));
    CHECK_FALSE(s.cancel(h));
    s.run_until(at_ms(100));
    CHECK_FALSE(ran);
}

TEST_CASE("run_until on an empty queue only moves the clock") {
    Scheduler s;
    CHECK(s.run_until(at_ms(1000)) == 0);
    CHECK(s.now() == at_ms(1000));
}

TEST_CASE("run_until counts events up to and including end") {
    Scheduler s;
    for (int t : {100, 200, 300, 301}) s.schedule(at_ms(t), std::nullopt, "x", [] {});
    CHECK(s.run_until(at_ms(300)) == 3);
    CHECK(s.pending_count() == 1);
    CHECK(s.now() == at_ms(300));
}

TEST_CASE("scheduling in the past is rejected") {
    Scheduler s;
    s.run_until(at_ms(50));
    CHECK_THROWS_AS(s.schedule(at_ms(49), std::nullopt, "x", [] {}), SchedulingError);
    CHECK_NOTHROW(s.schedule(at_ms(50), std::nullopt, "x", [] {}));
}

TEST_CASE("cancel_target removes only that device's events") {
    Scheduler s;
    int ran = 0;
    s.schedule(at_ms(1), DeviceId{1}, "x", [&] { ++ran; });
    s.schedule(at_ms(2), DeviceId{1}, "x", [&] { ++ran; });
    s.schedule(at_ms(3), DeviceId{2}, "x", [&] { ++ran; });
    s.schedule(at_ms(4), std::nullopt, "x", [&] { ++ran; });
    CHECK(s.cancel_target(1) == 2);
    s.run_until(at_ms(10));
    CHECK(ran == 2);
}

TEST_CASE("clock never moves backwards") {
    Scheduler s;
    RngStream rng(9, "test");
    std::vector<SimTime> seen;
    std::function<void()> spawn = [&] {
        seen.push_back(s.now());
        if (seen.size() < 500) {
            s.schedule_in(Duration{static_cast<std::int64_t>(rng.below(20))}, std::nullopt, "x", spawn);
        }
    };
    for (int i = 0; i < 5; ++i) s.schedule(at_ms(i), std::nullopt, "x", spawn);
    s.run_until(at_ms(100000));
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1] <= seen[i]);
}

TEST_CASE("rng streams match the reference implementation") {
    // Values from tests/oracles/rng_oracle.py.
    RngStream a(42, "radio", 0);
    CHECK(a.next_u64() == 0x0431de43410c0321ULL);
    CHECK(a.next_u64() == 0x6503ef6e5d50b321ULL);
    CHECK(a.next_u64() == 0xed175cd92e7f266dULL);
    RngStream b(1, "game", 3);
    CHECK(b.next_u64() == 0xed7db72cecd8dab8ULL);
    CHECK(b.next_u64() == 0x839e93f4cd5d0e57ULL);
    RngStream c(0, "", 0);
    CHECK(c.uniform() == doctest::Approx(0.6152107539939901).epsilon(1e-15));
}

TEST_CASE("same seed and label give the same draws") {
    RngStream a(7, "mobility", 4), b(7, "mobility", 4);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different labels are uncorrelated") {
    RngStream a(123, "radio"), b(123, "game");
    const int n = 100000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.uniform(), y = b.uniform();
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
    CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("uniform draws have mean one half") {
    RngStream r(2024, "uniform");
    double sum = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n >= 0.499);
    CHECK(sum / n <= 0.501);
}

TEST_CASE("below stays in range and covers it") {
    RngStream r(5, "below");
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) ++hits[r.below(7)];
    for (int h : hits) CHECK(h > 800);
    CHECK_THROWS(r.below(0));
}

TEST_CASE("normal draws have unit variance") {
    RngStream r(77, "normal");
    const int n = 200000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        ss += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(ss / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("same scenario and seed replay the identical event trace") {
    Scenario sc = preset("indoor-room");
    sc.seed = 31;
    sc.duration_cap = Duration{60000};
    RunOptions opt;
    opt.trace = true;
    const RunResult a = run_scenario(sc, opt);
    const RunResult b = run_scenario(sc, opt);
    REQUIRE(a.artifacts.contains("trace.log"));
    CHECK(a.artifacts.at("trace.log").size() > 1000);
    CHECK(a.artifacts == b.artifacts);
}
