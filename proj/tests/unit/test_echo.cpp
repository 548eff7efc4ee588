#include <doctest.h>

#include <memory>
#include <vector>

#include "hotpotato/echo.hpp"

using namespace hotpotato;
using namespace hotpotato::echo;

namespace {

struct Mesh {
    Scheduler sched;
    Radio radio;
    std::map<DeviceId, std::unique_ptr<EchoProtocol>> nodes;

    Mesh(double p_loss, std::uint64_t seed, Field f = {10, 15}) : radio(sched, f, model(p_loss), seed) {}

    static LinkModel model(double p_loss) {
        LinkModel m;
        m.p_loss = p_loss;
        return m;
    }

    EchoProtocol& add(DeviceId id, Position p, std::uint64_t seed = 1) {
        radio.add_node(id, p, 1.0);
        auto node = std::make_unique<EchoProtocol>(id, Role::Player, Config{}, sched, radio, seed);
        EchoProtocol* raw = node.get();
        radio.set_handler(id, [raw](const RadioFrame& f) {
            if (const auto* b = std::get_if<Beacon>(f.payload.get())) raw->on_beacon(*b);
        });
        nodes[id] = std::move(node);
        return *raw;
    }

    void start_all() {
        for (auto& [id, n] : nodes) n->start(sched.now());
    }

    bool all_bidirectional() const {
        const SimTime now = sched.now();
        for (const auto& [id, n] : nodes) {
            if (n->table().bidirectional_count(now) != nodes.size() - 1) return false;
        }
        return true;
    }
};

Beacon beacon_from(DeviceId sender, std::vector<DeviceId> heard, Role role = Role::Player) {
    return Beacon{sender, role, std::move(heard), {}};
}

}  // namespace

TEST_CASE("beacon listing me marks the sender bidirectional") {
    NeighborTable t(1, Duration{1500});
    t.on_beacon(beacon_from(2, {}), at_ms(0));
    REQUIRE(t.find(2, at_ms(0)));
    CHECK_FALSE(t.find(2, at_ms(0))->bidirectional);
    t.on_beacon(beacon_from(2, {1, 3}), at_ms(100));
    CHECK(t.find(2, at_ms(100))->bidirectional);
    CHECK(t.bidirectional(at_ms(100)) == std::vector<DeviceId>{2});
}

TEST_CASE("own beacons are ignored") {
    NeighborTable t(1, Duration{1500});
    t.on_beacon(beacon_from(1, {1}), at_ms(0));
    CHECK(t.raw().empty());
}

TEST_CASE("staleness window boundaries") {
    NeighborTable t(1, Duration{1500});
    t.on_beacon(beacon_from(2, {1}), at_ms(0));
    CHECK(t.find(2, at_ms(1400)));
    CHECK(t.bidirectional_count(at_ms(1400)) == 1);
    CHECK_FALSE(t.find(2, at_ms(1500)));
    CHECK_FALSE(t.find(2, at_ms(1600)));
    CHECK(t.bidirectional_count(at_ms(1600)) == 0);
    CHECK(t.expire_stale(at_ms(1600)) == std::vector<DeviceId>{2});
    CHECK(t.raw().empty());
}

TEST_CASE("role filter") {
    NeighborTable t(1, Duration{1500});
    t.on_beacon(beacon_from(2, {1}), at_ms(0));
    t.on_beacon(beacon_from(1000, {1}, Role::Station), at_ms(0));
    CHECK(t.bidirectional_count(at_ms(10)) == 2);
    CHECK(t.bidirectional_count(at_ms(10), Role::Player) == 1);
    CHECK(t.bidirectional(at_ms(10), Role::Station) == std::vector<DeviceId>{1000});
}

TEST_CASE("heard list keeps the most recent up to the cap, sorted") {
    NeighborTable t(1, Duration{1500});
    for (DeviceId id = 2; id <= 6; ++id) t.on_beacon(beacon_from(id, {}), at_ms(100 * id));
    CHECK(t.heard_list(at_ms(700), 32) == std::vector<DeviceId>{2, 3, 4, 5, 6});
    CHECK(t.heard_list(at_ms(700), 3) == std::vector<DeviceId>{4, 5, 6});
    // 2 heard at 200 is stale at 1700.
    CHECK(t.heard_list(at_ms(1700), 32) == std::vector<DeviceId>{3, 4, 5, 6});
}

TEST_CASE("lossless in-range devices converge within one second") {
    Mesh m(0.0, 5);
    m.add(1, {2, 2});
    m.add(2, {6, 3});
    m.add(3, {4, 9});
    m.start_all();
    std::optional<SimTime> converged;
    while (m.sched.step()) {
        if (m.all_bidirectional()) {
            converged = m.sched.now();
            break;
        }
    }
    REQUIRE(converged);
    CHECK(to_ms(*converged) <= 1000 + 2 * 5);
}

TEST_CASE("fourteen devices each list thirteen ids") {
    Mesh m(0.0, 14);
    for (DeviceId id = 1; id <= 14; ++id) m.add(id, {1.0 + (id % 4) * 2.0, 1.0 + (id / 4) * 2.0});
    m.start_all();
    m.sched.run_until(at_ms(2000));
    CHECK(m.all_bidirectional());
    for (auto& [id, n] : m.nodes) CHECK(n->make_beacon().heard.size() == 13);
}

TEST_CASE("separation is detected within the staleness window") {
    Mesh m(0.0, 2, {30, 30});
    m.add(1, {1, 1});
    m.add(2, {3, 1});
    m.start_all();
    m.sched.run_until(at_ms(2000));
    REQUIRE(m.all_bidirectional());
    const SimTime cut = m.sched.now();
    m.radio.set_position(2, {25, 25});
    std::optional<SimTime> lost;
    while (m.sched.step()) {
        if (m.nodes[1]->table().bidirectional_count(m.sched.now()) == 0 &&
            m.nodes[2]->table().bidirectional_count(m.sched.now()) == 0) {
            lost = m.sched.now();
            break;
        }
    }
    REQUIRE(lost);
    CHECK(to_ms(*lost - cut) <= 1500 + 5);
}

namespace {

// Fraction of sampled (device, neighbour) pairs reported bidirectional over 60 s.
double bidirectional_fraction(double loss, std::uint64_t seed) {
    Mesh m(loss, seed);
    for (DeviceId id = 1; id <= 6; ++id) m.add(id, {1.0 + id, 1.0 + id});
    m.start_all();
    std::size_t good = 0, total = 0;
    for (int t = 2000; t < 62000; t += 100) {
        m.sched.run_until(at_ms(t));
        for (auto& [id, n] : m.nodes) {
            good += n->table().bidirectional_count(m.sched.now());
            total += m.nodes.size() - 1;
        }
    }
    return static_cast<double>(good) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("loss rate matches the Monte-Carlo oracle") {
    // tests/oracles/echo_bidir_oracle.py, 40 x 60 s: 0.9937, 0.9821, 0.9336
    CHECK(bidirectional_fraction(0.1, 77) == doctest::Approx(0.9937).epsilon(0.01));
    CHECK(bidirectional_fraction(0.2, 77) == doctest::Approx(0.9821).epsilon(0.015));
    CHECK(bidirectional_fraction(0.3, 77) == doctest::Approx(0.9336).epsilon(0.02));
}

TEST_CASE("stable links read bidirectional at least 95% of the time under loss") {
    for (double loss : {0.1, 0.2, 0.3}) {
        INFO("loss " << loss);
        CHECK(bidirectional_fraction(loss, 78) >= 0.95);
    }
}

TEST_CASE("beacon timing stays within period plus jitter") {
    Mesh m(0.0, 4);
    auto& n = m.add(1, {1, 1});
    std::vector<SimTime> sent;
    n.set_beacon_observer([&](const Beacon& b) { sent.push_back(b.sent_at); });
    n.start(at_ms(0));
    m.sched.run_until(at_ms(10000));
    REQUIRE(sent.size() >= 19);
    for (std::size_t k = 0; k < sent.size(); ++k) {
        CHECK(to_ms(sent[k]) >= 500 * static_cast<std::int64_t>(k));
        CHECK(to_ms(sent[k]) <= 500 * static_cast<std::int64_t>(k) + 50);
    }
}

TEST_CASE("stopped device sends no beacons") {
    Mesh m(0.0, 4);
    auto& n = m.add(1, {1, 1});
    int sent = 0;
    n.set_beacon_observer([&](const Beacon&) { ++sent; });
    n.start(at_ms(0));
    m.sched.run_until(at_ms(1000));
    const int before = sent;
    n.stop();
    m.sched.run_until(at_ms(5000));
    CHECK(sent == before);
}

TEST_CASE("wire format round trip") {
    const Beacon b{1003, Role::Station, {1, 2, 700}, at_ms(123456789)};
    const auto bytes = encode(b);
    CHECK(bytes.size() == 2 + 1 + 1 + 3 * 2 + 8);
    CHECK(bytes[0] == 0xeb);
    CHECK(bytes[1] == 0x03);
    CHECK(bytes[2] == 1);
    CHECK(bytes[3] == 3);
    std::size_t off = 0;
    CHECK(decode(bytes, off) == b);
    CHECK(off == bytes.size());

    std::vector<std::uint8_t> stream;
    encode_into(b, stream);
    encode_into(Beacon{2, Role::Player, {}, at_ms(5)}, stream);
    const auto all = decode_all(stream);
    REQUIRE(all.size() == 2);
    CHECK(all[1].heard.empty());
    CHECK(all[1].sent_at == at_ms(5));
}

TEST_CASE("wire format rejects bad input") {
    auto bytes = encode(Beacon{1, Role::Player, {2}, at_ms(1)});
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_AS(decode_all(cut), WireError);
    bytes[2] = 9;
    CHECK_THROWS_AS(decode_all(bytes), WireError);
    Beacon big{1, Role::Player, std::vector<DeviceId>(256, 2), {}};
    CHECK_THROWS_AS(encode(big), WireError);
}
