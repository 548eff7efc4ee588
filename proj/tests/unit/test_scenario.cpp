#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "hotpotato/scenario.hpp"

using namespace hotpotato;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_scenario_text(text, "t.conf");
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("minimal file gets the documented defaults") {
    const Scenario s = parse_scenario_text("players.count = 2\n");
    CHECK(s.players == 2);
    CHECK(s.field.width == 10.0);
    CHECK(s.field.height == 15.0);
    CHECK(s.rules.p0 == kDefaultP0);
    CHECK(s.rules.fuse_s == 30);
    CHECK(s.radio.base_range == 10.0);
    CHECK(s.radio.p_loss == 0.05);
    CHECK(s.agent.speed == 1.5);
    CHECK(to_ms(Duration{s.agent.reaction_delay}) == 2000);
    CHECK(s.stations.size() == 1);
    CHECK(s.strategies().size() == 2);
}

TEST_CASE("presets") {
    CHECK(preset("indoor-room").field.width == 10.0);
    CHECK(preset("indoor-room").field.height == 15.0);
    CHECK(preset("outdoor").field.width == 40.0);
    const Scenario n = preset("narrative");
    const auto strat = n.strategies();
    CHECK(std::count(strat.begin(), strat.end(), mobility::Strategy::Periphery) == 1);
    CHECK(std::count(strat.begin(), strat.end(), mobility::Strategy::Aggressive) == 9);
    CHECK_THROWS_AS(preset("moon"), ScenarioError);
    for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset(name)));
}

TEST_CASE("preset applies first wherever it appears") {
    const Scenario s = parse_scenario_text("seed = 9\nfield.width = 12\npreset = outdoor\n");
    CHECK(s.preset == "outdoor");
    CHECK(s.field.width == 12.0);
    CHECK(s.field.height == 40.0);
    CHECK(s.seed == 9);
}

TEST_CASE("sections prefix keys") {
    const Scenario s = parse_scenario_text(
        "[radio]\nloss = 0.2 # comment\nlatency_ms = 7\n\n[crash]\n0 = holder@60000\n1 = 3@5 permanent\n");
    CHECK(s.radio.p_loss == 0.2);
    CHECK(s.radio.latency == Duration{7});
    REQUIRE(s.crashes.size() == 2);
    CHECK_FALSE(s.crashes[0].device);
    CHECK(s.crashes[0].at == at_ms(60000));
    CHECK(s.crashes[1].device == DeviceId{3});
    CHECK(s.crashes[1].permanent);
}

TEST_CASE("validation errors name the field") {
    CHECK(contains(error_of("players.count = 1\n"), "players.count"));
    CHECK(contains(error_of("radio.loss = 1.0\n"), "radio.loss"));
    CHECK(contains(error_of("radio.loss = -0.1\n"), "radio.loss"));
    CHECK(contains(error_of("game.p0 = 1\n"), "game.p0"));
    CHECK(contains(error_of("sample_period_ms = 99\n"), "sample_period_ms"));
    CHECK(contains(error_of("players.speed = 0\n"), "players.speed"));
    CHECK(contains(error_of("players.reaction_delay_ms = -1\n"), "players.reaction_delay_ms"));
    CHECK(contains(error_of("station.0 = 50,50\n"), "station.0"));
    CHECK(contains(error_of("crash.0 = 11@100\n"), "crash.0"));
    CHECK(contains(error_of("players.periphery = 11\n"), "players.periphery"));
}

TEST_CASE("syntax errors carry the location") {
    CHECK(contains(error_of("seed = 1\nbogus_key = 3\n"), "t.conf:2"));
    CHECK(contains(error_of("seed = 1\nbogus_key = 3\n"), "bogus_key"));
    CHECK(contains(error_of("seed 1\n"), "t.conf:1"));
    CHECK(contains(error_of("[radio\nloss = 0.1\n"), "t.conf:1"));
    CHECK(contains(error_of("seed = abc\n"), "t.conf:1"));
    CHECK(contains(error_of("crash.1 = 2@100\n"), "consecutive"));
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/x.conf"), ScenarioError);
}

TEST_CASE("canonical text round trips") {
    Scenario s = preset("outdoor");
    s.seed = 123;
    s.tx_factor[2] = 1.2;
    s.tx_factor_spread = 0.1;
    s.crashes.push_back({std::nullopt, at_ms(60000), false});
    s.crashes.push_back({DeviceId{4}, at_ms(70000), true});
    s.stations.push_back({3.5, 9.25});
    CHECK(parse_scenario_text(to_text(s)) == s);
    Scenario none = preset("indoor-room");
    none.stations.clear();
    CHECK(parse_scenario_text(to_text(none)) == none);
}

TEST_CASE("shipped scenario files validate and round trip") {
    const std::filesystem::path dir = HOTPOTATO_SOURCE_DIR "/scenarios";
    int n = 0;
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        if (f.path().extension() != ".conf") continue;
        INFO(f.path().string());
        const Scenario s = load_scenario(f.path().string());
        CHECK(parse_scenario_text(to_text(s)) == s);
        ++n;
    }
    CHECK(n >= 5);
}
