#include "hotpotato/scenario.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hotpotato {

std::vector<mobility::Strategy> Scenario::strategies() const {
    std::vector<mobility::Strategy> out;
    const int agg = aggressive >= 0 ? aggressive : players - periphery - random_waypoint;
    for (int i = 0; i < agg; ++i) out.push_back(mobility::Strategy::Aggressive);
    for (int i = 0; i < periphery; ++i) out.push_back(mobility::Strategy::Periphery);
    for (int i = 0; i < random_waypoint; ++i) out.push_back(mobility::Strategy::RandomWaypoint);
    return out;
}

Scenario preset(std::string_view name) {
    Scenario s;
    if (name == "indoor-room") {
        s.preset = "indoor-room";
        return s;
    }
    if (name == "outdoor") {
        s.preset = "outdoor";
        s.field = Field{40.0, 40.0};
        s.stations = {Position{2.0, 2.0}};
        return s;
    }
    if (name == "narrative") {
        s.preset = "narrative";
        s.periphery = 1;
        return s;
    }
    throw ScenarioError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"indoor-room", "outdoor", "narrative"}; }

namespace {

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ScenarioError(key + ": expected a number, got '" + value + "'");
    }
    return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ScenarioError(key + ": expected an integer, got '" + value + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ScenarioError(key + ": expected a non-negative integer, got '" + value + "'");
    }
    return out;
}

std::size_t index_suffix(const std::string& key, const std::string& prefix) {
    const std::string rest = key.substr(prefix.size());
    const auto n = to_u64(key, rest);
    if (n > 10000) throw ScenarioError(key + ": index too large");
    return static_cast<std::size_t>(n);
}

Position to_position(const std::string& key, const std::string& value) {
    const auto comma = value.find(',');
    if (comma == std::string::npos) throw ScenarioError(key + ": expected 'x,y', got '" + value + "'");
    return Position{to_double(key, trim(value.substr(0, comma))),
                    to_double(key, trim(value.substr(comma + 1)))};
}

CrashSpec to_crash(const std::string& key, const std::string& value) {
    std::string v = value;
    CrashSpec c;
    const std::string perm = " permanent";
    if (v.size() > perm.size() && v.compare(v.size() - perm.size(), perm.size(), perm) == 0) {
        c.permanent = true;
        v = trim(v.substr(0, v.size() - perm.size()));
    }
    const auto at = v.find('@');
    if (at == std::string::npos) {
        throw ScenarioError(key + ": expected '<device>@<ms>' or 'holder@<ms>', got '" + value + "'");
    }
    const std::string who = trim(v.substr(0, at));
    if (who != "holder") {
        const auto id = to_u64(key, who);
        if (id > 0xFFFF) throw ScenarioError(key + ": device id out of range");
        c.device = static_cast<DeviceId>(id);
    }
    c.at = at_ms(to_int(key, trim(v.substr(at + 1))));
    return c;
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

void apply_setting(Scenario& s, const std::string& key, const std::string& value) {
    if (key == "preset") {
        const std::uint64_t seed = s.seed;
        s = preset(value);
        s.seed = seed;
    } else if (key == "seed") {
        s.seed = to_u64(key, value);
    } else if (key == "duration_cap_ms") {
        s.duration_cap = Duration{to_int(key, value)};
    } else if (key == "sample_period_ms") {
        s.sample_period = Duration{to_int(key, value)};
    } else if (key == "post_game_cap_ms") {
        s.post_game_cap = Duration{to_int(key, value)};
    } else if (key == "field.width") {
        s.field.width = to_double(key, value);
    } else if (key == "field.height") {
        s.field.height = to_double(key, value);
    } else if (key == "players.count" || key == "player_count") {
        s.players = static_cast<int>(to_int(key, value));
    } else if (key == "players.aggressive") {
        s.aggressive = static_cast<int>(to_int(key, value));
    } else if (key == "players.periphery") {
        s.periphery = static_cast<int>(to_int(key, value));
    } else if (key == "players.random_waypoint") {
        s.random_waypoint = static_cast<int>(to_int(key, value));
    } else if (key == "players.speed") {
        s.agent.speed = to_double(key, value);
    } else if (key == "players.decision_period_ms") {
        s.agent.decision_period = Duration{to_int(key, value)};
    } else if (key == "players.reaction_delay_ms") {
        s.agent.reaction_delay = Duration{to_int(key, value)};
    } else if (key == "players.gesture_noise") {
        s.agent.gesture_noise = to_double(key, value);
    } else if (key == "radio.range") {
        s.radio.base_range = to_double(key, value);
    } else if (key == "radio.loss") {
        s.radio.p_loss = to_double(key, value);
    } else if (key == "radio.latency_ms") {
        s.radio.latency = Duration{to_int(key, value)};
    } else if (key == "radio.tx_factor_spread") {
        s.tx_factor_spread = to_double(key, value);
    } else if (starts_with(key, "radio.tx_factor.")) {
        const auto id = index_suffix(key, "radio.tx_factor.");
        s.tx_factor[static_cast<DeviceId>(id)] = to_double(key, value);
    } else if (key == "game.p0") {
        s.rules.p0 = to_double(key, value);
    } else if (key == "game.fuse_s") {
        s.rules.fuse_s = static_cast<int>(to_int(key, value));
    } else if (key == "stations") {
        if (value != "none") throw ScenarioError(key + ": only 'none' is accepted");
        s.stations.clear();
    } else if (starts_with(key, "station.")) {
        const auto idx = index_suffix(key, "station.");
        if (idx > s.stations.size()) {
            throw ScenarioError(key + ": station indices must be consecutive from 0");
        }
        const Position p = to_position(key, value);
        if (idx == s.stations.size()) {
            s.stations.push_back(p);
        } else {
            s.stations[idx] = p;
        }
    } else if (starts_with(key, "crash.")) {
        const auto idx = index_suffix(key, "crash.");
        if (idx > s.crashes.size()) {
            throw ScenarioError(key + ": crash indices must be consecutive from 0");
        }
        const CrashSpec c = to_crash(key, value);
        if (idx == s.crashes.size()) {
            s.crashes.push_back(c);
        } else {
            s.crashes[idx] = c;
        }
    } else {
        throw ScenarioError("unknown key '" + key + "'");
    }
}

void validate(const Scenario& s) {
    auto fail = [](const std::string& field, const std::string& rule) {
        throw ScenarioError(field + ": " + rule);
    };
    if (s.players < 2) fail("players.count", "must be >= 2 (got " + std::to_string(s.players) + ")");
    if (s.players > 999) fail("players.count", "must be <= 999");
    if (s.periphery < 0) fail("players.periphery", "must be >= 0");
    if (s.random_waypoint < 0) fail("players.random_waypoint", "must be >= 0");
    if (s.aggressive < -1) fail("players.aggressive", "must be >= 0");
    const int assigned = s.periphery + s.random_waypoint + std::max(s.aggressive, 0);
    if (s.aggressive >= 0 && assigned != s.players) {
        fail("players.aggressive", "strategy counts must add up to players.count");
    }
    if (s.aggressive < 0 && assigned > s.players) {
        fail("players.periphery", "strategy counts exceed players.count");
    }
    if (!(s.field.width > 0.0) || !(s.field.height > 0.0)) fail("field", "width and height must be > 0");
    if (!(s.agent.speed > 0.0)) fail("players.speed", "must be > 0");
    if (s.agent.decision_period.count() <= 0) fail("players.decision_period_ms", "must be > 0");
    if (s.agent.reaction_delay.count() < 0) fail("players.reaction_delay_ms", "must be >= 0");
    if (!(s.agent.gesture_noise >= 0.0)) fail("players.gesture_noise", "must be >= 0");
    if (!(s.radio.base_range > 0.0)) fail("radio.range", "must be > 0");
    if (!(s.radio.p_loss >= 0.0 && s.radio.p_loss < 1.0)) fail("radio.loss", "must be in [0, 1)");
    // Causally ordered events on different devices must not share a timestamp.
    if (s.radio.latency.count() < 1) fail("radio.latency_ms", "must be >= 1");
    if (!(s.tx_factor_spread >= 0.0 && s.tx_factor_spread < 1.0)) {
        fail("radio.tx_factor_spread", "must be in [0, 1)");
    }
    for (const auto& [id, f] : s.tx_factor) {
        if (id < 1 || id > s.players) fail("radio.tx_factor." + std::to_string(id), "no such player");
        if (!(f > 0.0)) fail("radio.tx_factor." + std::to_string(id), "must be > 0");
    }
    if (!(s.rules.p0 >= 0.0 && s.rules.p0 < 1.0)) fail("game.p0", "must be in [0, 1)");
    if (s.rules.fuse_s < 1) fail("game.fuse_s", "must be >= 1");
    for (std::size_t i = 0; i < s.stations.size(); ++i) {
        if (!s.field.contains(s.stations[i])) fail("station." + std::to_string(i), "must lie inside the field");
    }
    for (std::size_t i = 0; i < s.crashes.size(); ++i) {
        const auto& c = s.crashes[i];
        if (c.device && (*c.device < 1 || *c.device > s.players)) {
            fail("crash." + std::to_string(i), "no such player");
        }
        if (to_ms(c.at) < 0) fail("crash." + std::to_string(i), "time must be >= 0");
    }
    if (s.duration_cap.count() <= 0) fail("duration_cap_ms", "must be > 0");
    if (s.sample_period.count() < 100) fail("sample_period_ms", "must be >= 100");
    if (s.post_game_cap.count() < 0) fail("post_game_cap_ms", "must be >= 0");
}

Scenario parse_scenario(std::istream& in, const std::string& source) {
    struct Line {
        std::size_t number;
        std::string key;
        std::string value;
    };
    std::vector<Line> lines;
    std::optional<Line> preset_line;
    std::string section;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto where = source + ":" + std::to_string(number) + ": ";
        if (text.front() == '[') {
            if (text.back() != ']') throw ScenarioError(where + "unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ScenarioError(where + "expected 'key = value'");
        std::string key = trim(text.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        Line line{number, key, trim(text.substr(eq + 1))};
        if (key == "preset") {
            preset_line = line;
        } else {
            lines.push_back(line);
        }
    }
    Scenario s;
    if (preset_line) lines.insert(lines.begin(), *preset_line);
    for (const auto& l : lines) {
        try {
            apply_setting(s, l.key, l.value);
        } catch (const ScenarioError& e) {
            throw ScenarioError(source + ":" + std::to_string(l.number) + ": " + e.what());
        }
    }
    validate(s);
    return s;
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    return parse_scenario(in, source);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open");
    return parse_scenario(in, path);
}

std::string to_text(const Scenario& s) {
    std::ostringstream out;
    out << std::setprecision(15);
    out << "preset = " << s.preset << '\n';
    out << "seed = " << s.seed << '\n';
    out << "duration_cap_ms = " << s.duration_cap.count() << '\n';
    out << "sample_period_ms = " << s.sample_period.count() << '\n';
    out << "post_game_cap_ms = " << s.post_game_cap.count() << '\n';
    out << "field.width = " << s.field.width << '\n';
    out << "field.height = " << s.field.height << '\n';
    out << "players.count = " << s.players << '\n';
    if (s.aggressive >= 0) out << "players.aggressive = " << s.aggressive << '\n';
    out << "players.periphery = " << s.periphery << '\n';
    out << "players.random_waypoint = " << s.random_waypoint << '\n';
    out << "players.speed = " << s.agent.speed << '\n';
    out << "players.decision_period_ms = " << s.agent.decision_period.count() << '\n';
    out << "players.reaction_delay_ms = " << s.agent.reaction_delay.count() << '\n';
    out << "players.gesture_noise = " << s.agent.gesture_noise << '\n';
    out << "radio.range = " << s.radio.base_range << '\n';
    out << "radio.loss = " << s.radio.p_loss << '\n';
    out << "radio.latency_ms = " << s.radio.latency.count() << '\n';
    out << "radio.tx_factor_spread = " << s.tx_factor_spread << '\n';
    for (const auto& [id, f] : s.tx_factor) out << "radio.tx_factor." << id << " = " << f << '\n';
    out << "game.p0 = " << s.rules.p0 << '\n';
    out << "game.fuse_s = " << s.rules.fuse_s << '\n';
    if (s.stations.empty()) out << "stations = none\n";
    for (std::size_t i = 0; i < s.stations.size(); ++i) {
        out << "station." << i << " = " << s.stations[i].x << "," << s.stations[i].y << '\n';
    }
    for (std::size_t i = 0; i < s.crashes.size(); ++i) {
        const auto& c = s.crashes[i];
        out << "crash." << i << " = " << (c.device ? std::to_string(*c.device) : "holder") << "@"
            << to_ms(c.at) << (c.permanent ? " permanent" : "") << '\n';
    }
    return out.str();
}

}  // namespace hotpotato
