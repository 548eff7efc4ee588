#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hotpotato/game.hpp"
#include "hotpotato/mobility.hpp"
#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CrashSpec {
    /// nullopt: whichever player holds a potato at that moment (lowest id).
    std::optional<DeviceId> device;
    SimTime at{};
    bool permanent = false;

    bool operator==(const CrashSpec&) const = default;
};

/// Calibrated so that ten Aggressive players in the indoor room finish a
/// game in two to three minutes (median).
inline constexpr double kDefaultP0 = 0.15;
inline constexpr int kDefaultFuseS = 30;

struct Scenario {
    std::uint64_t seed = 1;
    std::string preset = "indoor-room";
    Field field{10.0, 15.0};

    int players = 10;
    /// -1: every player not assigned another strategy.
    int aggressive = -1;
    int periphery = 0;
    int random_waypoint = 0;
    mobility::Params agent;

    LinkModel radio;
    /// Per-device tx factor drawn uniformly from [1 - spread, 1 + spread].
    double tx_factor_spread = 0.0;
    std::map<DeviceId, double> tx_factor;

    game::Rules rules{kDefaultP0, kDefaultFuseS, Duration{1000}, Duration{1000}};
    std::vector<Position> stations{{5.0, 7.5}};
    std::vector<CrashSpec> crashes;

    Duration duration_cap{600000};
    Duration sample_period{1000};
    /// Upper bound on the post-game upload phase.
    Duration post_game_cap{600000};

    /// Strategy of player ids 1..players, in id order.
    std::vector<mobility::Strategy> strategies() const;

    bool operator==(const Scenario&) const = default;
};

/// Known presets: "indoor-room", "outdoor", "narrative".
Scenario preset(std::string_view name);
std::vector<std::string> preset_names();

/// Applies one `key = value` setting; throws ScenarioError naming the key.
void apply_setting(Scenario& s, const std::string& key, const std::string& value);

/// Throws ScenarioError naming the field and the violated constraint.
void validate(const Scenario& s);

/// Plain-text format: `key = value` lines, `[section]` headers prefixing the
/// following keys with `section.`, `#` comments. A `preset` key is applied
/// before every other setting regardless of its position. Errors carry
/// `source:line`.
Scenario parse_scenario(std::istream& in, const std::string& source = "<input>");
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<input>");
Scenario load_scenario(const std::string& path);

/// Canonical `key = value` rendering (round-trips through parse_scenario).
std::string to_text(const Scenario& s);

}  // namespace hotpotato
