#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hotpotato/radio.hpp"
#include "hotpotato/sim_kernel.hpp"

namespace hotpotato::mobility {

enum class Strategy : std::uint8_t { Aggressive, Periphery, RandomWaypoint };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct Params {
    double speed = 1.5;  // m/s
    Duration decision_period{500};
    Duration reaction_delay{2000};
    /// Accelerometer noise of gameplay gestures (m/s^2).
    double gesture_noise = 2.0;

    bool operator==(const Params&) const = default;
};

/// What an agent can see when choosing where to go.
struct View {
    Position self;
    bool holding = false;
    /// Other players still in the game.
    std::vector<Position> alive_others;
    /// Bidirectional player neighbors in this device's Echo table.
    std::vector<Position> neighbors;
    Field field;
};

/// Next waypoint for a strategy. `current` is kept by RandomWaypoint until
/// reached; `rng` is consumed only by RandomWaypoint.
Position choose_waypoint(Strategy strategy, const View& view, Position current, RngStream& rng);

/// Moves at most speed * dt toward `to`, staying inside the field.
Position step_toward(Position from, Position to, double speed, Duration dt, const Field& field);

Position nearest(Position from, const std::vector<Position>& candidates);
Position centroid(const std::vector<Position>& points);
/// The field corner farthest from `p`.
Position farthest_corner(const Field& field, Position p);

}  // namespace hotpotato::mobility
