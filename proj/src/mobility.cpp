#include "hotpotato/mobility.hpp"

#include <cmath>

namespace hotpotato::mobility {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Aggressive: return "aggressive";
        case Strategy::Periphery: return "periphery";
        case Strategy::RandomWaypoint: return "random_waypoint";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
    for (Strategy s : {Strategy::Aggressive, Strategy::Periphery, Strategy::RandomWaypoint}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

Position nearest(Position from, const std::vector<Position>& candidates) {
    Position best = from;
    double best_d = -1.0;
    for (const auto& c : candidates) {
        const double d = distance(from, c);
        if (best_d < 0.0 || d < best_d) {
            best = c;
            best_d = d;
        }
    }
    return best;
}

Position centroid(const std::vector<Position>& points) {
    if (points.empty()) return {};
    Position c;
    for (const auto& p : points) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(points.size());
    c.y /= static_cast<double>(points.size());
    return c;
}

Position farthest_corner(const Field& field, Position p) {
    const Position corners[4] = {{0.0, 0.0}, {field.width, 0.0}, {0.0, field.height},
                                 {field.width, field.height}};
    Position best = corners[0];
    double best_d = -1.0;
    for (const auto& c : corners) {
        const double d = distance(p, c);
        if (d > best_d) {
            best = c;
            best_d = d;
        }
    }
    return best;
}

Position choose_waypoint(Strategy strategy, const View& view, Position current, RngStream& rng) {
    switch (strategy) {
        case Strategy::Aggressive:
            if (view.holding && !view.neighbors.empty()) return nearest(view.self, view.neighbors);
            if (!view.alive_others.empty()) return nearest(view.self, view.alive_others);
            return view.self;
        case Strategy::Periphery:
            // A holder still has to get rid of the potato.
            if (view.holding) {
                if (!view.neighbors.empty()) return nearest(view.self, view.neighbors);
                if (!view.alive_others.empty()) return nearest(view.self, view.alive_others);
            }
            if (view.alive_others.empty()) return view.self;
            return farthest_corner(view.field, centroid(view.alive_others));
        case Strategy::RandomWaypoint:
            if (distance(current, view.self) > 1e-9) return current;
            return Position{rng.uniform(0.0, view.field.width), rng.uniform(0.0, view.field.height)};
    }
    return view.self;
}

Position step_toward(Position from, Position to, double speed, Duration dt, const Field& field) {
    const double d = distance(from, to);
    const double max_step = speed * static_cast<double>(dt.count()) / 1000.0;
    if (d <= max_step) return field.clamp(to);
    const double f = max_step / d;
    return field.clamp(Position{from.x + (to.x - from.x) * f, from.y + (to.y - from.y) * f});
}

}  // namespace hotpotato::mobility
