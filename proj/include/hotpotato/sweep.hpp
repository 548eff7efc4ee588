#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hotpotato/scenario.hpp"

namespace hotpotato {

/// key -> candidate values; cells are the cartesian product in grid order.
using Grid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Parses "key=v1,v2,v3".
std::pair<std::string, std::vector<std::string>> parse_grid_axis(const std::string& text);

struct SweepCell {
    std::vector<std::pair<std::string, std::string>> settings;
    int runs = 0;
    int capped = 0;
    double median_duration_ms = 0.0;
    double mean_transfers = 0.0;
    /// failed_actions / gestures_recognized over all runs of the cell.
    double failed_action_rate = 0.0;
    std::size_t violations = 0;
    /// Empty unless a run threw; the sweep moves on to the next cell.
    std::string error;
};

/// Repetition r uses seed base.seed + r.
std::vector<SweepCell> sweep(const Scenario& base, const Grid& grid, int repetitions);

/// Tab-separated table with a header row.
std::string sweep_table(const Grid& grid, const std::vector<SweepCell>& cells);

}  // namespace hotpotato
