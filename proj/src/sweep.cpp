#include "hotpotato/sweep.hpp"

#include <algorithm>
#include <cstdio>

#include "hotpotato/world.hpp"

namespace hotpotato {

std::pair<std::string, std::vector<std::string>> parse_grid_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ScenarioError("grid axis '" + text + "': expected key=v1,v2,...");
    }
    std::pair<std::string, std::vector<std::string>> axis{text.substr(0, eq), {}};
    std::size_t start = eq + 1;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string::npos ? text.size() : comma;
        if (end == start) throw ScenarioError("grid axis '" + text + "': empty value");
        axis.second.push_back(text.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return axis;
}

std::vector<SweepCell> sweep(const Scenario& base, const Grid& grid, int repetitions) {
    if (grid.empty()) throw ScenarioError("sweep: grid must have at least one axis");
    if (repetitions < 1) throw ScenarioError("sweep: repetitions must be >= 1");
    for (const auto& [key, values] : grid) {
        if (values.empty()) throw ScenarioError("sweep: axis '" + key + "' has no values");
    }

    std::vector<SweepCell> cells;
    std::vector<std::size_t> index(grid.size(), 0);
    while (true) {
        SweepCell cell;
        for (std::size_t a = 0; a < grid.size(); ++a) {
            cell.settings.emplace_back(grid[a].first, grid[a].second[index[a]]);
        }
        try {
            Scenario s = base;
            for (const auto& [k, v] : cell.settings) apply_setting(s, k, v);
            validate(s);
            std::vector<double> durations;
            std::uint64_t transfers = 0, gestures = 0, failed = 0;
            for (int r = 0; r < repetitions; ++r) {
                Scenario rep = s;
                rep.seed = s.seed + static_cast<std::uint64_t>(r);
                const RunResult res = run_scenario(rep, RunOptions{false, false, 1});
                ++cell.runs;
                if (res.capped) ++cell.capped;
                durations.push_back(static_cast<double>(res.duration_ms));
                transfers += res.transfers;
                cell.violations += res.violations.size();
                for (const auto& d : res.devices) {
                    gestures += d.counters.gestures_recognized;
                    failed += d.counters.failed_actions;
                }
            }
            std::sort(durations.begin(), durations.end());
            const std::size_t n = durations.size();
            cell.median_duration_ms =
                n % 2 ? durations[n / 2] : (durations[n / 2 - 1] + durations[n / 2]) / 2.0;
            cell.mean_transfers = static_cast<double>(transfers) / n;
            cell.failed_action_rate =
                gestures ? static_cast<double>(failed) / static_cast<double>(gestures) : 0.0;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));

        std::size_t a = grid.size();
        while (a > 0) {
            --a;
            if (++index[a] < grid[a].second.size()) break;
            index[a] = 0;
            if (a == 0) return cells;
        }
    }
}

std::string sweep_table(const Grid& grid, const std::vector<SweepCell>& cells) {
    std::string out;
    for (const auto& [key, values] : grid) out += key + '\t';
    out += "runs\tcapped\tmedian_duration_ms\tmean_transfers\tfailed_action_rate\tviolations\terror\n";
    char buf[160];
    for (const SweepCell& c : cells) {
        for (const auto& [k, v] : c.settings) out += v + '\t';
        std::snprintf(buf, sizeof buf, "%d\t%d\t%.1f\t%.2f\t%.4f\t%zu\t", c.runs, c.capped,
                      c.median_duration_ms, c.mean_transfers, c.failed_action_rate, c.violations);
        out += buf;
        out += c.error.empty() ? "-" : c.error;
        out += '\n';
    }
    return out;
}

}  // namespace hotpotato
