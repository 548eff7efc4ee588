// Command-line front end: run, sweep, validate, merge-logs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hotpotato/backbone.hpp"
#include "hotpotato/persistence.hpp"
#include "hotpotato/scenario.hpp"
#include "hotpotato/sweep.hpp"
#include "hotpotato/world.hpp"

namespace fs = std::filesystem;
using namespace hotpotato;

namespace {

struct Common {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> duration_cap_ms;
    std::vector<std::string> settings;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--scenario", c.scenario_path, "Scenario file (default: indoor-room preset)");
    app->add_option("--seed", c.seed, "Override the scenario seed");
    app->add_option("--duration-cap", c.duration_cap_ms, "Game duration cap in ms");
    app->add_option("--set", c.settings, "Extra key=value setting, applied after the file");
}

Scenario load(const Common& c) {
    Scenario s = c.scenario_path.empty() ? preset("indoor-room") : load_scenario(c.scenario_path);
    for (const std::string& kv : c.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ScenarioError("--set '" + kv + "': expected key=value");
        apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) s.seed = *c.seed;
    if (c.duration_cap_ms) s.duration_cap = Duration{*c.duration_cap_ms};
    validate(s);
    return s;
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << data;
}

int cmd_run(const Common& c, const std::string& out_dir, bool trace) {
    const Scenario s = load(c);
    const RunResult r = run_scenario(s, RunOptions{true, trace, 1});
    fs::create_directories(out_dir);
    for (const auto& [name, data] : r.artifacts) write_file(fs::path(out_dir) / name, data);
    std::cout << "seed " << s.seed << ": winner "
              << (r.winner ? std::to_string(*r.winner) : std::string("none")) << ", "
              << r.duration_ms << " ms, " << r.transfers << " transfers, " << r.violations.size()
              << " violations\n";
    for (const Violation& v : r.violations) {
        std::cerr << "violation " << v.invariant << " at " << to_ms(v.at) << " ms: " << v.detail
                  << '\n';
    }
    return r.ok() ? 0 : 1;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& axes, int reps,
              const std::string& out_dir) {
    const Scenario s = load(c);
    Grid grid;
    for (const std::string& a : axes) grid.push_back(parse_grid_axis(a));
    const auto cells = sweep(s, grid, reps);
    const std::string table = sweep_table(grid, cells);
    std::cout << table;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "sweep.tsv", table);
    }
    for (const auto& cell : cells) {
        if (!cell.error.empty() || cell.violations) return 1;
    }
    return 0;
}

int cmd_validate(const Common& c) {
    std::cout << to_text(load(c));
    return 0;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out_dir) {
    backbone::Engine engine;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read " + path);
        auto read = persistence::read_log(in);
        for (const std::string& q : read.quarantined) engine.quarantine(path + ": " + q);
        engine.merge(read.entries);
    }
    const backbone::EngineView view = engine.view();
    std::ostringstream out;
    out << "# winner="
        << (view.state.winner ? std::to_string(*view.state.winner) : std::string("none")) << '\n';
    if (view.state.ended_at) {
        out << "# duration_ms=" << to_ms(*view.state.ended_at - view.state.started_at) << '\n';
    }
    out << "# entries=" << view.log.size() << " duplicates_dropped=" << engine.duplicates_dropped()
        << '\n';
    for (const auto& rep : view.reports) {
        out << "# report=" << to_string(rep.kind) << " t=" << to_ms(rep.at) << " dev=" << rep.device
            << ' ' << rep.detail << '\n';
    }
    persistence::write_log(out, view.log);
    if (out_dir.empty()) {
        std::cout << out.str();
    } else {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "engine.log", out.str());
    }
    std::size_t problems = 0;
    for (const auto& rep : view.reports) {
        if (rep.kind != backbone::ReportKind::DuplicateResolved) ++problems;
    }
    return problems ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hot potato game simulator"};
    app.require_subcommand(1);

    Common run_c, sweep_c, val_c;
    std::string run_out = "out", sweep_out, merge_out;
    bool trace = false;
    std::vector<std::string> axes, inputs;
    int reps = 0;

    auto* run = app.add_subcommand("run", "Simulate one game and write its artifacts");
    add_common(run, run_c);
    run->add_option("--out-dir", run_out, "Artifact directory");
    run->add_flag("--trace", trace, "Also write the scheduler trace");

    auto* sw = app.add_subcommand("sweep", "Run a parameter grid with repetitions");
    add_common(sw, sweep_c);
    sw->add_option("--grid", axes, "key=v1,v2,... (repeatable)")->required();
    sw->add_option("--reps", reps, "Repetitions per cell")->required();
    sw->add_option("--out-dir", sweep_out, "Write sweep.tsv here");

    auto* val = app.add_subcommand("validate", "Check a scenario and print it canonically");
    add_common(val, val_c);

    auto* merge = app.add_subcommand("merge-logs", "Merge extracted device logs like the Engine");
    merge->add_option("logs", inputs, "Device log files")->required();
    merge->add_option("--out-dir", merge_out, "Write engine.log here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_c, run_out, trace);
        if (*sw) return cmd_sweep(sweep_c, axes, reps, sweep_out);
        if (*val) return cmd_validate(val_c);
        if (*merge) return cmd_merge(inputs, merge_out);
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
