// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: reproduces the cover-traffic experiments, manages
// the critical-value table cache, and emits CSV results plus plot scripts.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "chaff/experiment.hpp"

namespace fs = std::filesystem;
using namespace chaff;

namespace {

constexpr std::uint64_t kDefaultTableSeed = 20260808;
constexpr int kQuickRuns = 12;

std::vector<std::size_t> default_critval_sizes() {
    return {5,   8,   10,  15,  20,   30,   50,   75,   100,  150,
            200, 300, 500, 800, 1200, 2000, 3200, 5000, 8000, 10500};
}

std::vector<std::size_t> quick_critval_sizes() { return {10, 20, 50, 100, 200, 300}; }

struct CommonOpts {
    std::string out;
    std::string config_path;
    std::string table_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = 0;
    std::size_t d = 0;
    bool quick = false;
    bool dump_timeline = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--out", opts.out, "Output directory (default out/<subcommand>)");
    cmd->add_option("--seed", opts.seed, "Base seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--runs", opts.runs, "Number of independent runs");
    cmd->add_option("--d", opts.d, "Dummy population size");
    cmd->add_option("--table", opts.table_path, "Critical-value table file to reuse");
    cmd->add_flag("--quick", opts.quick, "Reduced run count for smoke tests");
}

ExperimentConfig base_config(const CommonOpts& opts) {
    ExperimentConfig config;
    if (!opts.config_path.empty()) config = load_config(opts.config_path);
    if (opts.seed_set) config.base_seed = opts.seed;
    if (opts.runs > 0) config.runs = opts.runs;
    if (opts.d > 0) config.d = opts.d;
    if (opts.quick) config.runs = std::min(config.runs, kQuickRuns);
    return config;
}

std::vector<std::size_t> dummy_sizes(const CommonOpts& opts) {
    if (opts.d > 0) return {opts.d};
    return {10, 100};
}

// Load the table when one was given, otherwise generate exactly what the
// configs need and cache it next to the results.
CriticalValueTable resolve_table(const CommonOpts& opts,
                                 const std::vector<ExperimentConfig>& configs) {
    std::set<std::size_t> required;
    std::set<double> alphas;
    for (const ExperimentConfig& c : configs) {
        for (std::size_t t : required_table_sizes(c)) required.insert(t);
        alphas.insert(c.eve.alpha);
    }
    if (!opts.table_path.empty()) {
        CriticalValueTable table = CriticalValueTable::load(opts.table_path);
        for (const ExperimentConfig& c : configs)
            for (std::size_t t : required_table_sizes(c))
                if (!table.covers(t, c.eve.alpha))
                    throw std::runtime_error("table " + opts.table_path +
                                             " does not cover sample size " + std::to_string(t));
        return table;
    }
    const std::vector<std::size_t> sizes(required.begin(), required.end());
    const std::vector<double> alpha_list(alphas.begin(), alphas.end());
    const std::uint64_t seed =
        (configs.empty() ? kDefaultTableSeed : configs.front().base_seed) ^ kTableRole;
    std::cerr << "generating critical-value table (" << sizes.size() << " sizes, 1e5 replicates)"
              << std::endl;
    CriticalValueTable table =
        generate_critical_values(sizes, alpha_list, kMinCriticalValueReplicates, seed);
    fs::create_directories(opts.out);
    table.save((fs::path(opts.out) / "critvals.txt").string());
    return table;
}

void report(const std::string& name, const ExperimentResult& result) {
    std::cout << name << ": fa_mean=" << result.fa_mean() << " tests=" << result.total_tests
              << " outage_rate=" << result.outage.outage_rate
              << " W=" << result.energy.per_event_mean
              << " latency_max=" << result.latency.max
              << " delta_violations=" << result.latency.violations << "\n";
}

int cmd_critvals(const CommonOpts& opts, std::uint64_t replicates) {
    const auto sizes = opts.quick ? quick_critval_sizes() : default_critval_sizes();
    const std::vector<double> alphas = {0.01, 0.05, 0.1};
    const std::uint64_t seed = opts.seed_set ? opts.seed : kDefaultTableSeed;
    CriticalValueTable table = generate_critical_values(sizes, alphas, replicates, seed);
    fs::create_directories(opts.out);
    const fs::path path = fs::path(opts.out) / "critvals.txt";
    table.save(path.string());
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_calibrate(const CommonOpts& opts) {
    ExperimentConfig config = base_config(opts);
    config.events_enabled = false;
    config.eve.window_policy = WindowPolicy::FixedWindow;
    config.eve.axis = FaAxis::RoundNumber;
    config.eve.round_cadence = RoundCadence::RoundOpening;
    CriticalValueTable table = resolve_table(opts, {config});
    ExperimentResult result = run_experiment(config, table);
    emit(result, opts.out);
    report("calibrate", result);
    std::cout << "baseline fa: mean=" << result.fa_mean() << " over " << result.total_tests
              << " tests\n";
    return 0;
}

int cmd_figure3(const CommonOpts& opts) {
    ExperimentConfig config = base_config(opts);
    config.events_enabled = false;
    const auto sizes = dummy_sizes(opts);
    std::vector<ExperimentConfig> probes;
    for (std::size_t d : sizes) {
        for (WindowPolicy policy : {WindowPolicy::CumulativePerRound, WindowPolicy::PerRoundOnly,
                                    WindowPolicy::FixedWindow}) {
            ExperimentConfig c = config;
            c.d = d;
            c.eve.window_policy = policy;
            c.eve.axis = FaAxis::RoundNumber;
            probes.push_back(c);
        }
    }
    CriticalValueTable table = resolve_table(opts, probes);
    for (const NamedResult& named : run_figure3(config, table, sizes)) {
        emit(named.result, fs::path(opts.out) / named.name);
        report(named.name, named.result);
    }
    return 0;
}

int run_event_panes(const CommonOpts& opts,
                    const std::vector<std::pair<std::string, ExperimentConfig>>& panes,
                    bool with_trend) {
    std::vector<ExperimentConfig> probes;
    for (const auto& [name, c] : panes) probes.push_back(c);
    CriticalValueTable table = resolve_table(opts, probes);

    // Event-free baselines per dummy size, for trend detection.
    std::map<std::size_t, FaSeries> baselines;
    if (with_trend) {
        for (const auto& [name, c] : panes) {
            if (baselines.count(c.d)) continue;
            ExperimentConfig cal = c;
            cal.events_enabled = false;
            cal.eve.axis = FaAxis::RoundNumber;
            cal.eve.round_cadence = RoundCadence::RoundOpening;
            baselines.emplace(c.d, run_experiment(cal, table).fa);
        }
    }

    for (const auto& [name, c] : panes) {
        ExperimentResult result = run_experiment(c, table);
        emit(result, fs::path(opts.out) / name);
        if (with_trend) {
            const std::vector<Detection> alarms =
                trend_detect(result.fa, c.eve, baselines.at(c.d));
            std::ofstream os(fs::path(opts.out) / name / "trend_alarms.csv");
            write_detections(os, alarms);
        }
        report(name, result);
    }
    return 0;
}

int cmd_figure4(const CommonOpts& opts) {
    const ExperimentConfig config = base_config(opts);
    return run_event_panes(opts, figure4_configs(config, dummy_sizes(opts)), false);
}

int cmd_figure5(const CommonOpts& opts) {
    const ExperimentConfig config = base_config(opts);
    return run_event_panes(opts, figure5_configs(config, dummy_sizes(opts)), true);
}

int cmd_variants(const CommonOpts& opts) {
    const ExperimentConfig config = base_config(opts);
    std::vector<ExperimentConfig> probes;
    for (Variant v : {Variant::ReferenceExponential, Variant::BaselineEpoch, Variant::Group}) {
        ExperimentConfig c = config;
        c.variant = v;
        probes.push_back(c);
    }
    CriticalValueTable table = resolve_table(opts, probes);
    const VariantComparison cmp = run_all_variants(config, table);
    fs::create_directories(opts.out);
    for (const NamedResult& named : cmp.results) {
        emit(named.result, fs::path(opts.out) / named.name);
        report(named.name, named.result);
    }
    std::ofstream os(fs::path(opts.out) / "comparison.csv");
    write_variant_csv(os, cmp);
    std::cout << "max pairwise fa_mean difference: " << cmp.max_pairwise_diff << "\n";
    return 0;
}

int cmd_run(const CommonOpts& opts) {
    const ExperimentConfig config = base_config(opts);
    CriticalValueTable table = resolve_table(opts, {config});
    ExperimentResult result = run_experiment(config, table);
    emit(result, opts.out);
    report("run", result);
    if (opts.dump_timeline) {
        auto model = config.event_model();
        if (model && model->kind == EventKind::Burst && model->burst_offset < 0.0) {
            Rng rng(run_seed(config.base_seed, 0, kEventsRole));
            model->burst_offset = burst_offset_slack(*model) * uniform_unit(rng);
        }
        const SchedulerConfig sc =
            config.scheduler_config(run_seed(config.base_seed, 1, kSchedulerRole));
        std::vector<FakeTransmission> fakes;
        switch (config.variant) {
            case Variant::BaselineEpoch: {
                const double epoch = sc.mu * static_cast<double>(sc.n) / static_cast<double>(sc.d);
                fakes = schedule_baseline(
                    sc, static_cast<int>(std::ceil(config.horizon() / epoch - 1e-9)));
                break;
            }
            case Variant::Group:
                fakes = schedule_group(sc, config.sigma_rounds);
                break;
            case Variant::ReferenceExponential:
                fakes = schedule_reference(sc, config.horizon());
                break;
        }
        std::vector<RealEvent> reals;
        if (model) {
            Rng rng(run_seed(config.base_seed, 1, kEventsRole));
            reals = generate_events(*model, config.horizon(), config.grid_side, rng);
        }
        std::ofstream os(fs::path(opts.out) / "timeline.txt");
        write_timeline(os, merge(fakes, reals, config.horizon(), config.mu, config.grid_side));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized cover-traffic simulator and eavesdropper test bench"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::uint64_t replicates = kMinCriticalValueReplicates;

    auto* critvals = app.add_subcommand("critvals", "Build or refresh the critical-value table");
    add_common(critvals, opts);
    critvals->add_option("--replicates", replicates, "Monte-Carlo replicates per sample size");

    auto* calibrate =
        app.add_subcommand("calibrate", "Event-free false-alarm baseline for trend detection");
    add_common(calibrate, opts);

    auto* figure3 = app.add_subcommand("figure3", "Window-policy and sample-size comparison");
    add_common(figure3, opts);

    auto* figure4 = app.add_subcommand("figure4", "Events (pure and perturbed) inserted into fake traffic");
    add_common(figure4, opts);

    auto* figure5 = app.add_subcommand("figure5", "Event bursts inserted into fake traffic");
    add_common(figure5, opts);

    auto* variants = app.add_subcommand("variants", "Same experiment under all three schedules");
    add_common(variants, opts);

    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    add_common(run, opts);
    run->add_option("--config", opts.config_path, "Experiment config file");
    run->add_flag("--dump-timeline", opts.dump_timeline, "Write the first run's merged timeline");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::vector<std::pair<CLI::App*, std::function<int()>>> dispatch = {
            {critvals, [&] { return cmd_critvals(opts, replicates); }},
            {calibrate, [&] { return cmd_calibrate(opts); }},
            {figure3, [&] { return cmd_figure3(opts); }},
            {figure4, [&] { return cmd_figure4(opts); }},
            {figure5, [&] { return cmd_figure5(opts); }},
            {variants, [&] { return cmd_variants(opts); }},
            {run, [&] { return cmd_run(opts); }},
        };
        for (const auto& [cmd, fn] : dispatch) {
            if (!cmd->parsed()) continue;
            if (opts.out.empty()) opts.out = "out/" + cmd->get_name();
            return fn();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
