// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaff/adversary.hpp"
#include "chaff/anderson_darling.hpp"
#include "chaff/events.hpp"
#include "chaff/network.hpp"
#include "chaff/scheduler.hpp"

namespace chaff {

inline constexpr const char* kArtifactVersion = "chaffsim 1.0.0";

// One experiment: a seeded family of runs, each generating a fake schedule,
// optionally inserting real events, and replaying the merged timeline through
// the eavesdropper. Flat on purpose so it serializes to a diffable key-value
// file and echoes back losslessly.
struct ExperimentConfig {
    Variant variant = Variant::Group;
    int grid_side = 32;
    std::size_t d = 100;
    double mu = 1.0;
    int sigma_rounds = 80;
    int runs = 250;
    std::uint64_t base_seed = 1;

    EveConfig eve;

    bool events_enabled = true;
    EventKind event_kind = EventKind::Pure;
    double perturb_fraction = 0.2;
    double perturb_mean = 0.001;
    int burst_size = 10;
    double burst_pause = 0.001;
    int burst_round = 40;
    double burst_offset = -1.0;

    double hop_delay = 0.1 / 62.0;
    double delta_bound = 0.1;

    std::size_t n() const {
        return static_cast<std::size_t>(grid_side) * static_cast<std::size_t>(grid_side);
    }

    double horizon() const { return sigma_rounds * mu; }

    SchedulerConfig scheduler_config(std::uint64_t seed) const {
        return SchedulerConfig{n(), d, mu, variant, seed};
    }

    std::optional<EventModel> event_model() const {
        if (!events_enabled) return std::nullopt;
        EventModel model;
        model.kind = event_kind;
        model.mu = mu;
        model.perturb_fraction = perturb_fraction;
        model.perturb_mean = perturb_mean;
        model.burst_size = burst_size;
        model.pause = burst_pause;
        model.burst_round = burst_round;
        model.burst_offset = burst_offset;
        return model;
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& config) {
    if (config.grid_side < 1)
        throw std::invalid_argument("ExperimentConfig: grid_side must be at least 1");
    if (config.sigma_rounds < 1)
        throw std::invalid_argument("ExperimentConfig: sigma_rounds must be at least 1");
    if (config.runs < 1)
        throw std::invalid_argument("ExperimentConfig: runs must be at least 1");
    if (!(config.hop_delay > 0.0))
        throw std::invalid_argument("ExperimentConfig: hop_delay must be positive");
    if (!(config.delta_bound > 0.0))
        throw std::invalid_argument("ExperimentConfig: delta_bound must be positive");
    validate(config.scheduler_config(0));
    validate(config.eve);
    if (auto model = config.event_model())
        validate(*model, config.horizon());
}

namespace detail {

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::BaselineEpoch: return "baseline";
        case Variant::Group: return "group";
        case Variant::ReferenceExponential: return "reference";
    }
    return "?";
}

inline Variant variant_from(const std::string& s) {
    if (s == "baseline") return Variant::BaselineEpoch;
    if (s == "group") return Variant::Group;
    if (s == "reference") return Variant::ReferenceExponential;
    throw std::invalid_argument("unknown variant: " + s);
}

inline const char* policy_name(WindowPolicy p) {
    switch (p) {
        case WindowPolicy::FixedWindow: return "fixed";
        case WindowPolicy::CumulativePerRound: return "cumulative";
        case WindowPolicy::PerRoundOnly: return "per_round";
    }
    return "?";
}

inline WindowPolicy policy_from(const std::string& s) {
    if (s == "fixed") return WindowPolicy::FixedWindow;
    if (s == "cumulative") return WindowPolicy::CumulativePerRound;
    if (s == "per_round") return WindowPolicy::PerRoundOnly;
    throw std::invalid_argument("unknown window_policy: " + s);
}

inline const char* axis_name(FaAxis a) {
    return a == FaAxis::RoundNumber ? "round" : "event";
}

inline FaAxis axis_from(const std::string& s) {
    if (s == "round") return FaAxis::RoundNumber;
    if (s == "event") return FaAxis::EventNumber;
    throw std::invalid_argument("unknown fa_axis: " + s);
}

inline const char* cadence_name(RoundCadence c) {
    return c == RoundCadence::EveryTransmission ? "every_transmission" : "round_opening";
}

inline RoundCadence cadence_from(const std::string& s) {
    if (s == "every_transmission") return RoundCadence::EveryTransmission;
    if (s == "round_opening") return RoundCadence::RoundOpening;
    throw std::invalid_argument("unknown round_cadence: " + s);
}

inline const char* event_kind_name(const ExperimentConfig& c) {
    if (!c.events_enabled) return "none";
    switch (c.event_kind) {
        case EventKind::Pure: return "pure";
        case EventKind::Perturbed: return "perturbed";
        case EventKind::Burst: return "burst";
    }
    return "?";
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "# chaffsim experiment config v1\n";
    os << "variant = " << detail::variant_name(c.variant) << "\n";
    os << "grid_side = " << c.grid_side << "\n";
    os << "d = " << c.d << "\n";
    os << "mu = " << detail::fmt_double(c.mu) << "\n";
    os << "sigma_rounds = " << c.sigma_rounds << "\n";
    os << "runs = " << c.runs << "\n";
    os << "base_seed = " << c.base_seed << "\n";
    os << "alpha = " << detail::fmt_double(c.eve.alpha) << "\n";
    os << "window = " << c.eve.window << "\n";
    os << "window_policy = " << detail::policy_name(c.eve.window_policy) << "\n";
    os << "fa_axis = " << detail::axis_name(c.eve.axis) << "\n";
    os << "round_cadence = " << detail::cadence_name(c.eve.round_cadence) << "\n";
    os << "trend_span = " << c.eve.trend_span << "\n";
    os << "trend_sigma = " << detail::fmt_double(c.eve.trend_sigma) << "\n";
    os << "event_kind = " << detail::event_kind_name(c) << "\n";
    os << "perturb_fraction = " << detail::fmt_double(c.perturb_fraction) << "\n";
    os << "perturb_mean = " << detail::fmt_double(c.perturb_mean) << "\n";
    os << "burst_size = " << c.burst_size << "\n";
    os << "burst_pause = " << detail::fmt_double(c.burst_pause) << "\n";
    os << "burst_round = " << c.burst_round << "\n";
    os << "burst_offset = " << detail::fmt_double(c.burst_offset) << "\n";
    os << "hop_delay = " << detail::fmt_double(c.hop_delay) << "\n";
    os << "delta_bound = " << detail::fmt_double(c.delta_bound) << "\n";
    return os.str();
}

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig c;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;

        if (key == "variant") c.variant = detail::variant_from(value);
        else if (key == "grid_side") c.grid_side = std::stoi(value);
        else if (key == "d") c.d = std::stoull(value);
        else if (key == "mu") c.mu = std::stod(value);
        else if (key == "sigma_rounds") c.sigma_rounds = std::stoi(value);
        else if (key == "runs") c.runs = std::stoi(value);
        else if (key == "base_seed") c.base_seed = std::stoull(value);
        else if (key == "alpha") c.eve.alpha = std::stod(value);
        else if (key == "window") c.eve.window = std::stoull(value);
        else if (key == "window_policy") c.eve.window_policy = detail::policy_from(value);
        else if (key == "fa_axis") c.eve.axis = detail::axis_from(value);
        else if (key == "round_cadence") c.eve.round_cadence = detail::cadence_from(value);
        else if (key == "trend_span") c.eve.trend_span = std::stoull(value);
        else if (key == "trend_sigma") c.eve.trend_sigma = std::stod(value);
        else if (key == "event_kind") {
            if (value == "none") {
                c.events_enabled = false;
                c.event_kind = EventKind::Pure;
            } else {
                c.events_enabled = true;
                c.event_kind = value == "pure"        ? EventKind::Pure
                               : value == "perturbed" ? EventKind::Perturbed
                               : value == "burst"     ? EventKind::Burst
                                                      : throw std::invalid_argument(
                                                            "unknown event_kind: " + value);
            }
        } else if (key == "perturb_fraction") c.perturb_fraction = std::stod(value);
        else if (key == "perturb_mean") c.perturb_mean = std::stod(value);
        else if (key == "burst_size") c.burst_size = std::stoi(value);
        else if (key == "burst_pause") c.burst_pause = std::stod(value);
        else if (key == "burst_round") c.burst_round = std::stoi(value);
        else if (key == "burst_offset") c.burst_offset = std::stod(value);
        else if (key == "hop_delay") c.hop_delay = std::stod(value);
        else if (key == "delta_bound") c.delta_bound = std::stod(value);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(is);
}

struct EnergySummary {
    double per_event_mean = 0.0;
    double per_node_cv = 0.0;
    std::uint64_t total_hops = 0;
    std::uint64_t events = 0;
};

struct LatencySummary {
    double mean = 0.0;
    double max = 0.0;
    std::uint64_t violations = 0;
    std::uint64_t events = 0;
    bool worst_case_ok = true;
};

struct ExperimentResult {
    FaSeries fa;
    OutageStats outage;
    EnergySummary energy;
    EnergyLedger ledger;  // accumulated over all runs
    LatencySummary latency;
    std::uint64_t total_tests = 0;
    std::uint64_t total_rejects = 0;
    ExperimentConfig config;
    std::string version = kArtifactVersion;

    double fa_mean() const {
        return total_tests ? static_cast<double>(total_rejects) / static_cast<double>(total_tests)
                           : 0.0;
    }
};

inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const CriticalValueTable& table) {
    validate(config);
    const Grid grid = Grid::with_central_sink(config.grid_side);
    const double horizon = config.horizon();

    std::optional<EventModel> model = config.event_model();
    if (model && model->kind == EventKind::Burst && model->burst_offset < 0.0) {
        // Drawn once per experiment, not per run: the burst stays in the same
        // round across all runs.
        Rng rng(run_seed(config.base_seed, 0, kEventsRole));
        model->burst_offset = burst_offset_slack(*model) * uniform_unit(rng);
    }

    EnergyLedger ledger;
    std::vector<FaSeries> series;
    series.reserve(static_cast<std::size_t>(config.runs));
    std::uint64_t outages = 0, tests = 0, rejects = 0;
    LatencySummary latency;
    const int max_hops = std::max(grid.sink.x, grid.side - 1 - grid.sink.x) +
                         std::max(grid.sink.y, grid.side - 1 - grid.sink.y);
    latency.worst_case_ok = max_hops * config.hop_delay <= config.delta_bound;
    double latency_sum = 0.0;

    for (int r = 1; r <= config.runs; ++r) {
        const SchedulerConfig sc =
            config.scheduler_config(run_seed(config.base_seed, static_cast<std::uint64_t>(r), kSchedulerRole));
        std::vector<FakeTransmission> fakes;
        switch (config.variant) {
            case Variant::BaselineEpoch: {
                const double epoch_length = sc.mu * static_cast<double>(sc.n) / static_cast<double>(sc.d);
                fakes = schedule_baseline(sc, static_cast<int>(std::ceil(horizon / epoch_length - 1e-9)));
                break;
            }
            case Variant::Group:
                fakes = schedule_group(sc, config.sigma_rounds);
                break;
            case Variant::ReferenceExponential:
                fakes = schedule_reference(sc, horizon);
                break;
        }

        std::vector<RealEvent> reals;
        if (model) {
            Rng rng(run_seed(config.base_seed, static_cast<std::uint64_t>(r), kEventsRole));
            reals = generate_events(*model, horizon, config.grid_side, rng);
        }

        const Timeline timeline = merge(fakes, reals, horizon, config.mu, config.grid_side);
        auto [detections, fa] = observe(timeline, config.eve, table);
        fa.seeds = {sc.seed};

        account_energy(ledger, timeline, grid);
        for (const RealEvent& e : reals) {
            if (e.time >= horizon) continue;
            const LatencyRecord rec = report_latency(route(grid, e.cell), e.time, config.hop_delay);
            latency_sum += rec.latency();
            latency.max = std::max(latency.max, rec.latency());
            latency.violations += rec.violates(config.delta_bound) ? 1u : 0u;
            latency.events += 1;
        }

        const auto run_tests = static_cast<std::uint64_t>(std::llround(fa.total_tests()));
        const OutageStats run_outage = outage_stats(detections, run_tests);
        outages += run_outage.outage_count;
        tests += run_tests;
        rejects += static_cast<std::uint64_t>(std::llround(fa.total_rejects()));
        series.push_back(std::move(fa));
    }

    ExperimentResult result;
    result.fa = fa_average(series);
    result.outage =
        OutageStats{outages, tests,
                    tests ? static_cast<double>(outages) / static_cast<double>(tests) : 0.0};
    result.total_tests = tests;
    result.total_rejects = rejects;
    if (latency.events > 0) latency.mean = latency_sum / static_cast<double>(latency.events);
    result.latency = latency;

    EnergySummary energy;
    energy.total_hops = ledger.total_hops;
    energy.events = ledger.per_event_work.size();
    if (!ledger.per_event_work.empty()) {
        double sum = 0.0;
        for (double w : ledger.per_event_work) sum += w;
        energy.per_event_mean = sum / static_cast<double>(ledger.per_event_work.size());
    }
    if (!ledger.per_node_transmissions.empty()) {
        double sum = 0.0;
        for (auto c : ledger.per_node_transmissions) sum += static_cast<double>(c);
        const double mean = sum / static_cast<double>(ledger.per_node_transmissions.size());
        if (mean > 0.0) {
            double var = 0.0;
            for (auto c : ledger.per_node_transmissions) {
                const double dev = static_cast<double>(c) - mean;
                var += dev * dev;
            }
            var /= static_cast<double>(ledger.per_node_transmissions.size());
            energy.per_node_cv = std::sqrt(var) / mean;
        }
    }
    result.energy = energy;
    result.ledger = std::move(ledger);
    result.config = config;
    return result;
}

struct NamedResult {
    std::string name;
    ExperimentResult result;
};

// Event-free sub-experiments contrasting window policies and dummy population
// sizes: (A) reference exponential under cumulative windows, (B) group under
// per-round windows, (C) group under cumulative windows, (D) group under a
// fixed window, each for the requested dummy sizes.
inline std::vector<NamedResult> run_figure3(const ExperimentConfig& base,
                                            const CriticalValueTable& table,
                                            std::span<const std::size_t> dummy_sizes) {
    if (base.events_enabled)
        throw std::invalid_argument("run_figure3: expects an event-free configuration");
    struct Pane {
        const char* name;
        Variant variant;
        WindowPolicy policy;
    };
    static constexpr Pane panes[] = {
        {"paneA", Variant::ReferenceExponential, WindowPolicy::CumulativePerRound},
        {"paneB", Variant::Group, WindowPolicy::PerRoundOnly},
        {"paneC", Variant::Group, WindowPolicy::CumulativePerRound},
        {"paneD", Variant::Group, WindowPolicy::FixedWindow},
    };
    std::vector<NamedResult> out;
    for (const Pane& pane : panes) {
        for (std::size_t d : dummy_sizes) {
            ExperimentConfig c = base;
            c.variant = pane.variant;
            c.d = d;
            c.events_enabled = false;
            c.eve.window_policy = pane.policy;
            c.eve.axis = FaAxis::RoundNumber;
            // pane D reads "test the last 200 at each new round"
            if (pane.policy == WindowPolicy::FixedWindow)
                c.eve.round_cadence = RoundCadence::RoundOpening;
            out.push_back(NamedResult{pane.name + std::string("_d") + std::to_string(d),
                                      run_experiment(c, table)});
        }
    }
    return out;
}

// Real events inserted into the fake schedule, tested at each insertion:
// (a) events exactly as modeled, (b)-(d) 20% of gaps swapped for short ones.
inline std::vector<std::pair<std::string, ExperimentConfig>> figure4_configs(
    const ExperimentConfig& base, std::span<const std::size_t> dummy_sizes) {
    struct Pane {
        const char* name;
        bool perturbed;
        double mean_divisor;
    };
    static constexpr Pane panes[] = {
        {"paneA", false, 0.0},
        {"paneB", true, 1000.0},
        {"paneC", true, 100.0},
        {"paneD", true, 10.0},
    };
    std::vector<std::pair<std::string, ExperimentConfig>> out;
    for (const Pane& pane : panes) {
        for (std::size_t d : dummy_sizes) {
            ExperimentConfig c = base;
            c.d = d;
            c.events_enabled = true;
            c.event_kind = pane.perturbed ? EventKind::Perturbed : EventKind::Pure;
            if (pane.perturbed) {
                c.perturb_fraction = 0.2;
                c.perturb_mean = c.mu / pane.mean_divisor;
            }
            c.eve.window_policy = WindowPolicy::FixedWindow;
            c.eve.axis = FaAxis::EventNumber;
            out.emplace_back(pane.name + std::string("_d") + std::to_string(d), c);
        }
    }
    return out;
}

// One burst of ten events superposed on the modeled stream, with pauses of
// mu/1000, mu/100 and mu/10.
inline std::vector<std::pair<std::string, ExperimentConfig>> figure5_configs(
    const ExperimentConfig& base, std::span<const std::size_t> dummy_sizes) {
    struct Pane {
        const char* name;
        double pause_divisor;
    };
    static constexpr Pane panes[] = {
        {"paneA", 1000.0},
        {"paneB", 100.0},
        {"paneC", 10.0},
    };
    std::vector<std::pair<std::string, ExperimentConfig>> out;
    for (const Pane& pane : panes) {
        for (std::size_t d : dummy_sizes) {
            ExperimentConfig c = base;
            c.d = d;
            c.events_enabled = true;
            c.event_kind = EventKind::Burst;
            c.burst_size = 10;
            c.burst_pause = c.mu / pane.pause_divisor;
            c.burst_round = base.sigma_rounds / 2;
            c.eve.window_policy = WindowPolicy::FixedWindow;
            c.eve.axis = FaAxis::EventNumber;
            out.emplace_back(pane.name + std::string("_d") + std::to_string(d), c);
        }
    }
    return out;
}

struct VariantComparison {
    std::vector<NamedResult> results;
    double max_pairwise_diff = 0.0;
};

// The same experiment under all three fake-traffic mechanisms, sharing the
// base seed so event randomness matches across variants.
inline VariantComparison run_all_variants(const ExperimentConfig& base,
                                          const CriticalValueTable& table) {
    static constexpr Variant variants[] = {Variant::ReferenceExponential, Variant::BaselineEpoch,
                                           Variant::Group};
    VariantComparison cmp;
    for (Variant v : variants) {
        ExperimentConfig c = base;
        c.variant = v;
        cmp.results.push_back(NamedResult{detail::variant_name(v), run_experiment(c, table)});
    }
    for (const NamedResult& a : cmp.results)
        for (const NamedResult& b : cmp.results)
            cmp.max_pairwise_diff =
                std::max(cmp.max_pairwise_diff, std::abs(a.result.fa_mean() - b.result.fa_mean()));
    return cmp;
}

inline void write_variant_csv(std::ostream& os, const VariantComparison& cmp) {
    os << "variant, fa_mean, tests, rejects\n";
    char buf[128];
    for (const NamedResult& r : cmp.results) {
        std::snprintf(buf, sizeof(buf), "%s, %.9g, %llu, %llu", r.name.c_str(),
                      r.result.fa_mean(), static_cast<unsigned long long>(r.result.total_tests),
                      static_cast<unsigned long long>(r.result.total_rejects));
        os << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "max_pairwise_diff, %.9g, 0, 0", cmp.max_pairwise_diff);
    os << buf << "\n";
}

inline void emit(const ExperimentResult& result, const std::filesystem::path& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);

    {
        std::ofstream os(directory / "fa_series.csv");
        write_fa_csv(os, result.fa);
    }
    {
        std::ofstream os(directory / "summary.csv");
        os << "outage_rate, energy_per_event, latency_mean, latency_max, delta_violations\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.9g, %.9g, %.9g, %.9g, %llu", result.outage.outage_rate,
                      result.energy.per_event_mean, result.latency.mean, result.latency.max,
                      static_cast<unsigned long long>(result.latency.violations));
        os << buf << "\n";
    }
    {
        std::ofstream os(directory / "energy_per_round.csv");
        write_energy_per_round(os, result.ledger);
    }
    {
        std::ofstream os(directory / "energy_per_node.csv");
        write_energy_per_node(os, result.ledger);
    }
    {
        std::ofstream os(directory / "config.echo");
        os << serialize_config(result.config);
        os << "# artifact_version: " << result.version << "\n";
    }
    {
        std::ofstream os(directory / "plot.gp");
        os << "set datafile separator comma\n"
              "set key autotitle columnhead\n"
              "set xlabel 'index'\n"
              "set ylabel 'false-alarm rate'\n"
              "set terminal pngcairo size 900,600\n"
              "set output 'fa_series.png'\n"
              "plot 'fa_series.csv' using 1:2 with lines lw 2\n";
    }
}

// Table sizes an experiment can ask for, one geometric rung at a time up to
// the largest sample the window policy can assemble.
inline std::vector<std::size_t> table_size_ladder(std::size_t max_needed) {
    static constexpr std::size_t rungs[] = {5,   8,   10,  15,  20,   30,   50,   75,   100, 150,
                                            200, 300, 500, 800, 1200, 2000, 3200, 5000, 8000};
    std::vector<std::size_t> out;
    for (std::size_t r : rungs)
        if (r < max_needed) out.push_back(r);
    out.push_back(std::max<std::size_t>(max_needed, 5));
    return out;
}

inline std::vector<std::size_t> required_table_sizes(const ExperimentConfig& config) {
    switch (config.eve.window_policy) {
        case WindowPolicy::FixedWindow:
            return {config.eve.window};
        case WindowPolicy::PerRoundOnly: {
            const auto spread = static_cast<std::size_t>(
                5.0 * std::sqrt(static_cast<double>(config.d)) + 2.0);
            return table_size_ladder(config.d + spread);
        }
        case WindowPolicy::CumulativePerRound: {
            const auto max_needed = static_cast<std::size_t>(
                1.1 * static_cast<double>(config.d) * static_cast<double>(config.sigma_rounds) + 16.0);
            return table_size_ladder(max_needed);
        }
    }
    throw std::logic_error("required_table_sizes: unknown policy");
}

}  // namespace chaff
