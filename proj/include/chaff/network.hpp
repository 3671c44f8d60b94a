// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "chaff/cell.hpp"
#include "chaff/scheduler.hpp"

namespace chaff {

// Square grid of side s (n = s^2 cells) with a single sink.
struct Grid {
    int side = 1;
    Cell sink;

    Grid(int side_, Cell sink_) : side(side_), sink(sink_) {
        if (side < 1)
            throw std::invalid_argument("Grid: side must be at least 1");
        if (!contains(sink))
            throw std::invalid_argument("Grid: sink out of bounds");
    }

    static Grid with_central_sink(int side) {
        return Grid(side, Cell{side / 2, side / 2});
    }

    bool contains(const Cell& c) const {
        return c.x >= 0 && c.x < side && c.y >= 0 && c.y < side;
    }

    std::size_t cell_count() const {
        return static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    }
};

// Predetermined route: x-first staircase to the sink, one hop per adjacent
// cell, length equal to the Manhattan distance. Every origin (dummy or real)
// emits the same kind of route, so routes carry no distinguishing pattern.
struct Route {
    Cell origin;
    std::vector<Cell> hops;  // cells visited after the origin, ending at the sink

    std::size_t length() const { return hops.size(); }
};

inline std::size_t hop_count(const Grid& grid, const Cell& origin) {
    if (!grid.contains(origin))
        throw std::out_of_range("hop_count: origin out of bounds");
    return static_cast<std::size_t>(manhattan(origin, grid.sink));
}

inline Route route(const Grid& grid, const Cell& origin) {
    if (!grid.contains(origin))
        throw std::out_of_range("route: origin out of bounds");
    Route r;
    r.origin = origin;
    Cell at = origin;
    while (at.x != grid.sink.x) {
        at.x += grid.sink.x > at.x ? 1 : -1;
        r.hops.push_back(at);
    }
    while (at.y != grid.sink.y) {
        at.y += grid.sink.y > at.y ? 1 : -1;
        r.hops.push_back(at);
    }
    return r;
}

// Relays forward immediately with a constant per-hop delay, so report time is
// a pure function of the route; the cover-traffic schedule plays no part.
struct LatencyRecord {
    double event_time = 0.0;
    double report_time = 0.0;
    std::size_t hops = 0;
    double hop_delay = 0.0;

    double latency() const { return static_cast<double>(hops) * hop_delay; }
    bool violates(double delta_bound) const { return latency() > delta_bound; }

    friend bool operator==(const LatencyRecord& a, const LatencyRecord& b) {
        return a.event_time == b.event_time && a.report_time == b.report_time &&
               a.hops == b.hops && a.hop_delay == b.hop_delay;
    }
};

inline LatencyRecord report_latency(const Route& r, double event_time, double hop_delay) {
    if (!(hop_delay > 0.0))
        throw std::invalid_argument("report_latency: hop_delay must be positive");
    LatencyRecord rec;
    rec.event_time = event_time;
    rec.hops = r.length();
    rec.hop_delay = hop_delay;
    rec.report_time = event_time + static_cast<double>(rec.hops) * hop_delay;
    return rec;
}

// Hop-transmission bookkeeping. Per-round, per-event and per-node hop figures
// are hop-weighted (a route of length h costs h forwarded packets); the
// per-node transmission counts tally how often each node served as an origin,
// the fairness measure for rotating the dummy role.
struct EnergyLedger {
    std::vector<std::uint64_t> per_round_hops;
    std::vector<double> per_event_work;
    std::vector<std::uint64_t> per_node_transmissions;
    std::vector<std::uint64_t> per_node_hops;
    std::uint64_t total_hops = 0;
};

inline EnergyLedger& account_energy(EnergyLedger& ledger, const Timeline& timeline,
                                    const Grid& grid) {
    const std::size_t rounds = timeline.rounds();
    if (ledger.per_round_hops.size() < rounds) ledger.per_round_hops.resize(rounds, 0);
    if (ledger.per_node_transmissions.size() < grid.cell_count())
        ledger.per_node_transmissions.resize(grid.cell_count(), 0);
    if (ledger.per_node_hops.size() < grid.cell_count())
        ledger.per_node_hops.resize(grid.cell_count(), 0);

    std::vector<std::uint64_t> fake_hops_per_round(rounds, 0);
    for (const TimelineRecord& rec : timeline.records) {
        const Cell origin = cell_at(rec.node, grid.side);
        const auto hops = static_cast<std::uint64_t>(hop_count(grid, origin));
        const auto round = static_cast<std::size_t>(rec.time / timeline.round_length);
        if (round >= rounds)
            throw std::out_of_range("account_energy: record beyond the timeline horizon");
        ledger.per_round_hops[round] += hops;
        ledger.per_node_transmissions[rec.node] += 1;
        ledger.per_node_hops[rec.node] += hops;
        ledger.total_hops += hops;
        if (rec.kind == RecordKind::FakeOrigin) fake_hops_per_round[round] += hops;
    }
    for (const TimelineRecord& rec : timeline.records) {
        if (rec.kind != RecordKind::RealOrigin) continue;
        const auto round = static_cast<std::size_t>(rec.time / timeline.round_length);
        const Cell origin = cell_at(rec.node, grid.side);
        ledger.per_event_work.push_back(static_cast<double>(fake_hops_per_round[round]) +
                                        static_cast<double>(hop_count(grid, origin)));
    }
    return ledger;
}

inline void write_energy_per_round(std::ostream& os, const EnergyLedger& ledger) {
    os << "round, hop_transmissions\n";
    for (std::size_t r = 0; r < ledger.per_round_hops.size(); ++r)
        os << r << ", " << ledger.per_round_hops[r] << "\n";
}

inline void write_energy_per_node(std::ostream& os, const EnergyLedger& ledger) {
    os << "node, cumulative_hops\n";
    for (std::size_t n = 0; n < ledger.per_node_hops.size(); ++n)
        os << n << ", " << ledger.per_node_hops[n] << "\n";
}

// For spatially correlated bursts: pick the b unscheduled cells closest to the
// principal cell (Euclidean distance, ties by row-major order) to act as
// representatives of additional groups. The rest of the dummy population is
// drawn uniformly by the caller.
inline std::vector<Cell> assign_spatial_cluster(const Grid& grid, const Cell& principal,
                                                std::size_t b, std::span<const Cell> unscheduled) {
    if (!grid.contains(principal))
        throw std::out_of_range("assign_spatial_cluster: principal out of bounds");
    if (unscheduled.size() < b)
        throw std::invalid_argument("assign_spatial_cluster: not enough unscheduled cells");
    std::vector<Cell> pool(unscheduled.begin(), unscheduled.end());
    std::sort(pool.begin(), pool.end(), [&](const Cell& a, const Cell& c) {
        const auto da = squared_distance(a, principal);
        const auto dc = squared_distance(c, principal);
        if (da != dc) return da < dc;
        return cell_index(a, grid.side) < cell_index(c, grid.side);
    });
    pool.resize(b);
    return pool;
}

}  // namespace chaff
