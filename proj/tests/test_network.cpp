// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "chaff/network.hpp"
#include "chaff/scheduler.hpp"
#include "support.hpp"

using namespace chaff;
using namespace testsupport;

namespace {

double mean_hops(const Grid& grid) {
    double total = 0.0;
    for (int y = 0; y < grid.side; ++y)
        for (int x = 0; x < grid.side; ++x)
            total += static_cast<double>(hop_count(grid, Cell{x, y}));
    return total / static_cast<double>(grid.cell_count());
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("routes are staircase shortest paths") {
    const Grid grid(11, Cell{5, 5});
    CHECK(route(grid, Cell{5, 5}).length() == 0);
    CHECK(route(grid, Cell{0, 0}).length() == 10);

    // exhaustive adjacency and length check on a small grid
    const Grid small(7, Cell{3, 2});
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 7; ++x) {
            const Route r = route(small, Cell{x, y});
            CHECK(r.length() == static_cast<std::size_t>(manhattan(Cell{x, y}, small.sink)));
            Cell prev = r.origin;
            for (const Cell& hop : r.hops) {
                CHECK(manhattan(prev, hop) == 1);
                prev = hop;
            }
            if (!r.hops.empty()) CHECK(r.hops.back() == small.sink);
        }
    }
    CHECK_THROWS_AS(route(grid, Cell{11, 0}), std::out_of_range);
    CHECK_THROWS_AS(route(grid, Cell{0, -1}), std::out_of_range);
}

TEST_CASE("hop statistics over the default grid") {
    const Grid grid = Grid::with_central_sink(32);
    CHECK(grid.sink == Cell{16, 16});
    std::size_t max_h = 0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) max_h = std::max(max_h, hop_count(grid, Cell{x, y}));
    CHECK(max_h == 32);
    CHECK(max_h <= 2 * (32 - 1));
    CHECK(mean_hops(grid) == doctest::Approx(16.0));
}

TEST_CASE("mean route length scales linearly with the grid side") {
    const double h16 = mean_hops(Grid::with_central_sink(16));
    const double h32 = mean_hops(Grid::with_central_sink(32));
    const double ratio = h32 / h16;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
}

TEST_CASE("latency records are pure routing arithmetic") {
    const Grid grid(11, Cell{5, 5});
    const double delta = 1.0;

    const LatencyRecord at_sink = report_latency(route(grid, grid.sink), 4.0, delta / 20.0);
    CHECK(at_sink.report_time == 4.0);
    CHECK(at_sink.hops == 0);

    const LatencyRecord rec = report_latency(route(grid, Cell{0, 0}), 4.0, delta / 20.0);
    CHECK(rec.latency() == doctest::Approx(delta / 2.0));
    CHECK_FALSE(rec.violates(delta));
    CHECK(rec.violates(delta / 3.0));

    CHECK_THROWS_AS(report_latency(route(grid, Cell{0, 0}), 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("hop delay of delta/(2(s-1)) never violates the bound") {
    const int side = 32;
    const Grid grid = Grid::with_central_sink(side);
    const double delta = 0.1;
    const double hop_delay = delta / (2.0 * (side - 1));
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            CHECK_FALSE(report_latency(route(grid, Cell{x, y}), 0.0, hop_delay).violates(delta));
}

TEST_CASE("latency is identical whatever the cover-traffic parameters") {
    // routing inputs only: same event, same grid, same per-hop delay
    const Grid grid = Grid::with_central_sink(32);
    const Route r = route(grid, Cell{3, 27});
    const LatencyRecord a = report_latency(r, 12.5, 0.002);
    const LatencyRecord b = report_latency(r, 12.5, 0.002);
    CHECK(a == b);
}

TEST_CASE("energy accounting: empty timeline leaves the ledger unchanged") {
    const Grid grid(5, Cell{2, 2});
    EnergyLedger ledger;
    Timeline empty;
    empty.horizon = 10.0;
    account_energy(ledger, empty, grid);
    CHECK(ledger.total_hops == 0);
    CHECK(ledger.per_event_work.empty());
}

TEST_CASE("energy accounting: per-round and per-event totals") {
    // d fakes and one real in the same round, all at distance 10
    const Grid grid(21, Cell{10, 10});
    Timeline tl;
    tl.horizon = 2.0;
    tl.round_length = 1.0;
    const Cell far{0, 10};  // distance 10
    for (int i = 0; i < 100; ++i)
        tl.records.push_back({0.001 * (i + 1), cell_index(far, 21), RecordKind::FakeOrigin});
    tl.records.push_back({0.5, cell_index(Cell{10, 0}, 21), RecordKind::RealOrigin});

    EnergyLedger ledger;
    account_energy(ledger, tl, grid);
    REQUIRE(ledger.per_round_hops.size() == 2);
    CHECK(ledger.per_round_hops[0] == 1010);
    CHECK(ledger.per_round_hops[1] == 0);
    REQUIRE(ledger.per_event_work.size() == 1);
    CHECK(ledger.per_event_work[0] == doctest::Approx(1010.0));
    CHECK(ledger.total_hops == 1010);
}

TEST_CASE("group rotation spends origin energy evenly") {
    // d divides n: every node covers once per g rounds
    SchedulerConfig config{100, 10, 1.0, Variant::Group, 51};
    const Grid grid(10, Cell{5, 5});
    const int epochs = 10;
    const int rounds = epochs * 10;  // g = 10
    const auto fakes = schedule_group(config, rounds);
    const Timeline tl = merge(fakes, std::vector<RealEvent>{}, static_cast<double>(rounds), 1.0, 10);

    EnergyLedger ledger;
    account_energy(ledger, tl, grid);
    REQUIRE(ledger.per_node_transmissions.size() == 100);
    double mean = 0.0;
    for (auto c : ledger.per_node_transmissions) mean += static_cast<double>(c);
    mean /= 100.0;
    double var = 0.0;
    for (auto c : ledger.per_node_transmissions) {
        const double dev = static_cast<double>(c) - mean;
        var += dev * dev;
    }
    const double cv = std::sqrt(var / 100.0) / mean;
    CHECK(cv < 0.05);
}

TEST_CASE("ledger dumps are tabular") {
    const Grid grid(3, Cell{1, 1});
    Timeline tl;
    tl.horizon = 2.0;
    tl.round_length = 1.0;
    tl.records = {{0.5, 0, RecordKind::FakeOrigin}, {1.5, 1, RecordKind::FakeOrigin}};
    EnergyLedger ledger;
    account_energy(ledger, tl, grid);
    std::ostringstream rounds, nodes;
    write_energy_per_round(rounds, ledger);
    write_energy_per_node(nodes, ledger);
    CHECK(rounds.str() == "round, hop_transmissions\n0, 2\n1, 1\n");
    CHECK(nodes.str().substr(0, 32) == "node, cumulative_hops\n0, 2\n1, 1\n");
}

TEST_CASE("spatial cluster assignment picks the closest unscheduled cells") {
    const Grid grid(8, Cell{4, 4});
    std::vector<Cell> all;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) all.push_back(Cell{x, y});

    CHECK(assign_spatial_cluster(grid, Cell{0, 0}, 0, all).empty());

    const auto picked = assign_spatial_cluster(grid, Cell{0, 0}, 3, all);
    REQUIRE(picked.size() == 3);
    CHECK(picked[0] == Cell{0, 0});  // the principal itself is unscheduled here
    CHECK(picked[1] == Cell{1, 0});
    CHECK(picked[2] == Cell{0, 1});

    // contract: subset of the pool, exactly b cells
    std::vector<Cell> pool = {Cell{7, 7}, Cell{6, 7}, Cell{0, 0}, Cell{3, 3}};
    const auto chosen = assign_spatial_cluster(grid, Cell{7, 6}, 2, pool);
    REQUIRE(chosen.size() == 2);
    CHECK(chosen[0] == Cell{7, 7});
    CHECK(chosen[1] == Cell{6, 7});

    CHECK_THROWS_AS(assign_spatial_cluster(grid, Cell{0, 0}, 5, pool), std::invalid_argument);
    CHECK_THROWS_AS(assign_spatial_cluster(grid, Cell{9, 0}, 1, pool), std::out_of_range);
}

}  // TEST_SUITE
