// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "chaff/scheduler.hpp"
#include "support.hpp"

using namespace chaff;
using namespace testsupport;

namespace {

std::vector<double> gaps_of(const std::vector<FakeTransmission>& xs) {
    std::vector<double> out;
    for (std::size_t i = 1; i < xs.size(); ++i) out.push_back(xs[i].time - xs[i - 1].time);
    return out;
}

// Gaps that straddle a round (or epoch) boundary vs. gaps inside one.
void split_gaps(const std::vector<FakeTransmission>& xs, std::vector<double>& within,
                std::vector<double>& boundary) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double gap = xs[i].time - xs[i - 1].time;
        if (xs[i].round != xs[i - 1].round) boundary.push_back(gap);
        else within.push_back(gap);
    }
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("config validation") {
    CHECK_THROWS_AS(validate(SchedulerConfig{0, 1, 1.0, Variant::Group, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{10, 11, 1.0, Variant::Group, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{10, 0, 1.0, Variant::Group, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{10, 5, 0.0, Variant::Group, 0}),
                    std::invalid_argument);
}

TEST_CASE("epoch schedule: every node once per epoch, inside the epoch") {
    SchedulerConfig config{1000, 100, 1.0, Variant::BaselineEpoch, 7};
    const auto xs = schedule_baseline(config, 3);
    CHECK(xs.size() == 3000);
    const double epoch_length = 10.0;  // mu * n / d
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> seen;
    double prev = -1.0;
    for (const FakeTransmission& x : xs) {
        REQUIRE(x.time >= prev);
        prev = x.time;
        REQUIRE(x.time > x.round * epoch_length);
        REQUIRE(x.time <= (x.round + 1) * epoch_length);
        seen[{x.node, x.round}] += 1;
    }
    CHECK(seen.size() == 3000);  // no node transmits twice in an epoch
}

TEST_CASE("epoch schedule: degenerate single-node network") {
    SchedulerConfig config{1, 1, 2.0, Variant::BaselineEpoch, 1};
    const auto xs = schedule_baseline(config, 1);
    REQUIRE(xs.size() == 1);
    CHECK(xs[0].time > 0.0);
    CHECK(xs[0].time <= 2.0);
}

TEST_CASE("epoch schedule: gaps look exponential of mean mu/d") {
    SchedulerConfig config{1000, 100, 1.0, Variant::BaselineEpoch, 21};
    const auto xs = schedule_baseline(config, 1);
    const auto gaps = gaps_of(xs);
    CHECK(std::abs(mean_of(gaps) - 0.01) < 0.001);
    const ExpDist law(0.01);
    const double dist = ks_distance(gaps, [&](double x) { return law.cdf(x); });
    CHECK(dist < ks_one_sample_critical(0.01, static_cast<double>(gaps.size())));
}

TEST_CASE("group schedule: exactly d transmissions in every round") {
    SchedulerConfig config{1024, 100, 1.0, Variant::Group, 3};
    const int rounds = 50;
    const auto xs = schedule_group(config, rounds);
    CHECK(xs.size() == static_cast<std::size_t>(rounds) * 100);
    std::vector<int> per_round(rounds, 0);
    for (const FakeTransmission& x : xs) {
        REQUIRE(x.round < static_cast<std::uint32_t>(rounds));
        REQUIRE(x.time > x.round * config.mu);
        REQUIRE(x.time <= (x.round + 1) * config.mu);
        per_round[x.round] += 1;
    }
    for (int c : per_round) CHECK(c == 100);
}

TEST_CASE("group schedule: members rotate and leftovers stay idle") {
    SchedulerConfig config{47, 4, 1.0, Variant::Group, 5};  // g = 11, 3 idle nodes
    const auto members = group_assignment(config);
    CHECK(members.size() == 44);
    const int rounds = 22;  // two full rotations
    const auto xs = schedule_group(config, rounds);
    std::vector<int> count(config.n, 0);
    for (const FakeTransmission& x : xs) count[x.node] += 1;
    int idle = 0, twice = 0;
    for (std::size_t node = 0; node < config.n; ++node) {
        if (count[node] == 0) ++idle;
        if (count[node] == 2) ++twice;
    }
    CHECK(idle == 3);
    CHECK(twice == 44);
}

TEST_CASE("group schedule with d=1: gaps are triangular, not exponential") {
    SchedulerConfig config{16, 1, 1.0, Variant::Group, 17};
    const auto xs = schedule_group(config, 10000);
    const auto gaps = gaps_of(xs);
    // triangular on [0, 2mu]
    auto tri_cdf = [](double z) {
        if (z <= 0.0) return 0.0;
        if (z >= 2.0) return 1.0;
        return z <= 1.0 ? z * z / 2.0 : 1.0 - (2.0 - z) * (2.0 - z) / 2.0;
    };
    CHECK(ks_distance(gaps, tri_cdf) <
          ks_one_sample_critical(0.01, static_cast<double>(gaps.size())));
    const ExpDist exp_law(1.0);
    CHECK(ks_distance(gaps, [&](double z) { return exp_law.cdf(z); }) >
          5.0 * ks_one_sample_critical(0.01, static_cast<double>(gaps.size())));
}

TEST_CASE("group schedule: boundary gaps follow the shape-2 Erlang law") {
    SchedulerConfig config{1024, 100, 1.0, Variant::Group, 29};
    const auto xs = schedule_group(config, 10000);
    std::vector<double> within, boundary;
    split_gaps(xs, within, boundary);

    CHECK(boundary.size() == 9999);
    // boundary gaps are 1/d of the stream
    const double fraction =
        static_cast<double>(boundary.size()) / static_cast<double>(within.size() + boundary.size());
    CHECK(fraction == doctest::Approx(0.01).epsilon(0.05));

    CHECK(std::abs(mean_of(boundary) - 0.02) / 0.02 < 0.02);
    CHECK(std::abs(mean_of(within) - 0.01) / 0.01 < 0.02);

    Rng rng(31);
    ErlangDist erlang(2, 0.01);
    std::vector<double> direct(100000);
    for (auto& v : direct) v = erlang.sample(rng);
    const double dist = ks_distance_two_sample(boundary, direct);
    CHECK(dist < ks_two_sample_critical(0.01, static_cast<double>(boundary.size()), 1e5));
}

TEST_CASE("epoch schedule: boundary gaps follow the same Erlang law") {
    SchedulerConfig config{200, 100, 1.0, Variant::BaselineEpoch, 33};
    const auto xs = schedule_baseline(config, 10000);  // epoch = 2 mu, 200 draws each
    std::vector<double> within, boundary;
    split_gaps(xs, within, boundary);
    CHECK(boundary.size() == 9999);
    // boundary of an epoch of n draws behaves like the round boundary of d
    // draws scaled: mean 2 * epoch/n = 2 mu/d
    CHECK(std::abs(mean_of(boundary) - 0.02) / 0.02 < 0.03);
    Rng rng(37);
    ErlangDist erlang(2, 0.01);
    std::vector<double> direct(100000);
    for (auto& v : direct) v = erlang.sample(rng);
    CHECK(ks_distance_two_sample(boundary, direct) <
          ks_two_sample_critical(0.01, static_cast<double>(boundary.size()), 1e5));
}

TEST_CASE("schedules are reproducible from their seed") {
    SchedulerConfig config{256, 16, 1.0, Variant::Group, 99};
    const auto a = schedule_group(config, 20);
    const auto b = schedule_group(config, 20);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].node == b[i].node);
    }
    config.seed = 100;
    const auto c = schedule_group(config, 20);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].time != c[i].time) differs = true;
    CHECK(differs);
}

TEST_CASE("reference schedule: expected count and exponential gaps") {
    SchedulerConfig config{1024, 100, 1.0, Variant::ReferenceExponential, 41};
    CHECK(schedule_reference(config, 0.0).empty());

    double total = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        SchedulerConfig c = config;
        c.seed = 1000 + s;
        total += static_cast<double>(schedule_reference(c, 80.0).size());
    }
    const double mean_count = total / 50.0;
    CHECK(std::abs(mean_count - 8000.0) < 3.0 * std::sqrt(8000.0 / 50.0));

    const auto xs = schedule_reference(config, 200.0);
    const auto gaps = gaps_of(xs);
    const ExpDist law(0.01);
    CHECK(ks_distance(gaps, [&](double x) { return law.cdf(x); }) <
          ks_one_sample_critical(0.01, static_cast<double>(gaps.size())));
}

TEST_CASE("merge: fakes only, insertion splitting, and full preservation") {
    std::vector<FakeTransmission> fakes = {{1.0, 4, 0}, {3.0, 9, 1}};
    const Timeline only = merge(fakes, std::vector<RealEvent>{}, 10.0, 1.0, 4);
    CHECK(only.records.size() == 2);
    CHECK(only.records[0].kind == RecordKind::FakeOrigin);

    std::vector<RealEvent> reals = {{2.0, Cell{1, 1}}};
    const Timeline tl = merge(fakes, reals, 10.0, 1.0, 4);
    REQUIRE(tl.records.size() == 3);
    CHECK(tl.records[1].kind == RecordKind::RealOrigin);
    CHECK(tl.records[1].node == 5);  // row-major cell id
    const auto gaps = intervals(tl);
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0] == doctest::Approx(1.0));
    CHECK(gaps[1] == doctest::Approx(1.0));

    // ties: fake origin sorts before the real one at the same instant
    std::vector<RealEvent> tied = {{1.0, Cell{0, 0}}};
    const Timeline tie = merge(fakes, tied, 10.0, 1.0, 4);
    CHECK(tie.records[0].kind == RecordKind::FakeOrigin);
    CHECK(tie.records[1].kind == RecordKind::RealOrigin);

    // records at or beyond the horizon are dropped
    const Timeline cut = merge(fakes, reals, 2.5, 1.0, 4);
    CHECK(cut.records.size() == 2);
}

TEST_CASE("merged stream of fakes and reals is exponential of mean mu/(d+1)") {
    SchedulerConfig config{1024, 100, 1.0, Variant::ReferenceExponential, 43};
    const auto fakes = schedule_reference(config, 300.0);
    EventModel model;
    Rng rng(44);
    const auto reals = generate_pure(model, 300.0, 32, rng);
    const Timeline tl = merge(fakes, reals, 300.0, 1.0, 32);
    CHECK(tl.records.size() == fakes.size() + reals.size());
    const auto gaps = intervals(tl);
    const ExpDist law(1.0 / 101.0);
    CHECK(std::abs(mean_of(gaps) - law.mean) / law.mean < 0.02);
    CHECK(ks_distance(gaps, [&](double x) { return law.cdf(x); }) <
          ks_one_sample_critical(0.01, static_cast<double>(gaps.size())));
}

TEST_CASE("intervals: basics and error paths") {
    Timeline tl;
    tl.horizon = 4.0;
    tl.round_length = 1.0;
    tl.records = {{0.0, 0, RecordKind::FakeOrigin},
                  {1.0, 1, RecordKind::FakeOrigin},
                  {3.0, 2, RecordKind::FakeOrigin}};
    const auto gaps = intervals(tl);
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0] == 1.0);
    CHECK(gaps[1] == 2.0);

    Timeline constant;
    constant.horizon = 3.0;
    for (int i = 0; i < 6; ++i)
        constant.records.push_back({0.5 * i, 0, RecordKind::FakeOrigin});
    for (double g : intervals(constant)) CHECK(g == doctest::Approx(0.5));

    Timeline one;
    one.records = {{0.0, 0, RecordKind::FakeOrigin}};
    CHECK_THROWS_AS(intervals(one), std::invalid_argument);
}

TEST_CASE("timeline dump is tabular") {
    Timeline tl;
    tl.horizon = 2.0;
    tl.records = {{0.5, 3, RecordKind::FakeOrigin}, {1.0, 7, RecordKind::RealOrigin}};
    std::ostringstream os;
    write_timeline(os, tl);
    CHECK(os.str() == "time, node, kind\n0.5, 3, F\n1, 7, R\n");
}

}  // TEST_SUITE
