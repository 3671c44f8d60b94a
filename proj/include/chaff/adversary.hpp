// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chaff/anderson_darling.hpp"
#include "chaff/scheduler.hpp"

namespace chaff {

enum class WindowPolicy { FixedWindow, CumulativePerRound, PerRoundOnly };
enum class FaAxis { RoundNumber, EventNumber };

// How often the fixed window is tested on the round axis: at every
// transmission, or once per round at the round's opening transmission. The
// latter matches the cadence of event-axis testing (about one test per mu)
// and is what calibration baselines use.
enum class RoundCadence { EveryTransmission, RoundOpening };

// The global eavesdropper's test configuration.
//
// FixedWindow tests the last `window` intervals: on the round axis per
// `round_cadence`, on the event axis at every real-event insertion; either
// way the test is skipped until `window` intervals have accumulated.
// CumulativePerRound tests all intervals observed so far at the end of every
// round. PerRoundOnly tests just the intervals of the current round. The two
// per-round policies only make sense on the round axis.
struct EveConfig {
    double alpha = 0.01;
    std::size_t window = 200;
    WindowPolicy window_policy = WindowPolicy::FixedWindow;
    FaAxis axis = FaAxis::EventNumber;
    RoundCadence round_cadence = RoundCadence::EveryTransmission;
    std::size_t trend_span = 5;
    double trend_sigma = 3.0;

    friend bool operator==(const EveConfig&, const EveConfig&) = default;
};

inline void validate(const EveConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw std::invalid_argument("EveConfig: alpha must lie in (0, 1)");
    if (config.window < 2)
        throw std::invalid_argument("EveConfig: window must be at least 2");
    if (config.trend_span < 2)
        throw std::invalid_argument("EveConfig: trend_span must be at least 2");
    if (config.window_policy != WindowPolicy::FixedWindow && config.axis != FaAxis::RoundNumber)
        throw std::invalid_argument("EveConfig: per-round window policies require the round axis");
}

// Test-failure rates per axis index. `values` holds the reject rate (zero
// where nothing was tested), `tests` the number of tests contributing, and
// `real_events` how many real events fell on the index; the latter two let
// downstream consumers weight indexes and label alarms.
struct FaSeries {
    FaAxis axis = FaAxis::RoundNumber;
    std::vector<double> values;
    std::vector<double> tests;
    std::vector<double> real_events;
    std::uint64_t run_count = 1;
    std::vector<std::uint64_t> seeds;

    double total_tests() const {
        double n = 0.0;
        for (double t : tests) n += t;
        return n;
    }

    double total_rejects() const {
        double n = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) n += values[i] * tests[i];
        return n;
    }

    // Per-test failure rate pooled over the whole series.
    double pooled_rate() const {
        const double n = total_tests();
        return n > 0.0 ? total_rejects() / n : 0.0;
    }
};

// `index, fa_rate, run_count`
inline void write_fa_csv(std::ostream& os, const FaSeries& series) {
    os << "index, fa_rate, run_count\n";
    char buf[96];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu, %.9g, %llu", i, series.values[i],
                      static_cast<unsigned long long>(series.run_count));
        os << buf << "\n";
    }
}

enum class DetectionKind { TestReject, TrendAlarm };
enum class Truth { FalseAlarm, TruePositive };

struct Detection {
    double time = 0.0;
    DetectionKind kind = DetectionKind::TestReject;
    Truth truth = Truth::FalseAlarm;
};

inline void write_detections(std::ostream& os, std::span<const Detection> detections) {
    os << "time, kind, truth\n";
    char buf[96];
    for (const Detection& d : detections) {
        std::snprintf(buf, sizeof(buf), "%.17g, %s, %s", d.time,
                      d.kind == DetectionKind::TestReject ? "test_reject" : "trend_alarm",
                      d.truth == Truth::FalseAlarm ? "false_alarm" : "true_positive");
        os << buf << "\n";
    }
}

struct OutageStats {
    std::uint64_t outage_count = 0;
    std::uint64_t tests_run = 0;
    double outage_rate = 0.0;
};

// Replay the timeline through the eavesdropper: assemble the interval sample
// dictated by the window policy at each test point, run the exponentiality
// test, and aggregate reject rates on the configured axis. Test points whose
// sample is too small for the table are skipped; it is an error if every test
// point is skipped. Rejections are emitted as detections, labeled true
// positive when a real event lies inside the tested window.
inline std::pair<std::vector<Detection>, FaSeries> observe(const Timeline& timeline,
                                                           const EveConfig& config,
                                                           const CriticalValueTable& table) {
    validate(config);
    if (timeline.records.empty())
        throw std::invalid_argument("observe: empty timeline");

    const auto& recs = timeline.records;
    const std::size_t m = recs.size();
    const std::size_t length = timeline.rounds();
    if (length == 0)
        throw std::invalid_argument("observe: timeline horizon too short");

    FaSeries series;
    series.axis = config.axis;
    series.values.assign(length, 0.0);
    series.tests.assign(length, 0.0);
    series.real_events.assign(length, 0.0);
    std::vector<double> rejects(length, 0.0);
    std::vector<Detection> detections;

    auto round_of = [&](double t) {
        return static_cast<std::size_t>(t / timeline.round_length);
    };

    // Real-event presence per index.
    {
        std::size_t event_seen = 0;
        for (const TimelineRecord& r : recs) {
            if (r.kind != RecordKind::RealOrigin) continue;
            const std::size_t idx =
                config.axis == FaAxis::RoundNumber ? round_of(r.time) : event_seen;
            ++event_seen;
            if (idx < length) series.real_events[idx] += 1.0;
        }
    }

    std::vector<double> gaps(m > 0 ? m - 1 : 0);
    for (std::size_t k = 0; k + 1 < m; ++k) gaps[k] = recs[k + 1].time - recs[k].time;

    // prefix_real[j] = number of real records among records[0..j]
    std::vector<std::uint32_t> prefix_real(m, 0);
    for (std::size_t j = 0; j < m; ++j)
        prefix_real[j] = (j ? prefix_real[j - 1] : 0u) +
                         (recs[j].kind == RecordKind::RealOrigin ? 1u : 0u);
    auto real_within = [&](std::size_t lo_rec, std::size_t hi_rec) {
        const std::uint32_t below = lo_rec ? prefix_real[lo_rec - 1] : 0u;
        return prefix_real[hi_rec] > below;
    };

    auto run_test = [&](std::span<const double> sorted_sample, std::size_t index, double when,
                        bool has_real_event) {
        if (index >= length) return;
        if (sorted_sample.size() < 2 || !table.covers(sorted_sample.size(), config.alpha)) return;
        const AdTestResult res = ad_test_sorted(sorted_sample, config.alpha, table);
        series.tests[index] += 1.0;
        if (res.reject) {
            rejects[index] += 1.0;
            detections.push_back(Detection{
                when, DetectionKind::TestReject,
                has_real_event ? Truth::TruePositive : Truth::FalseAlarm});
        }
    };

    std::vector<double> scratch;
    switch (config.window_policy) {
        case WindowPolicy::FixedWindow: {
            // Round axis: a test per round_cadence once w intervals exist.
            // Event axis: a test only when a real event is inserted, on the
            // window ending at the event's own transmission.
            const std::size_t w = config.window;
            std::size_t event_seen = 0;
            std::size_t prev_round = 0;
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t index = 0;
                bool at_test_point = true;
                if (config.axis == FaAxis::RoundNumber) {
                    index = round_of(recs[j].time);
                    if (config.round_cadence == RoundCadence::RoundOpening)
                        at_test_point = j == 0 || index > prev_round;
                    prev_round = index;
                } else if (recs[j].kind == RecordKind::RealOrigin) {
                    index = event_seen;
                    ++event_seen;
                } else {
                    at_test_point = false;
                }
                if (!at_test_point || j < w) continue;
                scratch.assign(gaps.begin() + (j - w), gaps.begin() + j);
                std::sort(scratch.begin(), scratch.end());
                run_test(scratch, index, recs[j].time, real_within(j - w, j));
            }
            break;
        }
        case WindowPolicy::CumulativePerRound: {
            // end_round[k] is nondecreasing in k, so the cumulative sample
            // grows by one contiguous batch per round.
            std::vector<double> sorted;
            sorted.reserve(gaps.size());
            std::size_t gi = 0;
            for (std::size_t r = 0; r < length; ++r) {
                const std::size_t batch_start = sorted.size();
                while (gi + 1 < m && round_of(recs[gi + 1].time) <= r) {
                    sorted.push_back(gaps[gi]);
                    ++gi;
                }
                std::sort(sorted.begin() + batch_start, sorted.end());
                std::inplace_merge(sorted.begin(), sorted.begin() + batch_start, sorted.end());
                run_test(sorted, r, static_cast<double>(r + 1) * timeline.round_length,
                         real_within(0, gi));
            }
            break;
        }
        case WindowPolicy::PerRoundOnly: {
            std::size_t gi = 0;
            for (std::size_t r = 0; r < length; ++r) {
                const std::size_t lo = gi;
                while (gi + 1 < m && round_of(recs[gi + 1].time) <= r) ++gi;
                if (gi == lo) continue;
                scratch.assign(gaps.begin() + lo, gaps.begin() + gi);
                std::sort(scratch.begin(), scratch.end());
                run_test(scratch, r, static_cast<double>(r + 1) * timeline.round_length,
                         real_within(lo, gi));
            }
            break;
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
        if (series.tests[i] > 0.0) series.values[i] = rejects[i] / series.tests[i];
        total += series.tests[i];
    }
    if (total == 0.0)
        throw std::runtime_error("observe: window policy produced no test points within the horizon");

    return {std::move(detections), std::move(series)};
}

// Pointwise mean of per-run series sharing axis and length. Indexes untested
// in some runs average over the runs that did test there.
inline FaSeries fa_average(std::span<const FaSeries> series) {
    if (series.empty())
        throw std::invalid_argument("fa_average: no series");
    const FaSeries& first = series.front();
    FaSeries out;
    out.axis = first.axis;
    out.run_count = 0;
    out.values.assign(first.values.size(), 0.0);
    out.tests.assign(first.values.size(), 0.0);
    out.real_events.assign(first.values.size(), 0.0);
    std::vector<double> contributors(first.values.size(), 0.0);
    for (const FaSeries& s : series) {
        if (s.axis != out.axis || s.values.size() != out.values.size())
            throw std::invalid_argument("fa_average: axis or length mismatch");
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (s.tests[i] > 0.0) {
                out.values[i] += s.values[i];
                contributors[i] += 1.0;
            }
            out.tests[i] += s.tests[i];
            out.real_events[i] += s.real_events[i];
        }
        out.run_count += s.run_count;
        out.seeds.insert(out.seeds.end(), s.seeds.begin(), s.seeds.end());
    }
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (contributors[i] > 0.0) out.values[i] /= contributors[i];
    return out;
}

// Trend detection against an empirical baseline: alarm when the trailing
// trend_span-point mean of the tested series exceeds the baseline failure
// rate by trend_sigma deviations. The deviation of one series point is the
// baseline's per-test (Bernoulli) deviation shrunk by the number of tests
// averaged into that point, so the same relaxed threshold works for
// single-run and run-averaged series.
inline std::vector<Detection> trend_detect(const FaSeries& series, const EveConfig& config,
                                           const FaSeries& baseline) {
    validate(config);
    const double baseline_tests = baseline.total_tests();
    if (baseline_tests < 2.0)
        throw std::invalid_argument("trend_detect: baseline too short to estimate mean and deviation");
    const double mean = baseline.total_rejects() / baseline_tests;
    const double per_test_sd = std::sqrt(mean * (1.0 - mean));

    std::vector<Detection> alarms;
    std::vector<std::pair<std::size_t, double>> trailing;  // (index, value) of tested points
    for (std::size_t j = 0; j < series.values.size(); ++j) {
        if (!(series.tests[j] > 0.0)) continue;
        trailing.emplace_back(j, series.values[j]);
        if (trailing.size() > config.trend_span) trailing.erase(trailing.begin());
        if (trailing.size() < config.trend_span) continue;
        double acc = 0.0, tests_acc = 0.0;
        for (const auto& [idx, v] : trailing) {
            acc += v;
            tests_acc += series.tests[idx];
        }
        const double point_sd =
            per_test_sd / std::sqrt(std::max(tests_acc / static_cast<double>(config.trend_span), 1.0));
        const double threshold = mean + config.trend_sigma * point_sd;
        if (acc / static_cast<double>(config.trend_span) <= threshold) continue;
        bool has_event = false;
        for (std::size_t idx = trailing.front().first; idx <= j; ++idx)
            if (series.real_events[idx] > 0.0) has_event = true;
        alarms.push_back(Detection{static_cast<double>(j), DetectionKind::TrendAlarm,
                                   has_event ? Truth::TruePositive : Truth::FalseAlarm});
    }
    return alarms;
}

inline OutageStats outage_stats(std::span<const Detection> detections, std::uint64_t tests_run) {
    OutageStats stats;
    stats.tests_run = tests_run;
    for (const Detection& d : detections)
        if (d.truth == Truth::FalseAlarm) ++stats.outage_count;
    stats.outage_rate = tests_run > 0
                            ? static_cast<double>(stats.outage_count) / static_cast<double>(tests_run)
                            : 0.0;
    return stats;
}

}  // namespace chaff
