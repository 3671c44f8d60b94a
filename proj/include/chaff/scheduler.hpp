// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "chaff/cell.hpp"
#include "chaff/distributions.hpp"
#include "chaff/events.hpp"
#include "chaff/rng.hpp"

namespace chaff {

enum class Variant { BaselineEpoch, Group, ReferenceExponential };

// Decentralized cover-traffic generation: n nodes, of which d act as dummy
// sources per round of duration mu. All randomness derives from `seed`; each
// node owns its own generator stream, so schedules do not depend on the order
// nodes are visited in.
struct SchedulerConfig {
    std::size_t n = 0;
    std::size_t d = 0;
    double mu = 1.0;
    Variant variant = Variant::Group;
    std::uint64_t seed = 0;
};

inline void validate(const SchedulerConfig& config) {
    if (config.n < 1)
        throw std::invalid_argument("SchedulerConfig: n must be at least 1");
    if (config.d < 1 || config.d > config.n)
        throw std::invalid_argument("SchedulerConfig: d must lie in [1, n]");
    if (!(config.mu > 0.0))
        throw std::invalid_argument("SchedulerConfig: mu must be positive");
}

struct FakeTransmission {
    double time = 0.0;
    std::uint32_t node = 0;
    std::uint32_t round = 0;
};

enum class RecordKind : std::uint8_t { FakeOrigin = 0, RealOrigin = 1 };

struct TimelineRecord {
    double time = 0.0;
    std::uint32_t node = 0;
    RecordKind kind = RecordKind::FakeOrigin;
};

// Global activity timeline as the eavesdropper records it: every origin
// transmission in the network, time-sorted, ties broken by (kind, node).
struct Timeline {
    std::vector<TimelineRecord> records;
    double horizon = 0.0;
    double round_length = 1.0;

    std::size_t rounds() const {
        return static_cast<std::size_t>(std::ceil(horizon / round_length - 1e-9));
    }
};

namespace detail {

inline constexpr std::uint64_t kNodeStream = 0x4e4f4445ull;
inline constexpr std::uint64_t kAssignStream = 0x41535347ull;
inline constexpr std::uint64_t kReferenceStream = 0x52454645ull;

inline void sort_transmissions(std::vector<FakeTransmission>& out) {
    std::sort(out.begin(), out.end(), [](const FakeTransmission& a, const FakeTransmission& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.node < b.node;
    });
}

inline std::vector<Rng> node_engines(const SchedulerConfig& config) {
    std::vector<Rng> engines;
    engines.reserve(config.n);
    for (std::size_t node = 0; node < config.n; ++node)
        engines.emplace_back(derive_seed(config.seed, kNodeStream, node));
    return engines;
}

}  // namespace detail

// Epoch algorithm: in every epoch of duration T = mu * n / d, each of the n
// nodes draws one transmission instant uniformly inside the epoch. Sorting
// the draws yields gaps close to an exponential of mean mu / d.
inline std::vector<FakeTransmission> schedule_baseline(const SchedulerConfig& config, int epochs) {
    validate(config);
    if (config.variant != Variant::BaselineEpoch)
        throw std::invalid_argument("schedule_baseline: wrong variant");
    if (epochs < 1)
        throw std::invalid_argument("schedule_baseline: epochs must be at least 1");

    const double epoch_length =
        config.mu * static_cast<double>(config.n) / static_cast<double>(config.d);
    std::vector<Rng> engines = detail::node_engines(config);

    std::vector<FakeTransmission> out;
    out.reserve(static_cast<std::size_t>(epochs) * config.n);
    for (int e = 0; e < epochs; ++e) {
        const double lo = e * epoch_length;
        for (std::size_t node = 0; node < config.n; ++node) {
            out.push_back(FakeTransmission{uniform_on(engines[node], lo, lo + epoch_length),
                                           static_cast<std::uint32_t>(node),
                                           static_cast<std::uint32_t>(e)});
        }
    }
    detail::sort_transmissions(out);
    return out;
}

// Seeded partition of nodes into d groups of size floor(n / d). Entry g*j + m
// is member m of group j; the n - d*g leftover nodes stay idle.
inline std::vector<std::uint32_t> group_assignment(const SchedulerConfig& config) {
    validate(config);
    std::vector<std::uint32_t> perm(config.n);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(derive_seed(config.seed, detail::kAssignStream, 0));
    for (std::size_t i = config.n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i + 1));
        std::swap(perm[i], perm[j]);
    }
    const std::size_t group_size = config.n / config.d;
    perm.resize(config.d * group_size);
    return perm;
}

// Group algorithm: d groups of size g = floor(n / d); in round k (0-based)
// each group's member with index k mod g draws its transmission instant
// uniformly inside the round. Exactly d nodes transmit per round.
inline std::vector<FakeTransmission> schedule_group(const SchedulerConfig& config, int rounds) {
    validate(config);
    if (config.variant != Variant::Group)
        throw std::invalid_argument("schedule_group: wrong variant");
    if (rounds < 1)
        throw std::invalid_argument("schedule_group: rounds must be at least 1");

    const std::vector<std::uint32_t> members = group_assignment(config);
    const std::size_t group_size = config.n / config.d;
    std::vector<Rng> engines = detail::node_engines(config);

    std::vector<FakeTransmission> out;
    out.reserve(static_cast<std::size_t>(rounds) * config.d);
    for (int k = 0; k < rounds; ++k) {
        const std::size_t member = static_cast<std::size_t>(k) % group_size;
        const double lo = k * config.mu;
        for (std::size_t group = 0; group < config.d; ++group) {
            const std::uint32_t node = members[group * group_size + member];
            out.push_back(FakeTransmission{uniform_on(engines[node], lo, lo + config.mu), node,
                                           static_cast<std::uint32_t>(k)});
        }
    }
    detail::sort_transmissions(out);
    return out;
}

// Idealized single-source schedule: i.i.d. exponential gaps of mean mu / d up
// to the horizon. Node ids are assigned round-robin and carry no meaning.
inline std::vector<FakeTransmission> schedule_reference(const SchedulerConfig& config, double horizon) {
    validate(config);
    if (config.variant != Variant::ReferenceExponential)
        throw std::invalid_argument("schedule_reference: wrong variant");
    if (horizon < 0.0)
        throw std::invalid_argument("schedule_reference: horizon must be non-negative");

    const ExpDist gap(config.mu / static_cast<double>(config.d));
    Rng rng(derive_seed(config.seed, detail::kReferenceStream, 0));

    std::vector<FakeTransmission> out;
    double t = gap.sample(rng);
    std::uint64_t i = 0;
    while (t < horizon) {
        out.push_back(FakeTransmission{t, static_cast<std::uint32_t>(i % config.n),
                                       static_cast<std::uint32_t>(t / config.mu)});
        t += gap.sample(rng);
        ++i;
    }
    return out;
}

// Merge the fake schedule with the undelayed transmissions of real events
// into one global timeline. Real events keep their occurrence times; nothing
// is delayed or rescheduled. Records at or beyond the horizon are dropped.
// Ties break deterministically: fake origins first, then node id.
inline Timeline merge(std::span<const FakeTransmission> fakes, std::span<const RealEvent> reals,
                      double horizon, double round_length, int grid_side) {
    if (!(round_length > 0.0))
        throw std::invalid_argument("merge: round_length must be positive");
    Timeline tl;
    tl.horizon = horizon;
    tl.round_length = round_length;
    tl.records.reserve(fakes.size() + reals.size());
    for (const FakeTransmission& f : fakes)
        if (f.time < horizon)
            tl.records.push_back(TimelineRecord{f.time, f.node, RecordKind::FakeOrigin});
    for (const RealEvent& e : reals)
        if (e.time < horizon)
            tl.records.push_back(
                TimelineRecord{e.time, cell_index(e.cell, grid_side), RecordKind::RealOrigin});
    std::sort(tl.records.begin(), tl.records.end(),
              [](const TimelineRecord& a, const TimelineRecord& b) {
                  if (a.time != b.time) return a.time < b.time;
                  if (a.kind != b.kind) return a.kind < b.kind;
                  return a.node < b.node;
              });
    return tl;
}

// Consecutive inter-transmission times; the quantity the eavesdropper tests.
inline std::vector<double> intervals(const Timeline& timeline) {
    if (timeline.records.size() < 2)
        throw std::invalid_argument("intervals: need at least two records");
    std::vector<double> out;
    out.reserve(timeline.records.size() - 1);
    for (std::size_t i = 1; i < timeline.records.size(); ++i)
        out.push_back(timeline.records[i].time - timeline.records[i - 1].time);
    return out;
}

// Debug dump: `time, node, kind` with kind F or R.
inline void write_timeline(std::ostream& os, const Timeline& timeline) {
    os << "time, node, kind\n";
    char buf[96];
    for (const TimelineRecord& r : timeline.records) {
        std::snprintf(buf, sizeof(buf), "%.17g, %u, %c", r.time, r.node,
                      r.kind == RecordKind::FakeOrigin ? 'F' : 'R');
        os << buf << "\n";
    }
}

}  // namespace chaff
