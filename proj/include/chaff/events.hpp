// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaff/cell.hpp"
#include "chaff/distributions.hpp"
#include "chaff/rng.hpp"

namespace chaff {

enum class EventKind { Pure, Perturbed, Burst };

// Stochastic model of the real-event process. Events arrive as a Poisson
// stream of mean gap `mu`; the Perturbed variant swaps a fraction of gaps for
// short ones, the Burst variant superposes one run of closely spaced events.
struct EventModel {
    EventKind kind = EventKind::Pure;
    double mu = 1.0;

    // Perturbed only.
    double perturb_fraction = 0.0;
    double perturb_mean = 0.0;

    // Burst only.
    int burst_size = 0;
    double pause = 0.0;
    int burst_round = 0;
    // Position of the burst's first event within its round. Negative means
    // "draw from the generator"; experiments draw it once so the burst sits
    // in the same round across every run.
    double burst_offset = -1.0;
};

struct RealEvent {
    double time = 0.0;
    Cell cell;
};

inline void validate(const EventModel& model, double horizon) {
    if (!(model.mu > 0.0))
        throw std::invalid_argument("EventModel: mu must be positive");
    switch (model.kind) {
        case EventKind::Pure:
            break;
        case EventKind::Perturbed:
            if (!(model.perturb_fraction >= 0.0 && model.perturb_fraction < 1.0))
                throw std::invalid_argument("EventModel: perturb_fraction must lie in [0, 1)");
            if (model.perturb_fraction > 0.0 && !(model.perturb_mean > 0.0 && model.perturb_mean < model.mu))
                throw std::invalid_argument("EventModel: perturb_mean must lie in (0, mu)");
            break;
        case EventKind::Burst:
            if (model.burst_size < 1)
                throw std::invalid_argument("EventModel: burst_size must be at least 1");
            if (!(model.pause > 0.0 && model.pause < model.mu))
                throw std::invalid_argument("EventModel: pause must lie in (0, mu)");
            if (model.burst_round < 0)
                throw std::invalid_argument("EventModel: burst_round must be non-negative");
            if (!(model.burst_round * model.mu + model.burst_size * model.pause < horizon))
                throw std::invalid_argument("EventModel: burst does not fit inside the horizon");
            break;
    }
}

// Room left in a round for placing the burst's first event.
inline double burst_offset_slack(const EventModel& model) {
    return std::max(model.mu - (model.burst_size - 1) * model.pause, 0.0);
}

namespace detail {

inline Cell uniform_cell(Rng& rng, int grid_side) {
    const auto n = static_cast<std::uint64_t>(grid_side) * static_cast<std::uint64_t>(grid_side);
    return cell_at(static_cast<std::uint32_t>(uniform_index(rng, n)), grid_side);
}

}  // namespace detail

// Poisson events of rate 1/mu, each placed on an independently uniform cell.
inline std::vector<RealEvent> generate_pure(const EventModel& model, double horizon,
                                            int grid_side, Rng& rng) {
    validate(model, horizon);
    const ExpDist gap(model.mu);
    std::vector<RealEvent> out;
    double t = gap.sample(rng);
    while (t < horizon) {
        out.push_back(RealEvent{t, detail::uniform_cell(rng, grid_side)});
        t += gap.sample(rng);
    }
    return out;
}

// Poisson stream where each gap is replaced, independently with probability
// perturb_fraction, by a draw of the (much smaller) perturbation mean.
inline std::vector<RealEvent> generate_perturbed(const EventModel& model, double horizon,
                                                 int grid_side, Rng& rng) {
    validate(model, horizon);
    const ExpDist base(model.mu);
    std::vector<RealEvent> out;
    double t = 0.0;
    for (;;) {
        const bool outlier =
            model.perturb_fraction > 0.0 && uniform_unit(rng) < model.perturb_fraction;
        t += outlier ? ExpDist(model.perturb_mean).sample(rng) : base.sample(rng);
        if (t >= horizon) break;
        out.push_back(RealEvent{t, detail::uniform_cell(rng, grid_side)});
    }
    return out;
}

// Pure Poisson background plus a single burst of `burst_size` events whose
// consecutive gaps all equal `pause`, anchored inside round `burst_round`.
// Burst cells are uniform: no spatial correlation inside the burst.
inline std::vector<RealEvent> generate_burst(const EventModel& model, double horizon,
                                             int grid_side, Rng& rng) {
    validate(model, horizon);
    double offset = model.burst_offset;
    if (offset < 0.0) offset = burst_offset_slack(model) * uniform_unit(rng);

    EventModel background = model;
    background.kind = EventKind::Pure;
    std::vector<RealEvent> out = generate_pure(background, horizon, grid_side, rng);

    const double start = model.burst_round * model.mu + offset;
    for (int k = 0; k < model.burst_size; ++k) {
        const double t = start + k * model.pause;
        if (t >= horizon)
            throw std::invalid_argument("generate_burst: burst does not fit inside the horizon");
        out.push_back(RealEvent{t, detail::uniform_cell(rng, grid_side)});
    }
    std::sort(out.begin(), out.end(),
              [](const RealEvent& a, const RealEvent& b) { return a.time < b.time; });
    return out;
}

inline std::vector<RealEvent> generate_events(const EventModel& model, double horizon,
                                              int grid_side, Rng& rng) {
    switch (model.kind) {
        case EventKind::Pure: return generate_pure(model, horizon, grid_side, rng);
        case EventKind::Perturbed: return generate_perturbed(model, horizon, grid_side, rng);
        case EventKind::Burst: return generate_burst(model, horizon, grid_side, rng);
    }
    throw std::logic_error("generate_events: unknown kind");
}

// Debug dump: `time, cell_x, cell_y`.
inline void write_events(std::ostream& os, std::span<const RealEvent> events) {
    os << "time, cell_x, cell_y\n";
    char buf[96];
    for (const RealEvent& e : events) {
        std::snprintf(buf, sizeof(buf), "%.17g, %d, %d", e.time, e.cell.x, e.cell.y);
        os << buf << "\n";
    }
}

}  // namespace chaff
