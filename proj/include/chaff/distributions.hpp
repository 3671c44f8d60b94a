// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>

#include "chaff/rng.hpp"

namespace chaff {

// Exponential law; the model for inter-event and cover-traffic gaps.
struct ExpDist {
    double mean;

    explicit ExpDist(double mean_) : mean(mean_) {
        if (!(mean > 0.0))
            throw std::invalid_argument("ExpDist: mean must be positive");
    }

    double pdf(double x) const { return x < 0.0 ? 0.0 : std::exp(-x / mean) / mean; }
    double cdf(double x) const { return x < 0.0 ? 0.0 : 1.0 - std::exp(-x / mean); }

    // Inverse-CDF transform of u in (0, 1].
    double from_uniform(double u) const { return -mean * std::log(u); }

    double sample(Rng& rng) const { return from_uniform(uniform_unit_positive(rng)); }
};

// Erlang law: sum of `shape` independent exponentials of the given scale.
struct ErlangDist {
    int shape;
    double scale;

    ErlangDist(int shape_, double scale_) : shape(shape_), scale(scale_) {
        if (shape < 1)
            throw std::invalid_argument("ErlangDist: shape must be at least 1");
        if (!(scale > 0.0))
            throw std::invalid_argument("ErlangDist: scale must be positive");
    }

    double mean() const { return shape * scale; }

    double pdf(double x) const {
        if (x < 0.0) return 0.0;
        double logp = (shape - 1) * std::log(x / scale) - x / scale -
                      std::lgamma(static_cast<double>(shape)) - std::log(scale);
        if (shape == 1 && x == 0.0) return 1.0 / scale;
        return x == 0.0 ? 0.0 : std::exp(logp);
    }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        // Complement of the truncated Poisson series.
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < shape; ++k) {
            term *= (x / scale) / k;
            sum += term;
        }
        return 1.0 - std::exp(-x / scale) * sum;
    }

    double sample(Rng& rng) const {
        double total = 0.0;
        for (int k = 0; k < shape; ++k)
            total += -scale * std::log(uniform_unit_positive(rng));
        return total;
    }
};

// Density of the minimum of `count` uniforms on [0, range]. For large counts
// this is close to an exponential of mean range/count; it is the law of the
// gap between a round boundary and the first transmission after it.
inline double pdf_min_uniform(double u, int count, double range) {
    if (!(range > 0.0))
        throw std::domain_error("pdf_min_uniform: range must be positive");
    if (count < 1)
        throw std::invalid_argument("pdf_min_uniform: count must be at least 1");
    if (u < 0.0 || u > range) return 0.0;
    return (count / range) * std::pow(1.0 - u / range, count - 1);
}

// Density of the maximum of `count` uniforms on [0, range].
inline double pdf_max_uniform(double v, int count, double range) {
    if (!(range > 0.0))
        throw std::domain_error("pdf_max_uniform: range must be positive");
    if (count < 1)
        throw std::invalid_argument("pdf_max_uniform: count must be at least 1");
    if (v < 0.0 || v > range) return 0.0;
    return (count / range) * std::pow(v / range, count - 1);
}

// Erlang density with shape 2: the limiting law of the interval straddling a
// round (or epoch) boundary in the decentralized schedules.
inline double pdf_erlang2(double z, double scale) {
    if (!(scale > 0.0))
        throw std::domain_error("pdf_erlang2: scale must be positive");
    if (z < 0.0) return 0.0;
    return (z / (scale * scale)) * std::exp(-z / scale);
}

}  // namespace chaff
