// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace testsupport {

// Composite Simpson rule with n (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double stddev_of(std::span<const double> xs) {
    const double m = mean_of(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(xs.size()));
}

inline double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

// Standard error of the difference of two proportions under the pooled rate.
inline double pooled_se(double k1, double n1, double k2, double n2) {
    const double p = (k1 + k2) / (n1 + n2);
    return std::sqrt(p * (1.0 - p) * (1.0 / n1 + 1.0 / n2));
}

// One-sample Kolmogorov-Smirnov distance against a CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::max((i + 1) / n - F, F - i / n));
    }
    return d;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

// Asymptotic KS critical value: c(alpha) * sqrt((n1 + n2) / (n1 * n2)).
inline double ks_two_sample_critical(double alpha, double n1, double n2) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt((n1 + n2) / (n1 * n2));
}

inline double ks_one_sample_critical(double alpha, double n) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n);
}

// Independent route to the Anderson-Darling statistic: numerical quadrature
// of its defining integral
//   A^2 = t * Int_0^1 (Fn(p) - p)^2 / (p (1 - p)) dp,
// where Fn is the empirical CDF of the probability transforms
// z_i = 1 - exp(-x_i / mean), mean estimated from the sample. The production
// code computes the closed form of this integral; agreement of the two routes
// checks the formula, indexing and clamping.
inline double ad_statistic_by_quadrature(std::vector<double> sample) {
    const double t = static_cast<double>(sample.size());
    std::sort(sample.begin(), sample.end());
    const double mean = mean_of(sample);
    std::vector<double> z(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) z[i] = 1.0 - std::exp(-sample[i] / mean);

    double total = 0.0;
    double lo = 0.0;
    for (std::size_t k = 0; k <= sample.size(); ++k) {
        const double hi = k < sample.size() ? z[k] : 1.0;
        if (hi > lo) {
            const double step = k / t;
            total += simpson(
                [step](double p) {
                    const double denom = p * (1.0 - p);
                    if (denom <= 0.0) return 0.0;
                    const double diff = step - p;
                    return diff * diff / denom;
                },
                lo, hi, 256);
        }
        lo = hi;
    }
    return t * total;
}

}  // namespace testsupport
