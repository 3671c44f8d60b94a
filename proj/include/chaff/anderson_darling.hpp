// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaff/distributions.hpp"
#include "chaff/rng.hpp"

namespace chaff {

struct AdTestResult {
    double statistic = 0.0;
    std::size_t sample_size = 0;
    double alpha = 0.0;
    double critical_value = 0.0;
    bool reject = false;
};

// Anderson-Darling statistic for exponentiality with the rate estimated from
// the sample (maximum-likelihood estimate = sample mean).
//
// On the ascending sample x_(1) <= ... <= x_(t):
//   z_i = 1 - exp(-x_(i) / mean)
//   A^2 = -t - (1/t) * sum_i (2i - 1) * [ln z_i + ln(1 - z_(t+1-i))]
// z is clamped into [1e-12, 1 - 1e-12] before the logs; this is a numerical
// guard against infinities, not a statistical correction.
inline double ad_statistic_sorted(std::span<const double> sorted) {
    const std::size_t t = sorted.size();
    if (t < 2)
        throw std::invalid_argument("ad_statistic: need at least two observations");

    double sum = 0.0;
    double prev = 0.0;
    for (double v : sorted) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("ad_statistic: observations must be finite and non-negative");
        if (v < prev)
            throw std::invalid_argument("ad_statistic: sample is not sorted ascending");
        prev = v;
        sum += v;
    }
    if (!(sum > 0.0))
        throw std::invalid_argument("ad_statistic: degenerate all-zero sample");

    const double mean = sum / static_cast<double>(t);
    constexpr double kEps = 1e-12;

    std::vector<double> z(t);
    for (std::size_t i = 0; i < t; ++i) {
        double zi = 1.0 - std::exp(-sorted[i] / mean);
        z[i] = std::clamp(zi, kEps, 1.0 - kEps);
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const double weight = static_cast<double>(2 * i + 1);
        acc += weight * (std::log(z[i]) + std::log1p(-z[t - 1 - i]));
    }
    return -static_cast<double>(t) - acc / static_cast<double>(t);
}

inline double ad_statistic(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    return ad_statistic_sorted(sorted);
}

// Table of finite-sample significance points of A^2, found by Monte Carlo.
// Lookup interpolates linearly in 1/t between bracketing tabulated sizes;
// there is no extrapolation beyond the tabulated range of sizes or alphas.
class CriticalValueTable {
public:
    CriticalValueTable(std::uint64_t mc_replicates, std::uint64_t seed)
        : mc_replicates_(mc_replicates), seed_(seed) {}

    void insert(std::size_t sample_size, double alpha, double critical_value) {
        entries_[sample_size][alpha] = critical_value;
    }

    std::uint64_t mc_replicates() const { return mc_replicates_; }
    std::uint64_t seed() const { return seed_; }
    bool empty() const { return entries_.empty(); }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> out;
        out.reserve(entries_.size());
        for (const auto& [t, row] : entries_) out.push_back(t);
        return out;
    }

    bool covers(std::size_t sample_size, double alpha) const noexcept {
        try {
            critical_value(sample_size, alpha);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }

    double critical_value(std::size_t sample_size, double alpha) const {
        if (entries_.empty())
            throw std::out_of_range("critical_value: empty table");
        auto exact = entries_.find(sample_size);
        if (exact != entries_.end())
            return alpha_lookup(exact->second, alpha);

        auto above = entries_.upper_bound(sample_size);
        if (above == entries_.begin() || above == entries_.end())
            throw std::out_of_range("critical_value: sample size outside tabulated range");
        auto below = std::prev(above);

        const double t = static_cast<double>(sample_size);
        const double t1 = static_cast<double>(below->first);
        const double t2 = static_cast<double>(above->first);
        const double c1 = alpha_lookup(below->second, alpha);
        const double c2 = alpha_lookup(above->second, alpha);
        const double w = (1.0 / t - 1.0 / t2) / (1.0 / t1 - 1.0 / t2);
        return w * c1 + (1.0 - w) * c2;
    }

    void write(std::ostream& os) const {
        os << "chaff-critvals v1 mc_replicates=" << mc_replicates_
           << " seed=" << seed_ << "\n";
        os << "sample_size, alpha, critical_value\n";
        char buf[64];
        for (const auto& [t, row] : entries_) {
            for (const auto& [alpha, cv] : row) {
                std::snprintf(buf, sizeof(buf), "%zu, %g, %.6g", t, alpha, cv);
                os << buf << "\n";
            }
        }
    }

    std::string to_string() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("CriticalValueTable: cannot open " + path);
        write(os);
    }

    static CriticalValueTable read(std::istream& is) {
        std::string magic, version, tok;
        is >> magic >> version;
        if (magic != "chaff-critvals" || version != "v1")
            throw std::runtime_error("CriticalValueTable: unrecognized header");
        std::uint64_t replicates = 0, seed = 0;
        for (int k = 0; k < 2; ++k) {
            is >> tok;
            if (tok.rfind("mc_replicates=", 0) == 0)
                replicates = std::stoull(tok.substr(14));
            else if (tok.rfind("seed=", 0) == 0)
                seed = std::stoull(tok.substr(5));
            else
                throw std::runtime_error("CriticalValueTable: malformed header field " + tok);
        }
        std::string line;
        std::getline(is, line);  // rest of header line
        std::getline(is, line);  // column header
        CriticalValueTable table(replicates, seed);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::size_t t = 0;
            double alpha = 0.0, cv = 0.0;
            if (std::sscanf(line.c_str(), "%zu, %lf, %lf", &t, &alpha, &cv) != 3)
                throw std::runtime_error("CriticalValueTable: malformed row: " + line);
            table.insert(t, alpha, cv);
        }
        if (table.empty())
            throw std::runtime_error("CriticalValueTable: no rows");
        return table;
    }

    static CriticalValueTable load(const std::string& path) {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("CriticalValueTable: cannot open " + path);
        return read(is);
    }

private:
    static double alpha_lookup(const std::map<double, double>& row, double alpha) {
        auto it = row.lower_bound(alpha - 1e-12);
        if (it == row.end() || std::abs(it->first - alpha) > 1e-12)
            throw std::out_of_range("critical_value: alpha not tabulated");
        return it->second;
    }

    std::map<std::size_t, std::map<double, double>> entries_;
    std::uint64_t mc_replicates_;
    std::uint64_t seed_;
};

inline constexpr std::uint64_t kMinCriticalValueReplicates = 100000;

// Monte-Carlo significance points: for each sample size draw `replicates`
// unit-exponential samples, compute the statistic, and take the empirical
// (1 - alpha) quantile. The statistic is scale-free (the mean is estimated),
// so unit mean loses nothing. Sorted samples come straight from the
// order-statistic ladder E_(i) = E_(i-1) + e_i / (t - i + 1), which avoids
// a sort per replicate.
inline CriticalValueTable generate_critical_values(std::span<const std::size_t> sample_sizes,
                                                   std::span<const double> alphas,
                                                   std::uint64_t replicates,
                                                   std::uint64_t seed) {
    if (replicates < kMinCriticalValueReplicates)
        throw std::invalid_argument("generate_critical_values: at least 1e5 replicates required");
    if (sample_sizes.empty() || alphas.empty())
        throw std::invalid_argument("generate_critical_values: sizes and alphas must be non-empty");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("generate_critical_values: alpha must lie in (0, 1)");

    CriticalValueTable table(replicates, seed);
    std::vector<double> stats(replicates);
    for (std::size_t t : sample_sizes) {
        if (t < 2)
            throw std::invalid_argument("generate_critical_values: sample size must be at least 2");
        std::vector<double> sample(t);
        for (std::uint64_t r = 0; r < replicates; ++r) {
            Rng rng(derive_seed(seed, t, r));
            double acc = 0.0;
            for (std::size_t i = 0; i < t; ++i) {
                acc += -std::log(uniform_unit_positive(rng)) / static_cast<double>(t - i);
                sample[i] = acc;
            }
            stats[r] = ad_statistic_sorted(sample);
        }
        std::sort(stats.begin(), stats.end());
        for (double alpha : alphas) {
            const auto upper_count = static_cast<std::uint64_t>(std::llround(alpha * static_cast<double>(replicates)));
            if (upper_count == 0 || upper_count >= replicates)
                throw std::invalid_argument("generate_critical_values: alpha too extreme for replicate count");
            table.insert(t, alpha, stats[replicates - upper_count - 1]);
        }
    }
    return table;
}

inline AdTestResult ad_test_sorted(std::span<const double> sorted, double alpha,
                                   const CriticalValueTable& table) {
    AdTestResult res;
    res.sample_size = sorted.size();
    res.alpha = alpha;
    res.critical_value = table.critical_value(sorted.size(), alpha);
    res.statistic = ad_statistic_sorted(sorted);
    res.reject = res.statistic > res.critical_value;
    return res;
}

inline AdTestResult ad_test(std::span<const double> sample, double alpha,
                            const CriticalValueTable& table) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    return ad_test_sorted(sorted, alpha, table);
}

}  // namespace chaff
