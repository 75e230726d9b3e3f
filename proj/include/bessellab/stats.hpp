// bessellab: estimators and goodness-of-fit machinery shared by the
// experiments — sample moments with standard errors, one- and two-sample
// Kolmogorov-Smirnov distances, and the StatReport record every experiment
// emits.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bessellab {

/**
 * Outcome of one statistical check.
 *
 * Moment tests fill estimate/std_error/target and pass iff
 * |estimate - target| <= 3 std_error. Distribution tests additionally fill
 * ks_distance/ks_threshold and pass iff ks_distance <= ks_threshold; fixed
 * distance thresholds are used instead of p-values so that the simulator's
 * discretization bias is budgeted explicitly.
 */
struct StatReport {
    std::string experiment_id;
    double estimate = 0.0;
    double std_error = 0.0;
    std::optional<double> ks_distance;
    std::optional<double> ks_threshold;
    double target = 0.0;
    bool pass = false;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Sample mean.
inline double mean_of(const std::vector<double>& sample) {
    if (sample.empty()) throw std::domain_error("mean_of: empty sample");
    double s = 0.0;
    for (double x : sample) s += x;
    return s / static_cast<double>(sample.size());
}

/// Standard error of the mean (sample standard deviation / sqrt(n)).
inline double std_error_of(const std::vector<double>& sample) {
    if (sample.size() < 2) throw std::domain_error("std_error_of: need n >= 2");
    const double m = mean_of(sample);
    double ss = 0.0;
    for (double x : sample) ss += (x - m) * (x - m);
    const double n = static_cast<double>(sample.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

/// Pearson correlation coefficient of two equal-length samples.
inline double correlation_of(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::domain_error("correlation_of: need two equal samples with n >= 2");
    }
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

/**
 * One-sample Kolmogorov-Smirnov statistic: the sup-distance between the
 * empirical CDF of the sample and the given CDF,
 *
 *   D = max_i max( F(x_(i)) - i/n, (i+1)/n - F(x_(i)) ).
 *
 * A distance >= 0.5 almost always means a degenerate sample (or a CDF fed
 * the wrong variable) and triggers a stderr warning.
 */
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw std::domain_error("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    if (d >= 0.5) {
        std::cerr << "ks_statistic: distance " << d
                  << " >= 0.5 — degenerate sample or mismatched CDF?\n";
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic (sup-distance between the two
/// empirical CDFs), used for scaling-law checks.
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::domain_error("two_sample_ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // Advance past every copy of the smaller value in both samples so
        // the gap is evaluated between the right-continuous CDFs (tied
        // values must not be split across the comparison).
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Moment test: pass iff |mean - target| <= 3 SE. A constant sample (SE = 0)
/// passes only on exact equality.
inline StatReport moment_report(const std::vector<double>& sample, double target,
                                const std::string& experiment_id, std::uint64_t seed) {
    if (sample.size() < 2) throw std::domain_error("moment_report: need n >= 2");
    StatReport rep;
    rep.experiment_id = experiment_id;
    rep.estimate = mean_of(sample);
    rep.std_error = std_error_of(sample);
    rep.target = target;
    rep.n_samples = sample.size();
    rep.seed = seed;
    rep.pass = rep.std_error == 0.0 ? rep.estimate == target
                                    : std::fabs(rep.estimate - target) <= 3.0 * rep.std_error;
    return rep;
}

/// Distribution test wrapper around a precomputed KS distance.
inline StatReport distribution_report(double ks_distance, double ks_threshold,
                                      std::size_t n_samples,
                                      const std::string& experiment_id,
                                      std::uint64_t seed) {
    StatReport rep;
    rep.experiment_id = experiment_id;
    rep.estimate = ks_distance;
    rep.std_error = 0.0;
    rep.ks_distance = ks_distance;
    rep.ks_threshold = ks_threshold;
    rep.target = 0.0;
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.pass = ks_distance <= ks_threshold;
    return rep;
}

}  // namespace bessellab
