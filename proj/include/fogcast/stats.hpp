/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FOGCAST_STATS_HPP
#define FOGCAST_STATS_HPP

#include <cmath>
#include <cstddef>
#include <span>

#include "fogcast/common.hpp"

namespace fogcast {

// Sample Pearson correlation of two equal-length sequences. Inputs must be
// free of missing values (pairwise deletion happens upstream).
// Two-pass centered sums keep the estimate symmetric and stable.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw DataError("pearson: need at least 3 pairs, got " + std::to_string(n));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DataError("pearson: undefined correlation for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace detail {

// Continued-fraction core of the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw NumericError("incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw NumericError("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::betacf(a, b, x) / a;
    }
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

struct Significance {
    double p_value;
    bool significant;
    bool exact;  // |r| = 1 convention, p pinned to 0
};

// Two-sided test of a Pearson correlation against zero:
// t = r * sqrt((n-2) / (1-r^2)), df = n-2, p from the Student-t distribution
// via p = I_{df/(df+t^2)}(df/2, 1/2).
inline Significance significance(double r, std::size_t n, double alpha) {
    if (n < 3) throw DataError("significance: need n >= 3");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("significance: alpha must be in (0,1)");
    if (std::fabs(r) > 1.0) throw InputError("significance: |r| > 1");
    if (std::fabs(r) == 1.0) {
        return Significance{0.0, true, true};
    }
    const double df = static_cast<double>(n - 2);
    const double t2 = r * r * df / (1.0 - r * r);
    const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t2));
    return Significance{p, p < alpha, false};
}

}  // namespace fogcast

#endif  // FOGCAST_STATS_HPP
