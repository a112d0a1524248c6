// Copyright 2026 The robust_kelly Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/// \file scalar.hpp
/// \brief One-dimensional search helpers.

#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace robust_kelly::detail {

/// Golden-section minimization of a unimodal function on [a, b].
/// Returns (argmin, min).
inline std::pair<double, double> golden_minimize(const std::function<double(double)>& f, double a, double b,
                                                 int iterations = 200) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations && b - a > 0.0; ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            if (c == d) break;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            if (c == d) break;
            fd = f(d);
        }
    }
    double best = fc <= fd ? c : d, fbest = std::min(fc, fd);
    for (double x : {a, b}) {
        const double fx = f(x);
        if (fx < fbest) {
            best = x;
            fbest = fx;
        }
    }
    return {best, fbest};
}

/// Minimizes a convex function on the real line. The bracket [a, b] is widened
/// until the minimum lies strictly inside it.
inline std::pair<double, double> convex_minimize(const std::function<double(double)>& f, double a, double b) {
    double width = std::max(b - a, 1.0);
    for (int i = 0; i < 60; ++i) {
        const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        if (fa < fm) {
            a -= width;
        } else if (fb < fm) {
            b += width;
        } else {
            break;
        }
        width *= 2.0;
    }
    return golden_minimize(f, a, b);
}

/// Bisection for the sign change of a nonincreasing function: returns the
/// largest representable point p in [lo, hi] (up to round-off) with g(p) >= 0,
/// assuming g(lo) >= 0 > g(hi).
template <class G>
double bisect_decreasing(G&& g, double lo, double hi) {
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        (g(mid) >= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace robust_kelly::detail
