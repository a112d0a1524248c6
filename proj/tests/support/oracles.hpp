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


// Reference computations used as test oracles. Nothing here calls the
// worst-case oracle, the dual routines or the conjugate table.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/divergence.hpp"
#include "robust_kelly/lp.hpp"
#include "support/instances.hpp"

namespace rk_test {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Textbook generator f(t) for each divergence.
inline double reference_f(const DivergenceKind& kind, double t) {
    using robust_kelly::DivergenceFamily;
    if (t < 0.0) return kInf;
    switch (kind.family()) {
        case DivergenceFamily::kl: return t == 0.0 ? 1.0 : t * std::log(t) - t + 1.0;
        case DivergenceFamily::reverse_kl: return t == 0.0 ? kInf : t - 1.0 - std::log(t);
        case DivergenceFamily::pearson_chi2: return 0.5 * (t - 1.0) * (t - 1.0);
        case DivergenceFamily::neyman_chi2: return t == 0.0 ? kInf : 0.5 * (t - 1.0) * (t - 1.0) / t;
        case DivergenceFamily::hellinger: return 2.0 * (std::sqrt(t) - 1.0) * (std::sqrt(t) - 1.0);
        case DivergenceFamily::total_variation: return std::abs(t - 1.0);
        case DivergenceFamily::alpha: {
            const double a = kind.alpha_parameter();
            if (t == 0.0 && a <= 0.0) return kInf;
            return (std::pow(t, a) - 1.0 - a * (t - 1.0)) / (a * (a - 1.0));
        }
    }
    return kInf;
}

inline double reference_divergence(const DivergenceKind& kind, const Vector& pi, const Vector& pi_nom) {
    double total = 0.0;
    for (Index k = 0; k < pi.size(); ++k) total += pi_nom[k] * reference_f(kind, pi[k] / pi_nom[k]);
    return total;
}

/// Golden-section maximum of a concave function on [a, b].
inline double golden_max(const std::function<double(double)>& h, double a, double b) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double h1 = h(x1), h2 = h(x2);
    for (int it = 0; it < 300 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (h1 < h2) {
            a = x1;
            x1 = x2;
            h1 = h2;
            x2 = a + r * (b - a);
            h2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            h2 = h1;
            x1 = b - r * (b - a);
            h1 = h(x1);
        }
    }
    return std::max({h(a), h(b), h1, h2});
}

/// sup_{t >= 0} s t - f(t) by bracketing and golden search; +inf when the
/// objective still grows at t = 1e12.
inline double numerical_conjugate(const std::function<double(double)>& f, double s) {
    auto h = [&](double t) { return s * t - f(t); };
    double hi = 1.0;
    while (h(2.0 * hi) > h(hi)) {
        hi *= 2.0;
        if (hi > 1e12) return kInf;
    }
    return golden_max(h, 0.0, 2.0 * hi);
}

/// Exact optimal transport cost by a direct LP over the coupling.
inline double reference_transport(const Vector& pi, const Vector& pi_nom, const Matrix& cost) {
    const Index k = pi.size();
    auto lp = robust_kelly::LinearProgram::with_variables(k * k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) lp.objective[i * k + j] = cost(i, j);
    for (Index i = 0; i < k; ++i) {
        Vector row = Vector::Zero(k * k);
        for (Index j = 0; j < k; ++j) row[i * k + j] = 1.0;
        lp.add_eq(row, pi[i]);
    }
    for (Index j = 0; j < k - 1; ++j) {
        Vector col = Vector::Zero(k * k);
        for (Index i = 0; i < k; ++i) col[i * k + j] = 1.0;
        lp.add_eq(col, pi_nom[j]);
    }
    const auto sol = robust_kelly::solve_lp(lp, 1e-11);
    return sol.status == robust_kelly::LpStatus::optimal ? sol.objective : kInf;
}

/// Membership in the hull of affinely independent vertices through
/// barycentric coordinates.
class HullMembership {
public:
    explicit HullMembership(const std::vector<Distribution>& vertices) {
        const Index k = vertices.front().size();
        const Index m = static_cast<Index>(vertices.size());
        V_.resize(k + 1, m);
        for (Index j = 0; j < m; ++j) {
            V_.block(0, j, k, 1) = vertices[j].probs();
            V_(k, j) = 1.0;
        }
        P_ = V_.completeOrthogonalDecomposition().pseudoInverse();
    }

    bool operator()(const Vector& pi, double tol) const {
        Vector rhs(pi.size() + 1);
        rhs << pi, 1.0;
        const Vector lambda = P_ * rhs;
        return (V_ * lambda - rhs).cwiseAbs().maxCoeff() <= tol && lambda.minCoeff() >= -tol;
    }

private:
    Matrix V_;
    Matrix P_;
};

/// Membership predicate built from first principles for a generated set.
inline std::function<bool(const Vector&)> reference_membership(const AmbiguitySet& set, double tol = 1e-9) {
    using namespace robust_kelly;
    if (auto s = set.get_if<SingletonSet>()) {
        const Vector pn = s->pi_nom.probs();
        return [pn, tol](const Vector& pi) { return (pi - pn).cwiseAbs().maxCoeff() <= tol; };
    }
    if (auto s = set.get_if<ConvexHullSet>()) {
        HullMembership hull(s->vertices);
        return [hull, tol](const Vector& pi) { return hull(pi, tol); };
    }
    if (auto s = set.get_if<PolyhedralSet>()) {
        const PolyhedralSet p = *s;
        return [p, tol](const Vector& pi) {
            for (Index r = 0; r < p.A0.rows(); ++r)
                if (std::abs(p.A0.row(r).dot(pi) - p.d0[r]) > tol) return false;
            for (Index r = 0; r < p.A1.rows(); ++r)
                if (p.A1.row(r).dot(pi) > p.d1[r] + tol) return false;
            return true;
        };
    }
    if (auto s = set.get_if<BoxSet>()) {
        const Vector pn = s->pi_nom.probs(), rho = s->rho;
        return [pn, rho, tol](const Vector& pi) { return ((pi - pn).cwiseAbs() - rho).maxCoeff() <= tol; };
    }
    if (auto s = set.get_if<NormBallSet>()) {
        const Vector pn = s->pi_nom.probs();
        const Matrix Winv = s->W.inverse();
        const double p = s->p;
        return [pn, Winv, p, tol](const Vector& pi) {
            const Vector u = Winv * (pi - pn);
            double norm = 0.0;
            if (std::isinf(p))
                norm = u.cwiseAbs().maxCoeff();
            else
                norm = std::pow(u.cwiseAbs().array().pow(p).sum(), 1.0 / p);
            return norm <= 1.0 + tol;
        };
    }
    if (auto s = set.get_if<DivergenceSet>()) {
        const DivergenceSet d = *s;
        return [d, tol](const Vector& pi) {
            return reference_divergence(d.kind, pi, d.pi_nom.probs()) <= d.epsilon + tol;
        };
    }
    const WassersteinSet w = *set.get_if<WassersteinSet>();
    double cmin = kInf;
    for (Index i = 0; i < w.cost.rows(); ++i)
        for (Index j = 0; j < w.cost.cols(); ++j)
            if (i != j) cmin = std::min(cmin, w.cost(i, j));
    return [w, cmin, tol](const Vector& pi) {
        // Moved mass is at least the total variation distance.
        const double moved = 0.5 * (pi - w.pi_nom.probs()).cwiseAbs().sum();
        if (moved * cmin > w.s + tol) return false;
        return reference_transport(pi, w.pi_nom.probs(), w.cost) <= w.s + tol;
    };
}

/// A grid point known to lie in a generated set.
inline Vector known_member(const AmbiguitySet& set) {
    using namespace robust_kelly;
    if (const Distribution* pn = set.nominal()) return pn->probs();
    if (auto s = set.get_if<ConvexHullSet>()) return s->vertices.front().probs();
    return {};
}

namespace detail {

inline void grid_pass(const Vector& y, const std::function<bool(const Vector&)>& member, int steps, double& best,
                      Vector& arg) {
    const Index k = y.size();
    Vector tail_min(k);
    tail_min[k - 1] = y[k - 1];
    for (Index i = k - 2; i >= 0; --i) tail_min[i] = std::min(y[i], tail_min[i + 1]);
    std::vector<int> cells(k, 0);
    Vector pi(k);
    std::function<void(Index, int, double)> rec = [&](Index i, int left, double partial) {
        if (partial + tail_min[i] * left / double(steps) >= best) return;
        if (i == k - 1) {
            cells[i] = left;
            for (Index j = 0; j < k; ++j) pi[j] = cells[j] / double(steps);
            if (member(pi)) {
                best = partial + y[i] * left / double(steps);
                arg = pi;
            }
            return;
        }
        for (int c = 0; c <= left; ++c) {
            cells[i] = c;
            rec(i + 1, left - c, partial + y[i] * c / double(steps));
        }
    };
    rec(0, steps, 0.0);
}

}  // namespace detail

/// min pi'y over grid points of pitch 1/steps inside the set. `start`, when
/// given, must be a member. A pass on a ten times coarser subgrid runs first
/// so that the fine pass only tests points that would improve.
inline std::pair<double, Vector> grid_minimum(const Vector& y, const std::function<bool(const Vector&)>& member,
                                              const Vector& start, int steps = kGrid) {
    double best = start.size() ? start.dot(y) : kInf;
    Vector arg = start;
    if (steps % 10 == 0) detail::grid_pass(y, member, steps / 10, best, arg);
    detail::grid_pass(y, member, steps, best, arg);
    return {best, arg};
}

/// Place probabilities by enumerating ordered top-two finishes under the
/// sequential-selection model: P(j then k) = beta_j beta_k / (1 - beta_j).
inline Vector enumerate_place_probabilities(const Vector& beta) {
    const Index n = beta.size();
    std::vector<double> out;
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k)
            out.push_back(beta[j] * beta[k] / (1.0 - beta[j]) + beta[k] * beta[j] / (1.0 - beta[k]));
    return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

}  // namespace rk_test
