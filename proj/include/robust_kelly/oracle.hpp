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


/// \file oracle.hpp
/// \brief Exact inner worst case: minimize pi' log(R'b) over an ambiguity set,
///        with a dual lower bound certifying the result.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/duals.hpp"
#include "robust_kelly/lp.hpp"
#include "robust_kelly/normball.hpp"

namespace robust_kelly {

inline constexpr double kDefaultOracleTolerance = 1e-7;

struct WorstCaseResult {
    Distribution pi_star;
    double value = 0.0;        // pi_star' y, an upper bound on the infimum
    double lower_bound = 0.0;  // dual objective at `certificate`
    DualVariables certificate;
    double gap = 0.0;  // value - lower_bound, clipped at zero
    bool converged = true;
};

namespace detail {

inline WorstCaseResult finish(Vector pi, const Vector& y, double lower, DualVariables cert) {
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
    WorstCaseResult r{Distribution(std::move(pi)), 0.0, lower, std::move(cert), 0.0, true};
    r.value = r.pi_star.probs().dot(y);
    r.gap = std::max(0.0, r.value - lower);
    return r;
}

inline WorstCaseResult minimize_polyhedral(const Vector& y, const PolyhedralSet& s) {
    const Index k = y.size(), m0 = s.A0.rows();
    LinearProgram lp = LinearProgram::with_variables(k);
    lp.objective = y;
    for (Index r = 0; r < m0; ++r) lp.add_eq(s.A0.row(r).transpose(), s.d0[r]);
    lp.add_eq(Vector::Ones(k), 1.0);
    lp.ineq_matrix = s.A1;
    lp.ineq_rhs = s.d1;
    const LpSolution sol = solve_lp(lp, 1e-11);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("polyhedral worst case: LP failed");
    PolyhedralDuals d{sol.eq_duals.head(m0), sol.ineq_duals.cwiseMax(0.0)};
    const double lower = dual_value(y, s, d);
    return finish(sol.x, y, lower, std::move(d));
}

/// Lower bounds first, then the remaining mass goes to the smallest y.
inline WorstCaseResult minimize_box(const Vector& y, const BoxSet& s) {
    const Index k = y.size();
    const Vector& pn = s.pi_nom.probs();
    const Vector lower = (pn - s.rho).cwiseMax(0.0);
    const Vector upper = (pn + s.rho).cwiseMin(1.0);
    Vector pi = lower;
    double left = 1.0 - lower.sum();
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y[a] < y[b]; });
    for (Index i : order) {
        if (left <= 0.0) break;
        const double add = std::min(left, upper[i] - lower[i]);
        pi[i] += add;
        left -= add;
    }
    DualOptimum<BoxDuals> dual = maximize_dual(y, s);
    return finish(pi, y, dual.value, std::move(dual.duals));
}

inline WorstCaseResult minimize_normball(const Vector& y, const NormBallSet& s) {
    const NormBallPrimal primal = normball_minimize(y, s);
    if (!primal.ok) throw std::runtime_error("norm-ball worst case: solver failed");
    DualOptimum<NormBallDuals> dual = normball_duals_from_sigma(y, s, primal.sigma);
    return finish(primal.pi, y, dual.value, std::move(dual.duals));
}

/// Largest step theta in [0, 1] toward `target` from pi_nom that stays in the set.
inline Vector shrink_toward_nominal(const Vector& target, const DivergenceSet& s) {
    const Vector& pn = s.pi_nom.probs();
    auto at = [&](double theta) { return Vector((1.0 - theta) * pn + theta * target); };
    if (divergence_value(s.kind, target, pn) <= s.epsilon) return target;
    const double theta =
        bisect_decreasing([&](double t) { return s.epsilon - divergence_value(s.kind, at(t), pn); }, 0.0, 1.0);
    return at(theta);
}

inline WorstCaseResult minimize_total_variation(const Vector& y, const DivergenceSet& s) {
    const Index k = y.size();
    LinearProgram lp = LinearProgram::with_variables(3 * k);
    lp.objective.head(k) = y;
    for (Index i = 0; i < k; ++i) {
        Vector row = Vector::Zero(3 * k);
        row[i] = 1.0;
        row[k + i] = -1.0;
        row[2 * k + i] = 1.0;
        lp.add_eq(row, s.pi_nom[i]);
    }
    Vector ones = Vector::Zero(3 * k);
    ones.head(k).setOnes();
    lp.add_eq(ones, 1.0);
    Vector budget = Vector::Zero(3 * k);
    budget.tail(2 * k).setOnes();
    lp.add_ineq(budget, s.epsilon);
    const LpSolution sol = solve_lp(lp, 1e-11);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("divergence worst case: LP failed");
    DualOptimum<DivergenceDuals> dual = maximize_dual(y, s);
    return finish(sol.x.head(k), y, dual.value, std::move(dual.duals));
}

inline WorstCaseResult minimize_divergence(const Vector& y, const DivergenceSet& s) {
    if (s.kind.family() == DivergenceFamily::total_variation) return minimize_total_variation(y, s);
    const Index k = y.size();
    const Vector& pn = s.pi_nom.probs();
    const ConjugatePair pair(s.kind);
    DualOptimum<DivergenceDuals> dual = maximize_dual(y, s);
    std::vector<Vector> candidates;
    if (dual.duals.lambda > 0.0) {
        Vector pi(k);
        for (Index i = 0; i < k; ++i) pi[i] = pn[i] * pair.f_star_slope(dual.duals.z[i] / dual.duals.lambda);
        if (pi.allFinite() && pi.sum() > 0.0) candidates.push_back(shrink_toward_nominal(pi / pi.sum(), s));
    }
    // Mass moved onto the minimizing outcomes.
    const double floor = y.minCoeff();
    Vector face = Vector::Zero(k);
    for (Index i = 0; i < k; ++i)
        if (y[i] == floor) face[i] = pn[i];
    candidates.push_back(shrink_toward_nominal(face / face.sum(), s));
    candidates.push_back(pn);
    const Vector* best = &candidates.front();
    for (const Vector& c : candidates)
        if (c.dot(y) < best->dot(y)) best = &c;
    return finish(*best, y, dual.value, std::move(dual.duals));
}

inline WorstCaseResult minimize_wasserstein(const Vector& y, const WassersteinSet& s) {
    const Index k = y.size();
    // Q(i, j) at i * k + j moves nominal mass of outcome j onto outcome i.
    LinearProgram lp = LinearProgram::with_variables(k * k);
    for (Index i = 0; i < k; ++i) lp.objective.segment(i * k, k).setConstant(y[i]);
    for (Index j = 0; j < k; ++j) {
        Vector row = Vector::Zero(k * k);
        for (Index i = 0; i < k; ++i) row[i * k + j] = 1.0;
        lp.add_eq(row, s.pi_nom[j]);
    }
    Vector cost(k * k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) cost[i * k + j] = s.cost(i, j);
    lp.add_ineq(cost, s.s);
    const LpSolution sol = solve_lp(lp, 1e-11);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("wasserstein worst case: LP failed");
    Vector pi(k);
    for (Index i = 0; i < k; ++i) pi[i] = sol.x.segment(i * k, k).sum();
    DualOptimum<WassersteinDuals> dual = maximize_dual(y, s);
    return finish(pi, y, dual.value, dual.duals);
}

}  // namespace detail

/// min over pi in the set of pi'x for a finite vector x.
inline WorstCaseResult minimize_linear(const AmbiguitySet& set, const Vector& x) {
    detail::require(x.size() == set.dimension(), "minimize_linear: dimension mismatch");
    detail::require(x.allFinite(), "minimize_linear: non-finite objective");
    return std::visit(
        [&](const auto& s) -> WorstCaseResult {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SingletonSet>) {
                const double v = s.pi_nom.probs().dot(x);
                return {s.pi_nom, v, v, std::monostate{}, 0.0, true};
            } else if constexpr (std::is_same_v<T, ConvexHullSet>) {
                std::size_t best = 0;
                for (std::size_t j = 1; j < s.vertices.size(); ++j)
                    if (s.vertices[j].probs().dot(x) < s.vertices[best].probs().dot(x)) best = j;
                const double v = s.vertices[best].probs().dot(x);
                return {s.vertices[best], v, v, std::monostate{}, 0.0, true};
            } else if constexpr (std::is_same_v<T, PolyhedralSet>) {
                return detail::minimize_polyhedral(x, s);
            } else if constexpr (std::is_same_v<T, BoxSet>) {
                return detail::minimize_box(x, s);
            } else if constexpr (std::is_same_v<T, NormBallSet>) {
                return detail::minimize_normball(x, s);
            } else if constexpr (std::is_same_v<T, DivergenceSet>) {
                return detail::minimize_divergence(x, s);
            } else {
                return detail::minimize_wasserstein(x, s);
            }
        },
        set.variant());
}

/// Worst-case growth inf over pi in the set of pi' log(R'b). Outcomes with zero
/// payoff give -inf whenever the set can put mass on them; otherwise they
/// carry no weight in any member and are replaced by a finite placeholder.
inline WorstCaseResult worst_case(const BettingMarket& market, const Vector& b, const AmbiguitySet& set,
                                  double tol = kDefaultOracleTolerance) {
    detail::require(set.dimension() == market.num_outcomes(), "worst_case: set and market differ in outcomes");
    Vector y = market.log_returns(b);
    Vector dead = Vector::Zero(y.size());
    double top = 0.0;
    bool any_finite = false;
    for (Index k = 0; k < y.size(); ++k) {
        if (std::isfinite(y[k])) {
            top = any_finite ? std::max(top, y[k]) : y[k];
            any_finite = true;
        } else {
            dead[k] = -1.0;
        }
    }
    if (dead.minCoeff() < 0.0) {
        WorstCaseResult probe = minimize_linear(set, dead);
        if (probe.value < -1e-12) {
            probe.value = -kInf;
            probe.lower_bound = -kInf;
            probe.gap = 0.0;
            probe.converged = true;
            return probe;
        }
        for (Index k = 0; k < y.size(); ++k)
            if (dead[k] < 0.0) y[k] = top + 1.0;
    }
    WorstCaseResult r = minimize_linear(set, y);
    if (dead.minCoeff() < 0.0) {
        // Drop the round-off mass left on the placeholders.
        Vector pi = r.pi_star.probs();
        for (Index k = 0; k < y.size(); ++k)
            if (dead[k] < 0.0) pi[k] = 0.0;
        pi /= pi.sum();
        r.pi_star = Distribution(pi);
        r.value = pi.dot(y);
        r.gap = std::max(0.0, r.value - r.lower_bound);
    }
    r.converged = r.gap <= tol;
    return r;
}

inline WorstCaseResult worst_case(const BettingMarket& market, const Bet& b, const AmbiguitySet& set,
                                  double tol = kDefaultOracleTolerance) {
    return worst_case(market, b.alloc(), set, tol);
}

}  // namespace robust_kelly
