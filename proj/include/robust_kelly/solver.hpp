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


/// \file solver.hpp
/// \brief Nominal and distributionally robust Kelly solvers with certified
///        suboptimality gaps.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/barrier.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/lp.hpp"
#include "robust_kelly/oracle.hpp"

namespace robust_kelly {

inline constexpr double kDefaultSolveTolerance = 1e-6;
inline constexpr int kDefaultMaxIterations = 10000;

struct TracePoint {
    double value = 0.0;
    double gap = 0.0;
};

struct SolveReport {
    Bet b_star = Bet::uniform(1);
    double value = 0.0;       // worst-case growth at b_star, recomputed by the oracle
    double dual_value = 0.0;  // dual objective at the oracle's multipliers
    double gap = 0.0;         // certified bound on (optimal value - value)
    int iterations = 0;
    int oracle_calls = 0;
    bool converged = false;
    std::chrono::duration<double> wall_time{0.0};
    Distribution worst_case = Distribution::uniform(1);
    std::vector<TracePoint> trace;
};

/// Worst-case value at a bet together with a certified optimality gap.
struct Certificate {
    double value = 0.0;
    double gap = 0.0;
};

namespace detail {

/// Linearization bound: max over b' in B of min_j [G_j(b) + g_j'(b' - b)],
/// which bounds max_{b'} min_j G_j(b') from above by concavity.
inline double linearization_bound(const BettingMarket& market, const Vector& b, const std::vector<Vector>& pool) {
    const Index n = market.num_bets();
    const BetConstraintSet& bets = market.constraints();
    LinearProgram lp = LinearProgram::with_variables(n + 1);
    lp.lower.head(n) = bets.lower();
    lp.upper.head(n) = bets.upper();
    lp.lower[n] = -kInf;
    lp.objective[n] = -1.0;
    for (Index r = 0; r < bets.F().rows(); ++r) {
        Vector row = Vector::Zero(n + 1);
        row.head(n) = bets.F().row(r).transpose();
        lp.add_ineq(row, bets.g()[r]);
    }
    Vector ones = Vector::Zero(n + 1);
    ones.head(n).setOnes();
    lp.add_eq(ones, 1.0);
    bool any = false;
    for (const Vector& pi : pool) {
        const double g0 = log_growth(market, b, pi);
        if (!std::isfinite(g0)) continue;
        const Vector grad = growth_supergradient(market, b, pi);
        Vector row(n + 1);
        row.head(n) = -grad;
        row[n] = 1.0;
        lp.add_ineq(row, g0 - grad.dot(b));
        any = true;
    }
    if (!any) return kInf;
    const LpSolution sol = solve_lp(lp, 1e-12);
    if (sol.status != LpStatus::optimal) return kInf;
    // The dual objective is a valid bound even when the primal is slightly off.
    return std::max(-sol.objective, -sol.dual_objective);
}

/// Geometry of B for the barrier: free coordinates, the fixed remainder, and a
/// strictly interior starting point.
struct BetGeometry {
    std::vector<Index> free;
    Vector fixed_point;  // full-length bet with free entries zeroed
    Matrix F_free;
    Vector g_free;
    Vector start;  // values of the free coordinates
};

inline BetGeometry bet_geometry(const BetConstraintSet& bets) {
    const Index n = bets.size();
    BetGeometry geo;
    geo.fixed_point = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        if (bets.upper()[i] - bets.lower()[i] > 0.0)
            geo.free.push_back(i);
        else
            geo.fixed_point[i] = bets.lower()[i];
    }
    const Index nf = static_cast<Index>(geo.free.size());
    geo.F_free.resize(bets.F().rows(), nf);
    for (Index j = 0; j < nf; ++j) geo.F_free.col(j) = bets.F().col(geo.free[static_cast<std::size_t>(j)]);
    geo.g_free = bets.g() - bets.F() * geo.fixed_point;
    const double rest = 1.0 - geo.fixed_point.sum();
    if (nf == 0) {
        geo.start.resize(0);
        return geo;
    }
    Vector lo(nf), hi(nf);
    for (Index j = 0; j < nf; ++j) {
        lo[j] = bets.lower()[geo.free[static_cast<std::size_t>(j)]];
        hi[j] = bets.upper()[geo.free[static_cast<std::size_t>(j)]];
    }
    auto interior = [&](const Vector& v, double margin) {
        if ((v - lo).minCoeff() <= margin || (hi - v).minCoeff() <= margin) return false;
        return geo.F_free.rows() == 0 || (geo.g_free - geo.F_free * v).minCoeff() > margin;
    };
    const Vector uniform = Vector::Constant(nf, rest / double(nf));
    if (interior(uniform, 1e-9)) {
        geo.start = uniform;
        return geo;
    }
    // Chebyshev centre: max r s.t. lo + r <= v <= hi - r, F v + r |F_i| <= g.
    LinearProgram lp = LinearProgram::with_variables(nf + 1);
    lp.lower.head(nf) = lo;
    lp.upper.head(nf) = hi;
    lp.objective[nf] = -1.0;
    for (Index j = 0; j < nf; ++j) {
        Vector row = Vector::Zero(nf + 1);
        row[j] = -1.0;
        row[nf] = 1.0;
        lp.add_ineq(row, -lo[j]);
        row[j] = 1.0;
        lp.add_ineq(row, hi[j]);
    }
    for (Index r = 0; r < geo.F_free.rows(); ++r) {
        Vector row(nf + 1);
        row.head(nf) = geo.F_free.row(r).transpose();
        row[nf] = geo.F_free.row(r).norm();
        lp.add_ineq(row, geo.g_free[r]);
    }
    Vector ones = Vector::Zero(nf + 1);
    ones.head(nf).setOnes();
    lp.add_eq(ones, rest);
    lp.upper[nf] = 1.0;
    const LpSolution sol = solve_lp(lp, 1e-10);
    if (sol.status != LpStatus::optimal || sol.x[nf] <= 1e-9)
        throw std::invalid_argument("bet constraints: the feasible set has an empty relative interior");
    geo.start = sol.x.head(nf);
    return geo;
}

inline Vector expand(const BetGeometry& geo, const Vector& free_values) {
    Vector b = geo.fixed_point;
    for (std::size_t j = 0; j < geo.free.size(); ++j) b[geo.free[j]] = free_values[static_cast<Index>(j)];
    return b;
}

/// Barrier solve of max_{b in B} min_j pi_j' log(R'b) over a finite pool.
inline Vector solve_master(const BettingMarket& market, const BetGeometry& geo, const std::vector<Vector>& pool,
                           const Vector& warm) {
    const BetConstraintSet& bets = market.constraints();
    const Index nf = static_cast<Index>(geo.free.size());
    const Index k = market.num_outcomes();
    const Index J = static_cast<Index>(pool.size());
    Matrix Rf(nf, k);
    Vector lo(nf), hi(nf);
    for (Index j = 0; j < nf; ++j) {
        const Index i = geo.free[static_cast<std::size_t>(j)];
        Rf.row(j) = market.returns().row(i);
        lo[j] = bets.lower()[i];
        hi[j] = bets.upper()[i];
    }
    const Vector base = market.returns().transpose() * geo.fixed_point;
    Matrix P(k, J);
    for (Index j = 0; j < J; ++j) P.col(j) = pool[static_cast<std::size_t>(j)];
    std::vector<bool> upper_active(static_cast<std::size_t>(nf));
    Index num_ineq = J + nf + geo.F_free.rows();
    for (Index j = 0; j < nf; ++j) {
        upper_active[static_cast<std::size_t>(j)] = hi[j] < 1.0;
        if (hi[j] < 1.0) ++num_ineq;
    }
    const Vector used = P.rowwise().maxCoeff();

    auto growth = [&](const Vector& bf, Vector& a, Vector& G) -> bool {
        a = base + Rf.transpose() * bf;
        Vector la(k);
        for (Index i = 0; i < k; ++i) {
            if (used[i] > 0.0 && !(a[i] > 0.0)) return false;
            la[i] = a[i] > 0.0 ? std::log(a[i]) : 0.0;
        }
        G = P.transpose() * la;
        return true;
    };

    BarrierFunction phi = [&](const Vector& x, double t, bool derivatives, BarrierEval& ev) {
        const Vector bf = x.head(nf);
        const double level = x[nf];
        Vector a, G;
        if (!growth(bf, a, G)) return false;
        const Vector slack = G.array() - level;
        if (!(slack.minCoeff() > 0.0)) return false;
        const Vector lo_gap = bf - lo;
        if (nf > 0 && !(lo_gap.minCoeff() > 0.0)) return false;
        double value = -t * level - slack.array().log().sum() - lo_gap.array().log().sum();
        Vector hi_gap = hi - bf;
        for (Index j = 0; j < nf; ++j) {
            if (!upper_active[static_cast<std::size_t>(j)]) continue;
            if (!(hi_gap[j] > 0.0)) return false;
            value -= std::log(hi_gap[j]);
        }
        Vector f_gap;
        if (geo.F_free.rows() > 0) {
            f_gap = geo.g_free - geo.F_free * bf;
            if (!(f_gap.minCoeff() > 0.0)) return false;
            value -= f_gap.array().log().sum();
        }
        ev.value = value;
        if (!derivatives) return true;
        const Vector inv_a = a.cwiseInverse();
        const Vector inv_slack = slack.cwiseInverse();
        // Column j: gradient of G_j with respect to the free coordinates.
        const Matrix grads = Rf * (inv_a.asDiagonal() * P);
        ev.grad = Vector::Zero(nf + 1);
        ev.grad.head(nf) = -grads * inv_slack - lo_gap.cwiseInverse();
        ev.grad[nf] = -t + inv_slack.sum();
        Matrix stacked(nf + 1, J);
        stacked.topRows(nf) = grads * inv_slack.asDiagonal();
        stacked.row(nf) = -inv_slack.transpose();
        ev.hess = stacked * stacked.transpose();
        const Vector curvature = (P * inv_slack).cwiseProduct(inv_a).cwiseProduct(inv_a);
        ev.hess.topLeftCorner(nf, nf) += Rf * curvature.asDiagonal() * Rf.transpose();
        ev.hess.topLeftCorner(nf, nf).diagonal() += lo_gap.array().square().inverse().matrix();
        for (Index j = 0; j < nf; ++j) {
            if (!upper_active[static_cast<std::size_t>(j)]) continue;
            ev.grad[j] += 1.0 / hi_gap[j];
            ev.hess(j, j) += 1.0 / (hi_gap[j] * hi_gap[j]);
        }
        if (geo.F_free.rows() > 0) {
            const Vector inv_f = f_gap.cwiseInverse();
            ev.grad.head(nf) += geo.F_free.transpose() * inv_f;
            const Matrix scaled = inv_f.asDiagonal() * geo.F_free;
            ev.hess.topLeftCorner(nf, nf) += scaled.transpose() * scaled;
        }
        return true;
    };

    Vector a, G;
    Vector start = warm;
    if (!growth(start, a, G)) {
        start = geo.start;
        growth(start, a, G);
    }
    Vector x0(nf + 1);
    x0.head(nf) = start;
    x0[nf] = G.minCoeff() - 1.0;
    Matrix A = Matrix::Zero(1, nf + 1);
    A.block(0, 0, 1, nf).setOnes();
    BarrierOptions opt;
    opt.gap_tol = 1e-12;
    return barrier_minimize(phi, num_ineq, A, x0, opt).x.head(nf);
}

/// Moves coordinates within `slack` of a bound onto it when the result stays in B.
inline std::optional<Vector> snap_to_bounds(const BetConstraintSet& bets, const Vector& b, double slack) {
    Vector out = b;
    bool changed = false;
    for (Index i = 0; i < b.size(); ++i) {
        if (b[i] - bets.lower()[i] < slack && b[i] != bets.lower()[i]) {
            out[i] = bets.lower()[i];
            changed = true;
        } else if (bets.upper()[i] < 1.0 && bets.upper()[i] - b[i] < slack && b[i] != bets.upper()[i]) {
            out[i] = bets.upper()[i];
            changed = true;
        }
    }
    if (!changed) return std::nullopt;
    // Restore the unit sum on the coordinates that were left alone.
    double moved = 1.0 - out.sum();
    double room = 0.0;
    for (Index i = 0; i < b.size(); ++i)
        if (out[i] == b[i]) room += out[i];
    if (room <= 0.0) return std::nullopt;
    for (Index i = 0; i < b.size(); ++i)
        if (out[i] == b[i]) out[i] += moved * out[i] / room;
    if (!bets.contains(out, 1e-12)) return std::nullopt;
    return out;
}

inline bool in_pool(const std::vector<Vector>& pool, const Vector& pi) {
    for (const Vector& p : pool)
        if ((p - pi).cwiseAbs().maxCoeff() <= 1e-13) return true;
    return false;
}

}  // namespace detail

/// Worst-case value at b and the gap max_{b' in B} g'(b' - b), where g is the
/// gradient of the growth rate under the worst-case distribution.
inline Certificate certify(const BettingMarket& market, const AmbiguitySet& set, const Bet& b,
                           double tol = kDefaultSolveTolerance) {
    const WorstCaseResult wc = worst_case(market, b, set, std::min(tol, kDefaultOracleTolerance));
    Certificate c{wc.value, kInf};
    if (!std::isfinite(wc.value)) return c;
    const double bound = detail::linearization_bound(market, b.alloc(), {wc.pi_star.probs()});
    c.gap = std::max(0.0, bound - wc.lower_bound);
    return c;
}

/// Maximizes the worst-case growth over B. Each round solves the problem
/// restricted to a finite pool of distributions from the set, queries the
/// oracle at the result, and adds the new worst case to the pool.
inline SolveReport solve_drkp(const BettingMarket& market, const AmbiguitySet& set,
                              double tol = kDefaultSolveTolerance, int max_iter = kDefaultMaxIterations,
                              bool keep_trace = false) {
    detail::require(tol > 0.0, "solve: tolerance must be positive");
    detail::require(set.dimension() == market.num_outcomes(), "solve: set and market differ in outcomes");
    const auto started = std::chrono::steady_clock::now();
    const BetConstraintSet& bets = market.constraints();
    const detail::BetGeometry geo = detail::bet_geometry(bets);
    const double oracle_tol = std::min(0.1 * tol, kDefaultOracleTolerance);

    SolveReport report;
    report.b_star = Bet(detail::expand(geo, geo.start));
    Vector best_b = report.b_star.alloc();
    WorstCaseResult best = worst_case(market, best_b, set, oracle_tol);
    ++report.oracle_calls;

    auto finish = [&](double gap, bool converged) {
        report.b_star = Bet(best_b);
        report.value = best.value;
        report.dual_value = best.lower_bound;
        report.gap = gap;
        report.worst_case = best.pi_star;
        report.converged = converged && std::abs(best.value - best.lower_bound) <= 10.0 * tol;
        report.wall_time = std::chrono::steady_clock::now() - started;
        return report;
    };

    // A -inf value at the interior start means some outcome the set can weight
    // pays nothing anywhere on B, so every bet is equally bad.
    if (!std::isfinite(best.value) || geo.free.empty()) return finish(0.0, true);

    std::vector<Vector> pool{best.pi_star.probs()};
    if (const auto* hull = set.get_if<ConvexHullSet>()) {
        pool.clear();
        for (const auto& v : hull->vertices) pool.push_back(v.probs());
    } else if (const Distribution* nominal = set.nominal()) {
        if (!detail::in_pool(pool, nominal->probs())) pool.push_back(nominal->probs());
    }

    Vector warm = geo.start;
    double upper = kInf;
    for (int iter = 0; iter < max_iter; ++iter) {
        report.iterations = iter + 1;
        const Vector bf = detail::solve_master(market, geo, pool, warm);
        warm = bf;
        const Vector b = detail::expand(geo, bf);
        std::vector<Vector> candidates{b};
        if (auto snapped = detail::snap_to_bounds(bets, b, 1e-5)) candidates.push_back(*snapped);
        std::optional<WorstCaseResult> at_master;
        for (const Vector& cand : candidates) {
            WorstCaseResult wc = worst_case(market, cand, set, oracle_tol);
            ++report.oracle_calls;
            if (wc.lower_bound > best.lower_bound || !std::isfinite(best.lower_bound)) {
                best = wc;
                best_b = cand;
            }
            if (!at_master) at_master = std::move(wc);
        }
        upper = std::min({upper, detail::linearization_bound(market, b, pool),
                          detail::linearization_bound(market, best_b, pool)});
        const double gap = std::max(0.0, upper - best.lower_bound);
        if (keep_trace) report.trace.push_back({best.value, gap});
        if (gap <= tol) return finish(gap, true);
        const Vector& fresh = at_master->pi_star.probs();
        if (detail::in_pool(pool, fresh)) return finish(gap, false);
        pool.push_back(fresh);
    }
    return finish(std::max(0.0, upper - best.lower_bound), false);
}

/// Kelly problem under a single known distribution.
inline SolveReport solve_kelly(const BettingMarket& market, const Distribution& pi,
                               double tol = kDefaultSolveTolerance, int max_iter = kDefaultMaxIterations,
                               bool keep_trace = false) {
    return solve_drkp(market, AmbiguitySet::singleton(pi), tol, max_iter, keep_trace);
}

}  // namespace robust_kelly
