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


/// \file normball.hpp
/// \brief Linear minimization over the intersection of a norm-ball image set
///        and the probability simplex.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/barrier.hpp"
#include "robust_kelly/lp.hpp"
#include "robust_kelly/scalar.hpp"

namespace robust_kelly::detail {

/// Minimizer pi and the multiplier sigma >= 0 of the constraint pi >= 0.
struct NormBallPrimal {
    Vector pi;
    Vector sigma;
    bool ok = false;
};

inline NormBallPrimal normball_lp(const Vector& y, const NormBallSet& s) {
    const Index k = y.size();
    const Vector pn = s.pi_nom.probs();
    const Vector center = s.W_inv * pn;
    NormBallPrimal out;
    LpSolution sol;
    if (s.p == 1.0) {
        LinearProgram lp = LinearProgram::with_variables(3 * k);
        lp.objective.head(k) = y;
        for (Index i = 0; i < k; ++i) {
            Vector row = Vector::Zero(3 * k);
            row.head(k) = s.W_inv.row(i).transpose();
            row[k + i] = -1.0;
            row[2 * k + i] = 1.0;
            lp.add_eq(row, center[i]);
        }
        Vector ones = Vector::Zero(3 * k);
        ones.head(k).setOnes();
        lp.add_eq(ones, 1.0);
        Vector budget = Vector::Zero(3 * k);
        budget.tail(2 * k).setOnes();
        lp.add_ineq(budget, 1.0);
        sol = solve_lp(lp, 1e-10);
    } else {
        LinearProgram lp = LinearProgram::with_variables(k);
        lp.objective = y;
        for (Index i = 0; i < k; ++i) {
            lp.add_ineq(s.W_inv.row(i).transpose(), 1.0 + center[i]);
            lp.add_ineq(-s.W_inv.row(i).transpose(), 1.0 - center[i]);
        }
        lp.add_eq(Vector::Ones(k), 1.0);
        sol = solve_lp(lp, 1e-10);
    }
    if (sol.status != LpStatus::optimal) return out;
    out.pi = sol.x.head(k).cwiseMax(0.0);
    out.pi /= out.pi.sum();
    out.sigma = sol.reduced_costs.head(k).cwiseMax(0.0);
    out.ok = true;
    return out;
}

/// Diagonal W with p = 2: pi(tau) = max(0, pi_nom - tau w^2 (y - mu)) where mu
/// restores the unit sum, and tau is bisected onto the ball boundary.
inline NormBallPrimal normball_diagonal_l2(const Vector& y, const NormBallSet& s) {
    const Index k = y.size();
    const Vector pn = s.pi_nom.probs();
    const Vector w2 = s.W.diagonal().array().square();
    std::vector<Index> order(static_cast<std::size_t>(k));

    struct Point {
        Vector pi;
        double mu;
    };
    auto at = [&](double tau) -> Point {
        if (tau == 0.0) return {pn, 0.0};
        // Active once mu exceeds beta_k = y_k - pi_nom_k / (tau w_k^2).
        Vector beta(k);
        for (Index i = 0; i < k; ++i) beta[i] = y[i] - pn[i] / (tau * w2[i]);
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index a, Index b) { return beta[a] < beta[b]; });
        double a_sum = 0.0, b_sum = 0.0, mu = 0.0;
        for (std::size_t j = 0; j < order.size(); ++j) {
            const Index i = order[j];
            a_sum += pn[i] - tau * w2[i] * y[i];
            b_sum += tau * w2[i];
            mu = (1.0 - a_sum) / b_sum;
            const double next = j + 1 < order.size() ? beta[order[j + 1]] : kInf;
            if (mu <= next) break;
        }
        Vector pi(k);
        for (Index i = 0; i < k; ++i) pi[i] = std::max(0.0, pn[i] - tau * w2[i] * (y[i] - mu));
        pi /= pi.sum();
        return {pi, mu};
    };
    auto radius = [&](const Vector& pi) { return ((pi - pn).array() / s.W.diagonal().array()).matrix().norm(); };

    double lo = 0.0, hi = 1.0;
    while (radius(at(hi).pi) < 1.0 && hi < 1e15) {
        lo = hi;
        hi *= 4.0;
    }
    double tau = hi;
    if (radius(at(hi).pi) >= 1.0) tau = bisect_decreasing([&](double t) { return 1.0 - radius(at(t).pi); }, lo, hi);
    const Point best = at(tau);
    NormBallPrimal out;
    out.pi = best.pi;
    out.sigma = Vector::Zero(k);
    if (tau > 0.0) {
        for (Index i = 0; i < k; ++i)
            if (best.pi[i] == 0.0) out.sigma[i] = std::max(0.0, y[i] - best.mu - pn[i] / (tau * w2[i]));
    }
    out.ok = true;
    return out;
}

/// General W and 1 < p < inf: barrier method on (pi, v+, v-) with
/// W (v+ - v-) = pi - pi_nom and sum(v+^p + v-^p) <= 1.
inline NormBallPrimal normball_barrier(const Vector& y, const NormBallSet& s) {
    const Index k = y.size();
    const double p = s.p;
    const Vector pn = s.pi_nom.probs();
    const Vector uniform = Vector::Constant(k, 1.0 / double(k));
    const double spread = lp_norm(s.W_inv * (uniform - pn), p);
    const double theta = spread > 0.0 ? std::min(0.5, 0.5 / spread) : 0.5;
    const Vector pi0 = (1.0 - theta) * pn + theta * uniform;
    const Vector w0 = s.W_inv * (pi0 - pn);
    double delta = 0.25;
    Vector vp, vm;
    for (;;) {
        vp = w0.cwiseMax(0.0).array() + delta;
        vm = (-w0).cwiseMax(0.0).array() + delta;
        if (vp.array().pow(p).sum() + vm.array().pow(p).sum() < 0.9) break;
        delta *= 0.5;
    }
    Vector x0(3 * k);
    x0 << pi0, vp, vm;
    Matrix A = Matrix::Zero(k + 1, 3 * k);
    A.block(0, 0, k, k) = -Matrix::Identity(k, k);
    A.block(0, k, k, k) = s.W;
    A.block(0, 2 * k, k, k) = -s.W;
    A.block(k, 0, 1, k).setOnes();

    // Scale so the objective range is O(1).
    const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    const Vector ys = y / y_scale;
    BarrierFunction phi = [&](const Vector& x, double t, bool derivatives, BarrierEval& ev) {
        if (x.minCoeff() <= 0.0) return false;
        const auto v = x.tail(2 * k).array();
        const double slack = 1.0 - v.pow(p).sum();
        if (!(slack > 0.0)) return false;
        ev.value = t * ys.dot(x.head(k)) - x.array().log().sum() - std::log(slack);
        if (!derivatives) return true;
        const Vector dv = (p * v.pow(p - 1.0)).matrix();
        ev.grad.resize(3 * k);
        ev.grad.head(k) = t * ys;
        ev.grad.tail(2 * k) = dv / slack;
        ev.grad -= x.cwiseInverse();
        ev.hess = Matrix::Zero(3 * k, 3 * k);
        ev.hess.diagonal() = x.array().square().inverse().matrix();
        ev.hess.bottomRightCorner(2 * k, 2 * k).diagonal() +=
            (p * (p - 1.0) * v.pow(p - 2.0) / slack).matrix();
        ev.hess.bottomRightCorner(2 * k, 2 * k) += dv * dv.transpose() / (slack * slack);
        return true;
    };
    BarrierOptions opt;
    opt.gap_tol = 1e-12;
    const BarrierResult res = barrier_minimize(phi, 3 * k + 1, A, x0, opt);
    NormBallPrimal out;
    out.pi = res.x.head(k).cwiseMax(0.0);
    out.pi /= out.pi.sum();
    out.sigma = (y_scale / res.t) * res.x.head(k).cwiseInverse();
    out.ok = true;
    return out;
}

inline NormBallPrimal normball_minimize(const Vector& y, const NormBallSet& s) {
    if (s.p == 1.0 || std::isinf(s.p)) return normball_lp(y, s);
    if (s.p == 2.0 && s.is_diagonal()) return normball_diagonal_l2(y, s);
    return normball_barrier(y, s);
}

}  // namespace robust_kelly::detail
