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


/// \file duals.hpp
/// \brief Dual representations of the worst-case growth rate for each
///        ambiguity-set family: evaluation at given multipliers and
///        maximization at a fixed bet.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include <Eigen/Dense>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/divergence.hpp"
#include "robust_kelly/lp.hpp"
#include "robust_kelly/normball.hpp"
#include "robust_kelly/scalar.hpp"

namespace robust_kelly {

struct PolyhedralDuals {
    Vector nu;      // equality multipliers, one per row of A0
    Vector lambda;  // inequality multipliers >= 0, one per row of A1
};

/// Signed multiplier lambda = lambda_plus - lambda_minus of the two-sided bounds.
struct BoxDuals {
    Vector lambda;
};

struct NormBallDuals {
    Vector u;  // u <= log(R'b)
    double mu = 0.0;
};

struct DivergenceDuals {
    double lambda = 0.0;
    double gamma = 0.0;
    Vector w;
    Vector z;

    /// Multipliers (lambda, gamma) completed with the tightest feasible z and w.
    static DivergenceDuals tight(const Vector& y, const DivergenceSet& set, double lambda, double gamma) {
        const ConjugatePair pair(set.kind);
        DivergenceDuals d{lambda, gamma, Vector(y.size()), Vector(y.size())};
        for (Index k = 0; k < y.size(); ++k) {
            d.z[k] = -y[k] - gamma;
            d.w[k] = pair.perspective(lambda, d.z[k]);
        }
        return d;
    }
};

struct WassersteinDuals {
    double lambda = 0.0;
};

/// Certificate payload; monostate for the singleton and convex-hull sets,
/// whose worst case is attained at a listed point.
using DualVariables =
    std::variant<std::monostate, PolyhedralDuals, BoxDuals, NormBallDuals, DivergenceDuals, WassersteinDuals>;

/// A dual point together with its objective value.
template <class D>
struct DualOptimum {
    D duals;
    double value = -kInf;
};

// ---------------------------------------------------------------------------
// Evaluation on a log-return vector y = log(R'b).

inline double dual_value(const Vector& y, const PolyhedralSet& set, const PolyhedralDuals& d) {
    detail::require(d.nu.size() == set.A0.rows() && d.lambda.size() == set.A1.rows(),
                    "polyhedral duals: wrong dimension");
    detail::require(d.lambda.size() == 0 || d.lambda.minCoeff() >= 0.0, "polyhedral duals: lambda must be >= 0");
    Vector shifted = y;
    if (set.A0.rows() > 0) shifted += set.A0.transpose() * d.nu;
    if (set.A1.rows() > 0) shifted += set.A1.transpose() * d.lambda;
    return shifted.minCoeff() - set.d0.dot(d.nu) - set.d1.dot(d.lambda);
}

inline double dual_value(const Vector& y, const BoxSet& set, const BoxDuals& d) {
    detail::require(d.lambda.size() == y.size(), "box duals: wrong dimension");
    return (y + d.lambda).minCoeff() - set.pi_nom.probs().dot(d.lambda) - set.rho.dot(d.lambda.cwiseAbs());
}

inline double dual_value(const Vector& y, const NormBallSet& set, const NormBallDuals& d) {
    detail::require(d.u.size() == y.size(), "norm-ball duals: wrong dimension");
    for (Index k = 0; k < y.size(); ++k)
        if (d.u[k] > y[k]) return -kInf;
    const Vector shifted = d.u.array() - d.mu;
    return set.pi_nom.probs().dot(d.u) - lp_norm(set.W.transpose() * shifted, set.q());
}

inline double dual_value(const Vector& y, const DivergenceSet& set, const DivergenceDuals& d) {
    detail::require(d.w.size() == y.size() && d.z.size() == y.size(), "divergence duals: wrong dimension");
    if (!(d.lambda >= 0.0)) return -kInf;
    const ConjugatePair pair(set.kind);
    for (Index k = 0; k < y.size(); ++k) {
        if (d.z[k] < -y[k] - d.gamma) return -kInf;
        const double floor = pair.perspective(d.lambda, d.z[k]);
        if (!std::isfinite(floor) || d.w[k] < floor) return -kInf;
    }
    return -set.pi_nom.probs().dot(d.w) - set.epsilon * d.lambda - d.gamma;
}

inline double dual_value(const Vector& y, const WassersteinSet& set, const WassersteinDuals& d) {
    if (!(d.lambda >= 0.0)) return -kInf;
    const Vector& pn = set.pi_nom.probs();
    double total = 0.0;
    for (Index j = 0; j < y.size(); ++j) {
        if (pn[j] == 0.0) continue;
        total += pn[j] * (y + d.lambda * set.cost.col(j)).minCoeff();
    }
    return total - set.s * d.lambda;
}

// Market-level entry points.

inline double dual_value_polyhedral(const BettingMarket& m, const Bet& b, const PolyhedralSet& set,
                                    const PolyhedralDuals& d) {
    return dual_value(m.log_returns(b.alloc()), set, d);
}
inline double dual_value_box(const BettingMarket& m, const Bet& b, const BoxSet& set, const BoxDuals& d) {
    return dual_value(m.log_returns(b.alloc()), set, d);
}
inline double dual_value_normball(const BettingMarket& m, const Bet& b, const NormBallSet& set,
                                  const NormBallDuals& d) {
    return dual_value(m.log_returns(b.alloc()), set, d);
}
inline double dual_value_divergence(const BettingMarket& m, const Bet& b, const DivergenceSet& set,
                                    const DivergenceDuals& d) {
    return dual_value(m.log_returns(b.alloc()), set, d);
}
inline double dual_value_wasserstein(const BettingMarket& m, const Bet& b, const WassersteinSet& set,
                                     const WassersteinDuals& d) {
    return dual_value(m.log_returns(b.alloc()), set, d);
}

// ---------------------------------------------------------------------------
// Maximization over the multipliers at a fixed, finite y.

/// LP over (t, nu, lambda): max t - d0'nu - d1'lambda s.t. t <= y + A0'nu + A1'lambda.
inline DualOptimum<PolyhedralDuals> maximize_dual(const Vector& y, const PolyhedralSet& set) {
    const Index k = y.size(), m0 = set.A0.rows(), m1 = set.A1.rows();
    LinearProgram lp = LinearProgram::with_variables(1 + m0 + m1);
    lp.lower.head(1 + m0).setConstant(-kInf);
    lp.objective[0] = -1.0;
    lp.objective.segment(1, m0) = set.d0;
    lp.objective.tail(m1) = set.d1;
    for (Index i = 0; i < k; ++i) {
        Vector row(1 + m0 + m1);
        row[0] = 1.0;
        row.segment(1, m0) = -set.A0.col(i);
        row.tail(m1) = -set.A1.col(i);
        lp.add_ineq(row, y[i]);
    }
    const LpSolution sol = solve_lp(lp, 1e-11);
    DualOptimum<PolyhedralDuals> out;
    if (sol.status != LpStatus::optimal) return out;
    out.duals.nu = sol.x.segment(1, m0);
    out.duals.lambda = sol.x.tail(m1).cwiseMax(0.0);
    out.value = dual_value(y, set, out.duals);
    return out;
}

/// For a fixed level t = min(y + lambda) the best lambda is explicit, and the
/// resulting concave piecewise-linear function of t peaks at some t = y_k.
inline DualOptimum<BoxDuals> maximize_dual(const Vector& y, const BoxSet& set) {
    const Index k = y.size();
    const Vector& pn = set.pi_nom.probs();
    auto lambda_at = [&](double t) {
        Vector lambda(k);
        for (Index i = 0; i < k; ++i) {
            const double shift = t - y[i];
            lambda[i] = (shift >= 0.0 || pn[i] > set.rho[i]) ? shift : 0.0;
        }
        return lambda;
    };
    DualOptimum<BoxDuals> out;
    for (Index j = 0; j < k; ++j) {
        BoxDuals cand{lambda_at(y[j])};
        const double v = dual_value(y, set, cand);
        if (v > out.value) {
            out.value = v;
            out.duals = std::move(cand);
        }
    }
    return out;
}

/// Multipliers u = y - sigma from the constraint pi >= 0, with mu chosen to
/// minimize the norm term.
inline DualOptimum<NormBallDuals> normball_duals_from_sigma(const Vector& y, const NormBallSet& set,
                                                            const Vector& sigma) {
    DualOptimum<NormBallDuals> out;
    out.duals.u = (y - sigma.cwiseMax(0.0)).cwiseMin(y);
    const Matrix Wt = set.W.transpose();
    const Vector ones_image = Wt * Vector::Ones(y.size());
    const Vector base = Wt * out.duals.u;
    const double q = set.q();
    auto term = [&](double mu) { return lp_norm(base - mu * ones_image, q); };
    out.duals.mu = detail::convex_minimize(term, out.duals.u.minCoeff(), out.duals.u.maxCoeff()).first;
    out.value = dual_value(y, set, out.duals);
    return out;
}

/// Optimal multipliers recovered from the primal minimizer.
inline DualOptimum<NormBallDuals> maximize_dual(const Vector& y, const NormBallSet& set) {
    const detail::NormBallPrimal primal = detail::normball_minimize(y, set);
    if (!primal.ok) return {};
    return normball_duals_from_sigma(y, set, primal.sigma);
}

namespace detail {

/// Inner maximization over gamma at fixed lambda > 0:
/// sum_k pi_nom_k (f*)'((-y_k - gamma) / lambda) = 1.
inline double divergence_gamma(const Vector& y, const Vector& pn, const ConjugatePair& pair, double lambda) {
    const double hi = -y.minCoeff();
    double lo = -y.maxCoeff();
    if (std::isfinite(pair.domain_sup())) lo = std::max(lo, hi - lambda * pair.domain_sup());
    if (!(lo < hi)) return hi;
    auto excess = [&](double gamma) {
        double total = 0.0;
        for (Index k = 0; k < y.size(); ++k) total += pn[k] * pair.f_star_slope((-y[k] - gamma) / lambda);
        return total - 1.0;
    };
    return bisect_decreasing(excess, lo, hi);
}

/// Divergence of the stationary distribution pi_k = pi_nom_k (f*)'(s_k) at lambda.
inline double divergence_slope(const Vector& y, const Vector& pn, const ConjugatePair& pair, double lambda,
                               double gamma) {
    double total = 0.0;
    for (Index k = 0; k < y.size(); ++k) total += pn[k] * pair.f(pair.f_star_slope((-y[k] - gamma) / lambda));
    return total;
}

inline DualOptimum<DivergenceDuals> total_variation_dual(const Vector& y, const DivergenceSet& set) {
    // Variables (lambda >= 0, gamma free, m free); maximize pi_nom'm - eps lambda - gamma
    // subject to m_k <= y_k + gamma, m_k <= lambda and -gamma - lambda <= min(y).
    const Index k = y.size();
    LinearProgram lp = LinearProgram::with_variables(2 + k);
    lp.lower.tail(k + 1).setConstant(-kInf);
    lp.objective[0] = set.epsilon;
    lp.objective[1] = 1.0;
    lp.objective.tail(k) = -set.pi_nom.probs();
    for (Index i = 0; i < k; ++i) {
        Vector row = Vector::Zero(2 + k);
        row[2 + i] = 1.0;
        row[1] = -1.0;
        lp.add_ineq(row, y[i]);
        row[1] = 0.0;
        row[0] = -1.0;
        lp.add_ineq(row, 0.0);
    }
    Vector floor = Vector::Zero(2 + k);
    floor[0] = -1.0;
    floor[1] = -1.0;
    lp.add_ineq(floor, y.minCoeff());
    const LpSolution sol = solve_lp(lp, 1e-11);
    DualOptimum<DivergenceDuals> out;
    if (sol.status != LpStatus::optimal) return out;
    const double lambda = std::max(sol.x[0], 0.0);
    // Restore z <= lambda exactly after round-off.
    double gamma = std::max(sol.x[1], -y.minCoeff() - lambda);
    out.duals = DivergenceDuals::tight(y, set, lambda, gamma);
    out.value = dual_value(y, set, out.duals);
    // z / lambda can round just past 1, where the conjugate is +inf.
    for (int i = 0; i < 16 && !std::isfinite(out.value); ++i) {
        gamma += 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(gamma));
        out.duals = DivergenceDuals::tight(y, set, lambda, gamma);
        out.value = dual_value(y, set, out.duals);
    }
    return out;
}

}  // namespace detail

/// Two-variable dual search. The derivative in lambda equals the divergence of
/// the stationary distribution minus epsilon, so lambda is found by bisection.
inline DualOptimum<DivergenceDuals> maximize_dual(const Vector& y, const DivergenceSet& set) {
    if (set.kind.family() == DivergenceFamily::total_variation) return detail::total_variation_dual(y, set);
    const ConjugatePair pair(set.kind);
    const Vector& pn = set.pi_nom.probs();
    DualOptimum<DivergenceDuals> out;
    // lambda = 0 limit: gamma = -min(y), value min(y).
    out.duals = DivergenceDuals::tight(y, set, 0.0, -y.minCoeff());
    out.value = dual_value(y, set, out.duals);
    if (y.maxCoeff() - y.minCoeff() == 0.0) return out;

    auto slope = [&](double log_lambda) {
        const double lambda = std::exp(log_lambda);
        const double gamma = detail::divergence_gamma(y, pn, pair, lambda);
        return detail::divergence_slope(y, pn, pair, lambda, gamma) - set.epsilon;
    };
    const double scale = std::log(y.maxCoeff() - y.minCoeff());
    double hi = scale, lo = scale;
    while (slope(hi) >= 0.0 && hi < scale + 200.0) hi += 2.0;
    while (slope(lo) < 0.0 && lo > scale - 200.0) lo -= 2.0;
    double log_lambda = hi;
    if (slope(lo) >= 0.0) {
        log_lambda = detail::bisect_decreasing(slope, lo, hi);
    }
    for (double cand : {log_lambda, std::nextafter(log_lambda, kInf)}) {
        const double lambda = std::exp(cand);
        const double gamma = detail::divergence_gamma(y, pn, pair, lambda);
        DivergenceDuals d = DivergenceDuals::tight(y, set, lambda, gamma);
        const double v = dual_value(y, set, d);
        if (v > out.value) {
            out.value = v;
            out.duals = std::move(d);
        }
    }
    return out;
}

/// The objective is concave piecewise linear in lambda; it peaks at 0 or at a
/// crossing of two of the lines y_i + lambda c_ij for some column j.
inline DualOptimum<WassersteinDuals> maximize_dual(const Vector& y, const WassersteinSet& set) {
    const Index k = y.size();
    std::vector<double> candidates{0.0};
    for (Index j = 0; j < k; ++j) {
        if (set.pi_nom[j] == 0.0) continue;
        for (Index a = 0; a < k; ++a)
            for (Index b = a + 1; b < k; ++b) {
                const double dc = set.cost(a, j) - set.cost(b, j);
                if (dc == 0.0) continue;
                const double lambda = (y[b] - y[a]) / dc;
                if (lambda > 0.0 && std::isfinite(lambda)) candidates.push_back(lambda);
            }
    }
    DualOptimum<WassersteinDuals> out;
    for (double lambda : candidates) {
        const double v = dual_value(y, set, WassersteinDuals{lambda});
        if (v > out.value) {
            out.value = v;
            out.duals.lambda = lambda;
        }
    }
    return out;
}

inline DualOptimum<PolyhedralDuals> maximize_polyhedral_dual(const BettingMarket& m, const Bet& b,
                                                             const PolyhedralSet& set) {
    return maximize_dual(m.log_returns(b.alloc()), set);
}
inline DualOptimum<BoxDuals> maximize_box_dual(const BettingMarket& m, const Bet& b, const BoxSet& set) {
    return maximize_dual(m.log_returns(b.alloc()), set);
}
inline DualOptimum<NormBallDuals> maximize_normball_dual(const BettingMarket& m, const Bet& b,
                                                         const NormBallSet& set) {
    return maximize_dual(m.log_returns(b.alloc()), set);
}
inline DualOptimum<DivergenceDuals> maximize_divergence_dual(const BettingMarket& m, const Bet& b,
                                                             const DivergenceSet& set) {
    return maximize_dual(m.log_returns(b.alloc()), set);
}
inline DualOptimum<WassersteinDuals> maximize_wasserstein_dual(const BettingMarket& m, const Bet& b,
                                                               const WassersteinSet& set) {
    return maximize_dual(m.log_returns(b.alloc()), set);
}

}  // namespace robust_kelly
