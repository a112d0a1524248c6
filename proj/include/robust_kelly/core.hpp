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

/// \file core.hpp
/// \brief Betting market model: returns matrix, bet constraints, bets,
///        outcome distributions, and the mean log growth rate.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "robust_kelly/lp.hpp"
#include "robust_kelly/types.hpp"

namespace robust_kelly {

inline constexpr double kSimplexTolerance = 1e-9;

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

/// Validates a probability-simplex vector and projects away round-off.
/// Entries may undershoot zero and the sum may miss one by at most `tol`.
inline Vector checked_simplex_point(Vector v, double tol, const char* what) {
    require(v.size() > 0, std::string(what) + ": empty vector");
    for (Index i = 0; i < v.size(); ++i) {
        require(std::isfinite(v[i]), std::string(what) + ": non-finite entry");
        require(v[i] >= -tol, std::string(what) + ": negative entry " + std::to_string(v[i]));
    }
    const double total = v.sum();
    require(std::abs(total - 1.0) <= tol,
            std::string(what) + ": entries sum to " + std::to_string(total) + ", expected 1");
    v = v.cwiseMax(0.0);
    // Sums within rounding of one are left alone so that serialization round-trips.
    const double clipped = v.sum();
    if (std::abs(clipped - 1.0) > 4.0 * std::numeric_limits<double>::epsilon() * double(v.size())) v /= clipped;
    return v;
}

}  // namespace detail

/// A point in the outcome probability simplex.
class Distribution {
public:
    explicit Distribution(Vector probs)
        : probs_(detail::checked_simplex_point(std::move(probs), kSimplexTolerance, "distribution")) {}

    static Distribution uniform(Index k) { return Distribution(Vector::Constant(k, 1.0 / double(k))); }
    static Distribution point_mass(Index k, Index at) {
        Vector v = Vector::Zero(k);
        v[at] = 1.0;
        return Distribution(std::move(v));
    }

    const Vector& probs() const noexcept { return probs_; }
    Index size() const noexcept { return probs_.size(); }
    double operator[](Index i) const { return probs_[i]; }

private:
    Vector probs_;
};

/// A bet allocation: nonnegative fractions of wealth that sum to one.
class Bet {
public:
    explicit Bet(Vector alloc)
        : alloc_(detail::checked_simplex_point(std::move(alloc), kSimplexTolerance, "bet")) {}

    static Bet uniform(Index n) { return Bet(Vector::Constant(n, 1.0 / double(n))); }
    static Bet all_in(Index n, Index at) {
        Vector v = Vector::Zero(n);
        v[at] = 1.0;
        return Bet(std::move(v));
    }

    const Vector& alloc() const noexcept { return alloc_; }
    Index size() const noexcept { return alloc_.size(); }
    double operator[](Index i) const { return alloc_[i]; }

private:
    Vector alloc_;
};

/// Polyhedral restriction of the bet simplex:
/// { b : 1'b = 1, lower <= b <= upper, F b <= g }.
class BetConstraintSet {
public:
    BetConstraintSet(Vector lower, Vector upper, Matrix F = {}, Vector g = {})
        : lower_(std::move(lower)), upper_(std::move(upper)), F_(std::move(F)), g_(std::move(g)) {
        const Index n = lower_.size();
        detail::require(n > 0, "bet constraints: no bets");
        detail::require(upper_.size() == n, "bet constraints: lower/upper size mismatch");
        if (F_.size() == 0) {
            F_.resize(0, n);
            g_.resize(0);
        }
        detail::require(F_.cols() == n, "bet constraints: F has wrong column count");
        detail::require(g_.size() == F_.rows(), "bet constraints: F/g row mismatch");
        for (Index i = 0; i < n; ++i) {
            detail::require(std::isfinite(lower_[i]) && std::isfinite(upper_[i]),
                            "bet constraints: bounds must be finite");
            detail::require(lower_[i] >= 0.0 && upper_[i] <= 1.0,
                            "bet constraints: bounds must lie in [0, 1]");
            detail::require(lower_[i] <= upper_[i], "bet constraints: lower exceeds upper");
        }
        detail::require(F_.allFinite() && g_.allFinite(), "bet constraints: non-finite F or g");
        detail::require(find_feasible().has_value(), "bet constraints: feasible set is empty");
    }

    static BetConstraintSet simplex(Index n) { return {Vector::Zero(n), Vector::Ones(n)}; }

    Index size() const noexcept { return lower_.size(); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }
    const Matrix& F() const noexcept { return F_; }
    const Vector& g() const noexcept { return g_; }
    bool has_linear_constraints() const noexcept { return F_.rows() > 0; }

    bool contains(const Vector& b, double tol = 1e-8) const {
        if (b.size() != size()) return false;
        if (std::abs(b.sum() - 1.0) > tol) return false;
        for (Index i = 0; i < b.size(); ++i) {
            if (b[i] < lower_[i] - tol || b[i] > upper_[i] + tol || b[i] < -tol) return false;
        }
        if (F_.rows() > 0 && ((F_ * b) - g_).maxCoeff() > tol) return false;
        return true;
    }

    /// The bet set as LP constraints over the n allocation variables.
    LinearProgram as_lp() const {
        LinearProgram lp = LinearProgram::with_variables(size());
        lp.lower = lower_;
        lp.upper = upper_;
        lp.ineq_matrix = F_;
        lp.ineq_rhs = g_;
        lp.add_eq(Vector::Ones(size()), 1.0);
        return lp;
    }

    /// Maximizes a linear function over the set; used for certificates.
    LpSolution maximize(const Vector& direction, double tol = 1e-9) const {
        LinearProgram lp = as_lp();
        lp.objective = -direction;
        LpSolution sol = solve_lp(lp, tol);
        sol.objective = -sol.objective;
        sol.dual_objective = -sol.dual_objective;
        return sol;
    }

private:
    std::optional<Vector> find_feasible() const {
        LpSolution sol = solve_lp(as_lp(), 1e-9);
        if (sol.status != LpStatus::optimal) return std::nullopt;
        return sol.x;
    }

    Vector lower_;
    Vector upper_;
    Matrix F_;
    Vector g_;
};

/// Returns matrix R (n bets x K outcomes) together with the admissible bets.
class BettingMarket {
public:
    explicit BettingMarket(Matrix returns)
        : BettingMarket(returns, BetConstraintSet::simplex(returns.rows())) {}

    BettingMarket(Matrix returns, BetConstraintSet constraints)
        : returns_(std::move(returns)), constraints_(std::move(constraints)) {
        detail::require(returns_.rows() > 0 && returns_.cols() > 0, "market: empty returns matrix");
        detail::require(constraints_.size() == returns_.rows(),
                        "market: bet constraints do not match the number of bets");
        for (Index k = 0; k < returns_.cols(); ++k) {
            double column_max = 0.0;
            for (Index i = 0; i < returns_.rows(); ++i) {
                const double r = returns_(i, k);
                detail::require(std::isfinite(r) && r >= 0.0, "market: returns must be finite and >= 0");
                column_max = std::max(column_max, r);
            }
            detail::require(column_max > 0.0, "market: outcome " + std::to_string(k) +
                                                  " pays nothing on every bet");
        }
    }

    Index num_bets() const noexcept { return returns_.rows(); }
    Index num_outcomes() const noexcept { return returns_.cols(); }
    const Matrix& returns() const noexcept { return returns_; }
    const BetConstraintSet& constraints() const noexcept { return constraints_; }

    /// Per-outcome wealth factors R'b.
    Vector wealth_factors(const Vector& b) const {
        detail::require(b.size() == num_bets(), "market: bet has wrong dimension");
        return returns_.transpose() * b;
    }

    /// Per-outcome log growth log(R'b); -inf where the factor is zero.
    Vector log_returns(const Vector& b) const {
        Vector y = wealth_factors(b);
        for (Index k = 0; k < y.size(); ++k) y[k] = y[k] > 0.0 ? std::log(y[k]) : -kInf;
        return y;
    }

private:
    Matrix returns_;
    BetConstraintSet constraints_;
};

/// pi' log(R'b). Outcomes with zero probability never contribute, so a
/// zero payoff only yields -inf when the outcome can occur.
inline double log_growth(const BettingMarket& market, const Vector& b, const Vector& pi) {
    detail::require(b.size() == market.num_bets(), "log_growth: bet has wrong dimension");
    detail::require(pi.size() == market.num_outcomes(), "log_growth: distribution has wrong dimension");
    const Vector factors = market.wealth_factors(b);
    double total = 0.0;
    for (Index k = 0; k < pi.size(); ++k) {
        if (pi[k] == 0.0) continue;
        if (factors[k] <= 0.0) return -kInf;
        total += pi[k] * std::log(factors[k]);
    }
    return total;
}

inline double log_growth(const BettingMarket& market, const Bet& b, const Distribution& pi) {
    return log_growth(market, b.alloc(), pi.probs());
}

/// Gradient of pi' log(R'b) with respect to b: R (pi ./ R'b).
inline Vector growth_supergradient(const BettingMarket& market, const Vector& b, const Vector& pi) {
    detail::require(b.size() == market.num_bets(), "growth_supergradient: bet has wrong dimension");
    detail::require(pi.size() == market.num_outcomes(),
                    "growth_supergradient: distribution has wrong dimension");
    const Vector factors = market.wealth_factors(b);
    Vector weights(pi.size());
    for (Index k = 0; k < pi.size(); ++k) {
        if (pi[k] == 0.0) {
            weights[k] = 0.0;
            continue;
        }
        if (factors[k] <= 0.0)
            throw std::domain_error("growth_supergradient: outcome " + std::to_string(k) +
                                    " has zero payoff, growth is -inf");
        weights[k] = pi[k] / factors[k];
    }
    return market.returns() * weights;
}

inline Vector growth_supergradient(const BettingMarket& market, const Bet& b, const Distribution& pi) {
    return growth_supergradient(market, b.alloc(), pi.probs());
}

}  // namespace robust_kelly
