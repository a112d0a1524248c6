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


/// \file lp.hpp
/// \brief Small dense linear programming kernel.
///
/// Solves
///
///     minimize    c'x
///     subject to  A x <= a,   E x = e,   lower <= x <= upper
///
/// with a two-phase tableau simplex, then re-solves the final basis
/// directly to polish the primal point and the multipliers. Bounds may be
/// infinite. Multipliers follow the Lagrangian
///
///     L(x, lambda, nu) = c'x + lambda'(A x - a) + nu'(E x - e),  lambda >= 0,
///
/// and the reported dual objective is the dual function evaluated at the
/// returned multipliers, with the bounds kept as a box. By weak duality it
/// is a lower bound on the optimum for any lambda >= 0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/types.hpp"

namespace robust_kelly {

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

struct LinearProgram {
    Vector objective;
    Matrix ineq_matrix;
    Vector ineq_rhs;
    Matrix eq_matrix;
    Vector eq_rhs;
    Vector lower;
    Vector upper;

    /// n variables, zero objective, x >= 0, no rows.
    static LinearProgram with_variables(Index n) {
        LinearProgram lp;
        lp.objective = Vector::Zero(n);
        lp.ineq_matrix.resize(0, n);
        lp.ineq_rhs.resize(0);
        lp.eq_matrix.resize(0, n);
        lp.eq_rhs.resize(0);
        lp.lower = Vector::Zero(n);
        lp.upper = Vector::Constant(n, kInf);
        return lp;
    }

    Index num_variables() const { return objective.size(); }

    void add_ineq(const Vector& row, double rhs) { append(ineq_matrix, ineq_rhs, row, rhs); }
    void add_eq(const Vector& row, double rhs) { append(eq_matrix, eq_rhs, row, rhs); }

private:
    static void append(Matrix& m, Vector& v, const Vector& row, double rhs) {
        const Index r = m.rows();
        m.conservativeResize(r + 1, row.size());
        m.row(r) = row.transpose();
        v.conservativeResize(r + 1);
        v[r] = rhs;
    }
};

struct LpSolution {
    LpStatus status = LpStatus::numerical_failure;
    Vector x;
    double objective = kInf;
    Vector ineq_duals;     // lambda >= 0, one per inequality row
    Vector eq_duals;       // nu, one per equality row
    Vector reduced_costs;  // c + A'lambda + E'nu
    double dual_objective = -kInf;
    int iterations = 0;
};

namespace detail {

// Standard form: min c'z, S z = s, z >= 0, with s >= 0 after row flips.
struct StandardForm {
    Matrix S;
    Vector s;
    Vector c;
    double offset = 0.0;
    Index num_structural = 0;
    std::vector<double> row_sign;
    // Recovery of the user variables from z.
    struct Map {
        Index plus = -1;
        Index minus = -1;
        double shift = 0.0;
        double sign = 1.0;
    };
    std::vector<Map> var_map;
};

inline StandardForm to_standard_form(const LinearProgram& lp) {
    const Index n = lp.num_variables();
    StandardForm sf;
    sf.var_map.resize(static_cast<std::size_t>(n));

    // Column layout of the structural part.
    Index cols = 0;
    std::vector<Index> bound_rows;
    for (Index j = 0; j < n; ++j) {
        auto& m = sf.var_map[static_cast<std::size_t>(j)];
        const bool lo = std::isfinite(lp.lower[j]);
        const bool hi = std::isfinite(lp.upper[j]);
        if (lo) {
            m.plus = cols++;
            m.shift = lp.lower[j];
            if (hi) bound_rows.push_back(j);
        } else if (hi) {
            m.plus = cols++;
            m.shift = lp.upper[j];
            m.sign = -1.0;
        } else {
            m.plus = cols++;
            m.minus = cols++;
        }
    }
    sf.num_structural = cols;

    const Index m_ineq = lp.ineq_matrix.rows();
    const Index m_bound = static_cast<Index>(bound_rows.size());
    const Index m_eq = lp.eq_matrix.rows();
    const Index rows = m_ineq + m_bound + m_eq;
    const Index slacks = m_ineq + m_bound;

    sf.S = Matrix::Zero(rows, cols + slacks);
    sf.s = Vector::Zero(rows);
    sf.c = Vector::Zero(cols + slacks);

    auto scatter = [&](Index row, const Eigen::Ref<const Eigen::RowVectorXd>& coeffs, double rhs) {
        double adjusted = rhs;
        for (Index j = 0; j < n; ++j) {
            const double a = coeffs[j];
            if (a == 0.0) continue;
            const auto& m = sf.var_map[static_cast<std::size_t>(j)];
            adjusted -= a * m.shift;
            sf.S(row, m.plus) += a * m.sign;
            if (m.minus >= 0) sf.S(row, m.minus) -= a;
        }
        sf.s[row] = adjusted;
    };

    for (Index r = 0; r < m_ineq; ++r) {
        scatter(r, lp.ineq_matrix.row(r), lp.ineq_rhs[r]);
        sf.S(r, cols + r) = 1.0;
    }
    for (Index r = 0; r < m_bound; ++r) {
        const Index j = bound_rows[static_cast<std::size_t>(r)];
        const Index row = m_ineq + r;
        sf.S(row, sf.var_map[static_cast<std::size_t>(j)].plus) = 1.0;
        sf.s[row] = lp.upper[j] - lp.lower[j];
        sf.S(row, cols + m_ineq + r) = 1.0;
    }
    for (Index r = 0; r < m_eq; ++r) scatter(m_ineq + m_bound + r, lp.eq_matrix.row(r), lp.eq_rhs[r]);

    for (Index j = 0; j < n; ++j) {
        const auto& m = sf.var_map[static_cast<std::size_t>(j)];
        const double cj = lp.objective[j];
        sf.offset += cj * m.shift;
        sf.c[m.plus] += cj * m.sign;
        if (m.minus >= 0) sf.c[m.minus] -= cj;
    }

    sf.row_sign.assign(static_cast<std::size_t>(rows), 1.0);
    for (Index r = 0; r < rows; ++r) {
        if (sf.s[r] < 0.0) {
            sf.S.row(r) *= -1.0;
            sf.s[r] = -sf.s[r];
            sf.row_sign[static_cast<std::size_t>(r)] = -1.0;
        }
    }
    return sf;
}

// Tableau over [S | I] with one artificial column per row.
class Tableau {
public:
    Tableau(const Matrix& S, const Vector& s) : rows_(S.rows()), cols_(S.cols() + S.rows()) {
        t_ = Matrix::Zero(rows_, cols_ + 1);
        t_.leftCols(S.cols()) = S;
        t_.block(0, S.cols(), rows_, rows_).setIdentity();
        t_.col(cols_) = s;
        basis_.resize(static_cast<std::size_t>(rows_));
        for (Index r = 0; r < rows_; ++r) basis_[static_cast<std::size_t>(r)] = S.cols() + r;
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    const std::vector<Index>& basis() const { return basis_; }
    double rhs(Index r) const { return t_(r, cols_); }
    double at(Index r, Index c) const { return t_(r, c); }

    void pivot(Index r, Index c) {
        t_.row(r) /= t_(r, c);
        for (Index i = 0; i < rows_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    Vector reduced_costs(const Vector& cost) const {
        Vector cb(rows_);
        for (Index r = 0; r < rows_; ++r) cb[r] = cost[basis_[static_cast<std::size_t>(r)]];
        return cost - (cb.transpose() * t_.leftCols(cols_)).transpose();
    }

    double objective(const Vector& cost) const {
        double v = 0.0;
        for (Index r = 0; r < rows_; ++r) v += cost[basis_[static_cast<std::size_t>(r)]] * rhs(r);
        return v;
    }

private:
    Index rows_;
    Index cols_;
    Matrix t_;
    std::vector<Index> basis_;
};

enum class PhaseResult { optimal, unbounded, iteration_limit };

// Dantzig pricing with a switch to Bland's rule after a run of degenerate
// pivots, which rules out cycling.
inline PhaseResult run_simplex(Tableau& tab, const Vector& cost, const std::vector<bool>& allowed,
                               int& iterations, int max_iterations) {
    constexpr double kPivotTol = 1e-11;
    const double dj_tol = 1e-11 * std::max(1.0, cost.cwiseAbs().maxCoeff());
    int degenerate_run = 0;
    while (iterations < max_iterations) {
        const Vector d = tab.reduced_costs(cost);
        const bool bland = degenerate_run > 50;
        Index enter = -1;
        double best = -dj_tol;
        for (Index c = 0; c < tab.cols(); ++c) {
            if (!allowed[static_cast<std::size_t>(c)] || d[c] >= -dj_tol) continue;
            if (bland) {
                enter = c;
                break;
            }
            if (d[c] < best) {
                best = d[c];
                enter = c;
            }
        }
        if (enter < 0) return PhaseResult::optimal;

        Index leave = -1;
        double ratio = kInf;
        for (Index r = 0; r < tab.rows(); ++r) {
            const double a = tab.at(r, enter);
            if (a <= kPivotTol) continue;
            const double q = std::max(tab.rhs(r), 0.0) / a;
            if (q < ratio - 1e-14 ||
                (q <= ratio + 1e-14 && leave >= 0 &&
                 tab.basis()[static_cast<std::size_t>(r)] < tab.basis()[static_cast<std::size_t>(leave)])) {
                ratio = q;
                leave = r;
            }
        }
        if (leave < 0) return PhaseResult::unbounded;
        degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
        tab.pivot(leave, enter);
        ++iterations;
    }
    return PhaseResult::iteration_limit;
}

}  // namespace detail

/// Solves `lp`. On `optimal`, the primal point satisfies every constraint
/// within `tol` (scaled by the data magnitude) and primal and dual
/// objectives agree within `tol * max(1, |objective|)`.
inline LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-8) {
    const Index n = lp.num_variables();
    LpSolution out;
    out.x = Vector::Zero(n);
    out.ineq_duals = Vector::Zero(lp.ineq_matrix.rows());
    out.eq_duals = Vector::Zero(lp.eq_matrix.rows());
    out.reduced_costs = Vector::Zero(n);

    const bool shapes_ok = lp.lower.size() == n && lp.upper.size() == n && lp.ineq_matrix.cols() == n &&
                           lp.eq_matrix.cols() == n && lp.ineq_rhs.size() == lp.ineq_matrix.rows() &&
                           lp.eq_rhs.size() == lp.eq_matrix.rows();
    if (!shapes_ok) throw std::invalid_argument("solve_lp: inconsistent dimensions");
    if (!lp.objective.allFinite() || !lp.ineq_matrix.allFinite() || !lp.eq_matrix.allFinite() ||
        !lp.ineq_rhs.allFinite() || !lp.eq_rhs.allFinite())
        throw std::invalid_argument("solve_lp: non-finite data");
    for (Index j = 0; j < n; ++j) {
        if (lp.lower[j] > lp.upper[j] || lp.lower[j] == kInf || lp.upper[j] == -kInf) {
            out.status = LpStatus::infeasible;
            return out;
        }
    }

    const detail::StandardForm sf = detail::to_standard_form(lp);
    const Index rows = sf.S.rows();
    const Index ncols = sf.S.cols();
    const int max_iterations = 100 * static_cast<int>(rows + ncols) + 1000;

    detail::Tableau tab(sf.S, sf.s);
    std::vector<bool> allowed(static_cast<std::size_t>(tab.cols()), true);

    // Phase 1: drive the artificials to zero.
    Vector phase1_cost = Vector::Zero(tab.cols());
    phase1_cost.tail(rows).setOnes();
    const double scale = 1.0 + (sf.s.size() ? sf.s.cwiseAbs().maxCoeff() : 0.0);
    auto phase = detail::run_simplex(tab, phase1_cost, allowed, out.iterations, max_iterations);
    if (phase == detail::PhaseResult::iteration_limit) return out;
    if (tab.objective(phase1_cost) > 1e-9 * scale) {
        out.status = LpStatus::infeasible;
        return out;
    }
    // Pivot remaining artificials out of the basis where possible; rows
    // where that fails are redundant and keep a zero-valued artificial.
    for (Index r = 0; r < rows; ++r) {
        if (tab.basis()[static_cast<std::size_t>(r)] < ncols) continue;
        Index best = -1;
        double best_abs = 1e-9;
        for (Index c = 0; c < ncols; ++c) {
            if (std::abs(tab.at(r, c)) > best_abs) {
                best_abs = std::abs(tab.at(r, c));
                best = c;
            }
        }
        if (best >= 0) tab.pivot(r, best);
    }
    for (Index c = ncols; c < tab.cols(); ++c) allowed[static_cast<std::size_t>(c)] = false;

    // Phase 2.
    Vector cost = Vector::Zero(tab.cols());
    cost.head(ncols) = sf.c;
    phase = detail::run_simplex(tab, cost, allowed, out.iterations, max_iterations);
    if (phase == detail::PhaseResult::unbounded) {
        out.status = LpStatus::unbounded;
        out.objective = -kInf;
        return out;
    }
    if (phase == detail::PhaseResult::iteration_limit) return out;

    // Re-solve the final basis directly for a clean primal/dual pair.
    Matrix full(rows, tab.cols());
    full.leftCols(ncols) = sf.S;
    full.rightCols(rows).setIdentity();
    Matrix B(rows, rows);
    Vector cb(rows);
    for (Index r = 0; r < rows; ++r) {
        const Index col = tab.basis()[static_cast<std::size_t>(r)];
        B.col(r) = full.col(col);
        cb[r] = cost[col];
    }
    Vector z = Vector::Zero(tab.cols());
    Vector y = Vector::Zero(rows);
    {
        Eigen::FullPivLU<Matrix> lu(B);
        Vector zb = lu.solve(sf.s);
        Vector yy = lu.transpose().solve(cb);
        const bool good = lu.isInvertible() && zb.allFinite() && yy.allFinite() && zb.minCoeff() >= -1e-9;
        for (Index r = 0; r < rows; ++r) {
            const double v = good ? zb[r] : tab.rhs(r);
            z[tab.basis()[static_cast<std::size_t>(r)]] = std::max(v, 0.0);
        }
        if (good) {
            y = yy;
        } else {
            // Fall back to the tableau multipliers: y' = c_B' B^{-1}, where
            // B^{-1} sits in the artificial block.
            Vector d = tab.reduced_costs(cost);
            y = -d.tail(rows);
        }
    }

    // User variables.
    for (Index j = 0; j < n; ++j) {
        const auto& m = sf.var_map[static_cast<std::size_t>(j)];
        double v = m.shift + m.sign * z[m.plus];
        if (m.minus >= 0) v -= z[m.minus];
        out.x[j] = std::clamp(v, lp.lower[j], lp.upper[j]);
    }
    out.objective = lp.objective.dot(out.x);

    // Multipliers in the user's row space.
    const Index m_ineq = lp.ineq_matrix.rows();
    const Index m_eq = lp.eq_matrix.rows();
    const Index eq_start = rows - m_eq;
    for (Index r = 0; r < m_ineq; ++r)
        out.ineq_duals[r] = std::max(0.0, -y[r] * sf.row_sign[static_cast<std::size_t>(r)]);
    for (Index r = 0; r < m_eq; ++r)
        out.eq_duals[r] = -y[eq_start + r] * sf.row_sign[static_cast<std::size_t>(eq_start + r)];

    out.reduced_costs = lp.objective;
    if (m_ineq > 0) out.reduced_costs += lp.ineq_matrix.transpose() * out.ineq_duals;
    if (m_eq > 0) out.reduced_costs += lp.eq_matrix.transpose() * out.eq_duals;

    double dual = 0.0;
    if (m_ineq > 0) dual -= out.ineq_duals.dot(lp.ineq_rhs);
    if (m_eq > 0) dual -= out.eq_duals.dot(lp.eq_rhs);
    const double dtol = 1e-10 * std::max(1.0, lp.objective.cwiseAbs().maxCoeff());
    for (Index j = 0; j < n; ++j) {
        const double d = out.reduced_costs[j];
        if (std::abs(d) <= dtol) continue;
        const double bound = d > 0.0 ? lp.lower[j] : lp.upper[j];
        if (!std::isfinite(bound)) {
            dual = -kInf;
            break;
        }
        dual += d * bound;
    }
    out.dual_objective = dual;

    // Acceptance checks.
    double infeas = 0.0;
    if (m_ineq > 0) infeas = std::max(infeas, (lp.ineq_matrix * out.x - lp.ineq_rhs).maxCoeff());
    if (m_eq > 0) infeas = std::max(infeas, (lp.eq_matrix * out.x - lp.eq_rhs).cwiseAbs().maxCoeff());
    const double data_scale = 1.0 + std::max(lp.ineq_rhs.size() ? lp.ineq_rhs.cwiseAbs().maxCoeff() : 0.0,
                                             lp.eq_rhs.size() ? lp.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
    const bool primal_ok = infeas <= tol * data_scale;
    const bool dual_ok =
        std::isfinite(dual) && std::abs(out.objective - dual) <= tol * std::max(1.0, std::abs(out.objective));
    out.status = primal_ok && dual_ok ? LpStatus::optimal : LpStatus::numerical_failure;
    return out;
}

}  // namespace robust_kelly
