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


/// \file barrier.hpp
/// \brief Small dense log-barrier method for convex programs with linear
///        equality constraints, used by the norm-ball oracle and the outer solver.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "robust_kelly/types.hpp"

namespace robust_kelly::detail {

/// Value, gradient and Hessian of the centering objective
/// t * f0(x) - sum_i log(-f_i(x)).
struct BarrierEval {
    double value = 0.0;
    Vector grad;
    Matrix hess;
};

/// Evaluates the centering objective at x for barrier weight t. Returns false
/// when x is outside the barrier domain. Derivatives are only needed when
/// `derivatives` is set.
using BarrierFunction = std::function<bool(const Vector& x, double t, bool derivatives, BarrierEval& out)>;

struct BarrierOptions {
    double t0 = 1.0;
    double growth = 16.0;
    double gap_tol = 1e-11;  // stop when m / t falls below this
    int max_newton = 100;    // per centering step
    int max_outer = 60;
};

struct BarrierResult {
    Vector x;
    double t = 0.0;
    int newton_steps = 0;
    bool converged = false;
};

/// Orthonormal basis of null(A); identity when A has no rows.
inline Matrix null_space(const Matrix& A, Index n) {
    if (A.rows() == 0) return Matrix::Identity(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    const Index rank = qr.rank();
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    return Q.rightCols(n - rank);
}

/// Minimizes f0 subject to f_i(x) < 0 and A x = const, starting from a strictly
/// feasible x0 that already satisfies the equalities.
inline BarrierResult barrier_minimize(const BarrierFunction& phi, Index num_ineq, const Matrix& A, Vector x0,
                                      const BarrierOptions& opt = {}) {
    const Index n = x0.size();
    const Matrix Z = null_space(A, n);
    BarrierResult res;
    res.x = std::move(x0);
    double t = opt.t0;
    BarrierEval ev, trial;
    if (!phi(res.x, t, false, ev)) throw std::logic_error("barrier: start point is not strictly feasible");
    if (Z.cols() == 0) {
        res.converged = true;
        res.t = kInf;
        return res;
    }
    const double m = std::max<double>(1.0, double(num_ineq));
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        for (int it = 0; it < opt.max_newton; ++it) {
            phi(res.x, t, true, ev);
            const Vector gz = Z.transpose() * ev.grad;
            Matrix hz = Z.transpose() * ev.hess * Z;
            Eigen::LDLT<Matrix> ldlt(hz);
            Vector dz = ldlt.solve(-gz);
            double slope = gz.dot(dz);
            if (ldlt.info() != Eigen::Success || !(slope < 0.0) || !dz.allFinite()) {
                const double shift = 1e-12 * std::max(1.0, hz.diagonal().cwiseAbs().maxCoeff());
                hz.diagonal().array() += shift;
                dz = hz.ldlt().solve(-gz);
                slope = gz.dot(dz);
                if (!(slope < 0.0) || !dz.allFinite()) break;
            }
            ++res.newton_steps;
            if (-slope / 2.0 <= 1e-14) break;
            const Vector dx = Z * dz;
            double step = 1.0;
            bool moved = false;
            while (step > 1e-14) {
                const Vector cand = res.x + step * dx;
                if (phi(cand, t, false, trial) &&
                    trial.value <= ev.value + 0.25 * step * slope + 1e-15 * std::abs(ev.value)) {
                    res.x = cand;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (m / t <= opt.gap_tol) {
            res.converged = true;
            break;
        }
        t *= opt.growth;
    }
    res.t = t;
    return res;
}

}  // namespace robust_kelly::detail
