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


/// \file ambiguity.hpp
/// \brief Ambiguity sets: families of outcome distributions the worst case
///        is taken over. Every set is implicitly intersected with the
///        probability simplex.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/core.hpp"
#include "robust_kelly/divergence.hpp"
#include "robust_kelly/lp.hpp"

namespace robust_kelly {

inline constexpr double kDefaultMembershipTolerance = 1e-8;

struct SingletonSet {
    Distribution pi_nom;
};

/// conv{v_1, ..., v_s}.
struct ConvexHullSet {
    std::vector<Distribution> vertices;
};

/// { pi in simplex : A0 pi = d0, A1 pi <= d1 }.
struct PolyhedralSet {
    Matrix A0;
    Vector d0;
    Matrix A1;
    Vector d1;
};

/// { pi in simplex : |pi - pi_nom| <= rho } elementwise.
struct BoxSet {
    Distribution pi_nom;
    Vector rho;
};

/// { pi in simplex : || W^{-1} (pi - pi_nom) ||_p <= 1 }, p in [1, inf].
struct NormBallSet {
    Distribution pi_nom;
    Matrix W;
    double p = 2.0;
    Matrix W_inv;  // filled in on validation

    /// Hoelder conjugate exponent.
    double q() const {
        if (p == 1.0) return kInf;
        if (std::isinf(p)) return 1.0;
        return p / (p - 1.0);
    }
    bool is_diagonal() const {
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j = 0; j < W.cols(); ++j)
                if (i != j && W(i, j) != 0.0) return false;
        return true;
    }
};

/// { pi in simplex : D_f(pi || pi_nom) <= epsilon }.
struct DivergenceSet {
    Distribution pi_nom;
    DivergenceKind kind = DivergenceKind::kl();
    double epsilon = 0.0;
};

/// { pi in simplex : D_c(pi, pi_nom) <= s } with D_c the optimal transport cost.
struct WassersteinSet {
    Distribution pi_nom;
    Matrix cost;
    double s = 0.0;
};

/// p-norm of a vector, p in [1, inf].
inline double lp_norm(const Vector& v, double p) {
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return scale * std::pow((v.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

/// Minimal transport cost from pi_nom to pi; +inf if the LP fails.
inline double transport_cost(const Vector& pi, const Vector& pi_nom, const Matrix& cost) {
    const Index k = pi.size();
    // Variable Q(i, j) at index i * k + j; mass moves from nominal outcome j to outcome i.
    LinearProgram lp = LinearProgram::with_variables(k * k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) lp.objective[i * k + j] = cost(i, j);
    for (Index i = 0; i < k; ++i) {
        Vector row = Vector::Zero(k * k);
        row.segment(i * k, k).setOnes();
        lp.add_eq(row, pi[i]);
    }
    for (Index j = 0; j < k; ++j) {
        Vector row = Vector::Zero(k * k);
        for (Index i = 0; i < k; ++i) row[i * k + j] = 1.0;
        lp.add_eq(row, pi_nom[j]);
    }
    const LpSolution sol = solve_lp(lp, 1e-10);
    return sol.status == LpStatus::optimal ? sol.objective : kInf;
}

class AmbiguitySet {
public:
    using Variant = std::variant<SingletonSet, ConvexHullSet, PolyhedralSet, BoxSet, NormBallSet, DivergenceSet,
                                 WassersteinSet>;

    AmbiguitySet(SingletonSet s) : set_(std::move(s)) {}
    AmbiguitySet(ConvexHullSet s) : set_(validate(std::move(s))) {}
    AmbiguitySet(PolyhedralSet s) : set_(validate(std::move(s))) {}
    AmbiguitySet(BoxSet s) : set_(validate(std::move(s))) {}
    AmbiguitySet(NormBallSet s) : set_(validate(std::move(s))) {}
    AmbiguitySet(DivergenceSet s) : set_(validate(std::move(s))) {}
    AmbiguitySet(WassersteinSet s) : set_(validate(std::move(s))) {}

    static AmbiguitySet singleton(Distribution pi_nom) { return SingletonSet{std::move(pi_nom)}; }
    static AmbiguitySet convex_hull(std::vector<Distribution> vertices) {
        return ConvexHullSet{std::move(vertices)};
    }
    static AmbiguitySet polyhedral(Matrix A0, Vector d0, Matrix A1, Vector d1) {
        return PolyhedralSet{std::move(A0), std::move(d0), std::move(A1), std::move(d1)};
    }
    static AmbiguitySet box(Distribution pi_nom, Vector rho) { return BoxSet{std::move(pi_nom), std::move(rho)}; }
    static AmbiguitySet norm_ball(Distribution pi_nom, Matrix W, double p) {
        return NormBallSet{std::move(pi_nom), std::move(W), p, {}};
    }
    static AmbiguitySet divergence(Distribution pi_nom, DivergenceKind kind, double epsilon) {
        return DivergenceSet{std::move(pi_nom), kind, epsilon};
    }
    static AmbiguitySet wasserstein(Distribution pi_nom, Matrix cost, double s) {
        return WassersteinSet{std::move(pi_nom), std::move(cost), s};
    }

    const Variant& variant() const noexcept { return set_; }

    template <class T>
    const T* get_if() const noexcept {
        return std::get_if<T>(&set_);
    }

    std::string type_name() const {
        return std::visit(
            [](const auto& s) -> std::string {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, SingletonSet>) return "singleton";
                else if constexpr (std::is_same_v<T, ConvexHullSet>) return "convex_hull";
                else if constexpr (std::is_same_v<T, PolyhedralSet>) return "polyhedral";
                else if constexpr (std::is_same_v<T, BoxSet>) return "box";
                else if constexpr (std::is_same_v<T, NormBallSet>) return "norm_ball";
                else if constexpr (std::is_same_v<T, DivergenceSet>) return "divergence";
                else return "wasserstein";
            },
            set_);
    }

    /// Number of outcomes K.
    Index dimension() const {
        return std::visit(
            [](const auto& s) -> Index {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ConvexHullSet>) return s.vertices.front().size();
                else if constexpr (std::is_same_v<T, PolyhedralSet>) return std::max(s.A0.cols(), s.A1.cols());
                else return s.pi_nom.size();
            },
            set_);
    }

    /// The nominal distribution, for the variants that carry one.
    const Distribution* nominal() const noexcept {
        return std::visit(
            [](const auto& s) -> const Distribution* {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ConvexHullSet> || std::is_same_v<T, PolyhedralSet>) return nullptr;
                else return &s.pi_nom;
            },
            set_);
    }

private:
    static ConvexHullSet validate(ConvexHullSet s) {
        detail::require(!s.vertices.empty(), "convex hull: needs at least one vertex");
        for (const auto& v : s.vertices)
            detail::require(v.size() == s.vertices.front().size(), "convex hull: vertices differ in dimension");
        return s;
    }

    static PolyhedralSet validate(PolyhedralSet s) {
        const Index k = std::max(s.A0.cols(), s.A1.cols());
        detail::require(k > 0, "polyhedral: cannot infer the number of outcomes");
        if (s.A0.size() == 0) {
            s.A0.resize(0, k);
            s.d0.resize(0);
        }
        if (s.A1.size() == 0) {
            s.A1.resize(0, k);
            s.d1.resize(0);
        }
        detail::require(s.A0.cols() == k && s.A1.cols() == k, "polyhedral: A0 and A1 differ in columns");
        detail::require(s.d0.size() == s.A0.rows(), "polyhedral: A0/d0 mismatch");
        detail::require(s.d1.size() == s.A1.rows(), "polyhedral: A1/d1 mismatch");
        detail::require(s.A0.allFinite() && s.A1.allFinite() && s.d0.allFinite() && s.d1.allFinite(),
                        "polyhedral: non-finite data");
        LinearProgram lp = LinearProgram::with_variables(k);
        lp.add_eq(Vector::Ones(k), 1.0);
        for (Index r = 0; r < s.A0.rows(); ++r) lp.add_eq(s.A0.row(r).transpose(), s.d0[r]);
        lp.ineq_matrix = s.A1;
        lp.ineq_rhs = s.d1;
        detail::require(solve_lp(lp, 1e-9).status == LpStatus::optimal,
                        "polyhedral: the set has no point in the probability simplex");
        return s;
    }

    static BoxSet validate(BoxSet s) {
        detail::require(s.rho.size() == s.pi_nom.size(), "box: rho has wrong dimension");
        detail::require(s.rho.allFinite() && s.rho.minCoeff() >= 0.0, "box: rho must be finite and >= 0");
        return s;
    }

    static NormBallSet validate(NormBallSet s) {
        const Index k = s.pi_nom.size();
        detail::require(s.W.rows() == k && s.W.cols() == k, "norm ball: W must be K x K");
        detail::require(s.W.allFinite(), "norm ball: W has non-finite entries");
        detail::require(s.p >= 1.0, "norm ball: p must be >= 1");
        Eigen::JacobiSVD<Matrix> svd(s.W);
        const auto& sv = svd.singularValues();
        detail::require(sv.minCoeff() > 0.0 && sv.maxCoeff() / sv.minCoeff() < 1e12,
                        "norm ball: W is singular or too ill-conditioned");
        s.W_inv = s.W.fullPivLu().inverse();
        return s;
    }

    static DivergenceSet validate(DivergenceSet s) {
        detail::require(s.pi_nom.probs().minCoeff() > 0.0, "divergence: nominal distribution must be positive");
        detail::require(std::isfinite(s.epsilon) && s.epsilon > 0.0, "divergence: epsilon must be > 0");
        return s;
    }

    static WassersteinSet validate(WassersteinSet s) {
        const Index k = s.pi_nom.size();
        detail::require(s.cost.rows() == k && s.cost.cols() == k, "wasserstein: cost must be K x K");
        detail::require(s.cost.allFinite() && s.cost.minCoeff() >= 0.0, "wasserstein: cost must be >= 0");
        detail::require(s.cost.diagonal().cwiseAbs().maxCoeff() == 0.0, "wasserstein: cost diagonal must be 0");
        detail::require(std::isfinite(s.s) && s.s > 0.0, "wasserstein: budget s must be > 0");
        return s;
    }

    Variant set_;
};

namespace detail {

inline bool in_simplex(const Vector& pi, double tol) {
    return pi.size() > 0 && pi.minCoeff() >= -tol && std::abs(pi.sum() - 1.0) <= tol;
}

inline bool hull_contains(const ConvexHullSet& s, const Vector& pi, double tol) {
    const Index k = pi.size();
    const Index m = static_cast<Index>(s.vertices.size());
    // Weights w (m), residual split e+ (k), e- (k); minimize ||residual||_1.
    LinearProgram lp = LinearProgram::with_variables(m + 2 * k);
    lp.objective.tail(2 * k).setOnes();
    for (Index i = 0; i < k; ++i) {
        Vector row = Vector::Zero(m + 2 * k);
        for (Index j = 0; j < m; ++j) row[j] = s.vertices[static_cast<std::size_t>(j)][i];
        row[m + i] = 1.0;
        row[m + k + i] = -1.0;
        lp.add_eq(row, pi[i]);
    }
    Vector weights = Vector::Zero(m + 2 * k);
    weights.head(m).setOnes();
    lp.add_eq(weights, 1.0);
    const LpSolution sol = solve_lp(lp, 1e-10);
    return sol.status == LpStatus::optimal && sol.objective <= tol;
}

}  // namespace detail

/// Membership of pi in the set (and in the simplex), up to `tol`.
inline bool contains(const AmbiguitySet& set, const Vector& pi, double tol = kDefaultMembershipTolerance) {
    if (pi.size() != set.dimension()) throw std::invalid_argument("contains: dimension mismatch");
    if (!pi.allFinite() || !detail::in_simplex(pi, tol)) return false;
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SingletonSet>) {
                return (pi - s.pi_nom.probs()).cwiseAbs().maxCoeff() <= tol;
            } else if constexpr (std::is_same_v<T, ConvexHullSet>) {
                return detail::hull_contains(s, pi, tol);
            } else if constexpr (std::is_same_v<T, PolyhedralSet>) {
                if (s.A0.rows() > 0 && (s.A0 * pi - s.d0).cwiseAbs().maxCoeff() > tol) return false;
                if (s.A1.rows() > 0 && (s.A1 * pi - s.d1).maxCoeff() > tol) return false;
                return true;
            } else if constexpr (std::is_same_v<T, BoxSet>) {
                return ((pi - s.pi_nom.probs()).cwiseAbs() - s.rho).maxCoeff() <= tol;
            } else if constexpr (std::is_same_v<T, NormBallSet>) {
                return lp_norm(s.W_inv * (pi - s.pi_nom.probs()), s.p) <= 1.0 + tol;
            } else if constexpr (std::is_same_v<T, DivergenceSet>) {
                return divergence_value(s.kind, pi.cwiseMax(0.0), s.pi_nom.probs()) <= s.epsilon + tol;
            } else {
                return transport_cost(pi.cwiseMax(0.0), s.pi_nom.probs(), s.cost) <= s.s + tol;
            }
        },
        set.variant());
}

inline bool contains(const AmbiguitySet& set, const Distribution& pi, double tol = kDefaultMembershipTolerance) {
    return contains(set, pi.probs(), tol);
}

/// The box written as a polyhedron: A1 = [I; -I], d1 = [pi_nom + rho; rho - pi_nom].
inline PolyhedralSet box_as_polyhedral(const BoxSet& box) {
    const Index k = box.pi_nom.size();
    PolyhedralSet out;
    out.A0.resize(0, k);
    out.d0.resize(0);
    out.A1.resize(2 * k, k);
    out.A1.topRows(k) = Matrix::Identity(k, k);
    out.A1.bottomRows(k) = -Matrix::Identity(k, k);
    out.d1.resize(2 * k);
    out.d1.head(k) = box.pi_nom.probs() + box.rho;
    out.d1.tail(k) = box.rho - box.pi_nom.probs();
    return out;
}

}  // namespace robust_kelly
