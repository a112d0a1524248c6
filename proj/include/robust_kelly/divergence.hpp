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


/// \file divergence.hpp
/// \brief f-divergence generators and their Fenchel conjugates
///        f*(s) = sup_{t >= 0} (t s - f(t)).

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "robust_kelly/types.hpp"

namespace robust_kelly {

enum class DivergenceFamily { kl, reverse_kl, pearson_chi2, neyman_chi2, hellinger, total_variation, alpha };

/// Which generator f to use. The alpha family covers the power divergences
/// f_a(t) = (t^a - 1 - a (t - 1)) / (a (a - 1)); a = 1 and a = 0 are
/// dispatched to KL and reverse KL, where the closed form degenerates.
class DivergenceKind {
public:
    static DivergenceKind kl() { return DivergenceKind(DivergenceFamily::kl); }
    static DivergenceKind reverse_kl() { return DivergenceKind(DivergenceFamily::reverse_kl); }
    static DivergenceKind pearson_chi2() { return DivergenceKind(DivergenceFamily::pearson_chi2); }
    static DivergenceKind neyman_chi2() { return DivergenceKind(DivergenceFamily::neyman_chi2); }
    static DivergenceKind hellinger() { return DivergenceKind(DivergenceFamily::hellinger); }
    static DivergenceKind total_variation() { return DivergenceKind(DivergenceFamily::total_variation); }
    static DivergenceKind alpha(double a) {
        if (!std::isfinite(a)) throw std::invalid_argument("divergence: alpha must be finite");
        if (a == 1.0) return kl();
        if (a == 0.0) return reverse_kl();
        DivergenceKind k(DivergenceFamily::alpha);
        k.alpha_ = a;
        return k;
    }

    DivergenceFamily family() const noexcept { return family_; }
    double alpha_parameter() const noexcept { return alpha_; }

    std::string name() const {
        switch (family_) {
            case DivergenceFamily::kl: return "kl";
            case DivergenceFamily::reverse_kl: return "reverse_kl";
            case DivergenceFamily::pearson_chi2: return "pearson_chi2";
            case DivergenceFamily::neyman_chi2: return "neyman_chi2";
            case DivergenceFamily::hellinger: return "hellinger";
            case DivergenceFamily::total_variation: return "total_variation";
            case DivergenceFamily::alpha: return "alpha";
        }
        return "unknown";
    }

    friend bool operator==(const DivergenceKind&, const DivergenceKind&) = default;

private:
    explicit DivergenceKind(DivergenceFamily f) : family_(f) {}
    DivergenceFamily family_;
    double alpha_ = 0.0;
};

/// A generator f on [0, inf) together with its conjugate f*.
///
/// f* is finite on (-inf, domain_sup) and also at domain_sup itself when
/// `sup_inclusive`; beyond that it is +inf. `f_star_slope` returns the
/// maximizing t in the conjugate, i.e. a (right) derivative of f*.
class ConjugatePair {
public:
    explicit ConjugatePair(DivergenceKind kind) : kind_(kind) {
        switch (kind_.family()) {
            case DivergenceFamily::reverse_kl: domain_sup_ = 1.0; break;
            case DivergenceFamily::neyman_chi2: domain_sup_ = 0.5; break;
            case DivergenceFamily::hellinger: domain_sup_ = 2.0; break;
            case DivergenceFamily::total_variation:
                domain_sup_ = 1.0;
                sup_inclusive_ = true;
                break;
            case DivergenceFamily::alpha: {
                const double a = kind_.alpha_parameter();
                if (a < 1.0) domain_sup_ = 1.0 / (1.0 - a);
                break;
            }
            default: break;
        }
    }

    const DivergenceKind& kind() const noexcept { return kind_; }
    double domain_sup() const noexcept { return domain_sup_; }
    bool sup_inclusive() const noexcept { return sup_inclusive_; }
    bool in_domain(double s) const noexcept { return s < domain_sup_ || (sup_inclusive_ && s == domain_sup_); }

    double f(double t) const {
        if (t < 0.0) return kInf;
        switch (kind_.family()) {
            case DivergenceFamily::kl: return t > 0.0 ? t * std::log(t) - t + 1.0 : 1.0;
            case DivergenceFamily::reverse_kl: return t > 0.0 ? -std::log(t) + t - 1.0 : kInf;
            case DivergenceFamily::pearson_chi2: return 0.5 * (t - 1.0) * (t - 1.0);
            case DivergenceFamily::neyman_chi2: return t > 0.0 ? 0.5 * (t - 1.0) * (t - 1.0) / t : kInf;
            case DivergenceFamily::hellinger: {
                const double r = std::sqrt(t) - 1.0;
                return 2.0 * r * r;
            }
            case DivergenceFamily::total_variation: return std::abs(t - 1.0);
            case DivergenceFamily::alpha: {
                const double a = kind_.alpha_parameter();
                if (t == 0.0) return a > 0.0 ? 1.0 / a : kInf;
                return (std::expm1(a * std::log(t)) - a * (t - 1.0)) / (a * (a - 1.0));
            }
        }
        return kInf;
    }

    double f_star(double s) const {
        if (!in_domain(s)) return kInf;
        switch (kind_.family()) {
            case DivergenceFamily::kl: return std::expm1(s);
            case DivergenceFamily::reverse_kl: return -std::log1p(-s);
            case DivergenceFamily::pearson_chi2: return s >= -1.0 ? 0.5 * (s + 1.0) * (s + 1.0) - 0.5 : -0.5;
            case DivergenceFamily::neyman_chi2: return 1.0 - std::sqrt(1.0 - 2.0 * s);
            case DivergenceFamily::hellinger: return 2.0 * s / (2.0 - s);
            case DivergenceFamily::total_variation: return s <= -1.0 ? -1.0 : s;
            case DivergenceFamily::alpha: {
                const double a = kind_.alpha_parameter();
                const double base = (a - 1.0) * s;
                if (base <= -1.0) return -1.0 / a;  // only reachable for a > 1
                return std::expm1(a / (a - 1.0) * std::log1p(base)) / a;
            }
        }
        return kInf;
    }

    double f_star_slope(double s) const {
        if (!in_domain(s)) return kInf;
        switch (kind_.family()) {
            case DivergenceFamily::kl: return std::exp(s);
            case DivergenceFamily::reverse_kl: return 1.0 / (1.0 - s);
            case DivergenceFamily::pearson_chi2: return std::max(s + 1.0, 0.0);
            case DivergenceFamily::neyman_chi2: return 1.0 / std::sqrt(1.0 - 2.0 * s);
            case DivergenceFamily::hellinger: return 4.0 / ((2.0 - s) * (2.0 - s));
            case DivergenceFamily::total_variation: return s < -1.0 ? 0.0 : 1.0;
            case DivergenceFamily::alpha: {
                const double a = kind_.alpha_parameter();
                const double base = (a - 1.0) * s;
                if (base <= -1.0) return 0.0;
                return std::exp(std::log1p(base) / (a - 1.0));
            }
        }
        return kInf;
    }

    /// lambda * f*(z / lambda), extended to lambda = 0 by its limit, the
    /// support function of dom f = [0, inf): 0 for z <= 0, +inf otherwise.
    double perspective(double lambda, double z) const {
        if (lambda > 0.0) return lambda * f_star(z / lambda);
        return z <= 0.0 ? 0.0 : kInf;
    }

private:
    DivergenceKind kind_;
    double domain_sup_ = kInf;
    bool sup_inclusive_ = false;
};

inline ConjugatePair conjugate_table(const DivergenceKind& kind) { return ConjugatePair(kind); }

/// D_f(pi || pi_nom) = sum_k pi_nom_k f(pi_k / pi_nom_k). Requires pi_nom > 0.
inline double divergence_value(const DivergenceKind& kind, const Vector& pi, const Vector& pi_nom) {
    if (pi.size() != pi_nom.size()) throw std::invalid_argument("divergence_value: dimension mismatch");
    const ConjugatePair pair(kind);
    double total = 0.0;
    for (Index k = 0; k < pi.size(); ++k) {
        if (!(pi_nom[k] > 0.0)) throw std::invalid_argument("divergence_value: nominal must be positive");
        total += pi_nom[k] * pair.f(std::max(pi[k], 0.0) / pi_nom[k]);
    }
    return total;
}

}  // namespace robust_kelly
