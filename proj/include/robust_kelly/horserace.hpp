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


/// \file horserace.hpp
/// \brief Place-bet horse race: parimutuel returns, the independent-speed
///        place distribution, box and ball uncertainty families, and sweeps.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/oracle.hpp"
#include "robust_kelly/solver.hpp"

namespace robust_kelly {

/// SplitMix64 (Steele, Lea and Flood): a 64-bit counter-based generator whose
/// output depends only on the seed and the draw count.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    /// Standard normal by the Box-Muller transform (one draw per call).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t state_;
};

/// Seed used for the reference n = 20 experiment.
inline constexpr std::uint64_t kCanonicalSeed = 8493;

/// beta_i proportional to exp(z_i), z_i ~ N(0, 1/4).
inline Vector sample_beta(Index n, std::uint64_t seed) {
    detail::require(n >= 2, "horse race: need at least two horses");
    SplitMix64 rng(seed);
    Vector z(n);
    for (Index i = 0; i < n; ++i) z[i] = 0.5 * rng.normal();
    const Vector e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

/// Unordered pairs (j, k), j < k, in lexicographic order; column c of the
/// return matrix is the outcome "horses j and k place".
inline std::vector<std::pair<Index, Index>> place_outcomes(Index n) {
    std::vector<std::pair<Index, Index>> out;
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k) out.emplace_back(j, k);
    return out;
}

inline void check_beta(const Vector& beta) {
    detail::require(beta.size() >= 2, "horse race: need at least two horses");
    detail::require(beta.allFinite() && beta.minCoeff() > 0.0, "horse race: beta must be positive");
    detail::require(std::abs(beta.sum() - 1.0) <= 1e-9, "horse race: beta must sum to one");
}

/// P(j and k are the first two) = b_j b_k (1 / (1 - b_j) + 1 / (1 - b_k)).
inline Distribution place_distribution(const Vector& beta) {
    check_beta(beta);
    const auto pairs = place_outcomes(beta.size());
    Vector pi(static_cast<Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        const auto [j, k] = pairs[c];
        pi[static_cast<Index>(c)] = beta[j] * beta[k] * (1.0 / (1.0 - beta[j]) + 1.0 / (1.0 - beta[k]));
    }
    return Distribution(pi);
}

/// Parimutuel place returns: R(j, jk) = n / (1 + b_j / b_k), R(k, jk) = n / (1 + b_k / b_j).
inline Matrix place_returns(const Vector& beta) {
    check_beta(beta);
    const Index n = beta.size();
    const auto pairs = place_outcomes(n);
    Matrix R = Matrix::Zero(n, static_cast<Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        const auto [j, k] = pairs[c];
        R(j, static_cast<Index>(c)) = double(n) / (1.0 + beta[j] / beta[k]);
        R(k, static_cast<Index>(c)) = double(n) / (1.0 + beta[k] / beta[j]);
    }
    return R;
}

struct HorseRaceInstance {
    Index n = 0;
    Vector beta;
    std::vector<std::pair<Index, Index>> outcomes;
    BettingMarket market;
    Distribution pi_nom;

    Index num_outcomes() const { return static_cast<Index>(outcomes.size()); }
};

inline HorseRaceInstance make_horse_race(const Vector& beta) {
    return {beta.size(), beta, place_outcomes(beta.size()), BettingMarket(place_returns(beta)),
            place_distribution(beta)};
}

inline HorseRaceInstance make_horse_race(Index n, std::uint64_t seed) { return make_horse_race(sample_beta(n, seed)); }

enum class Family { box, ball };

inline const char* to_string(Family f) { return f == Family::box ? "box" : "ball"; }

/// { pi : |pi - pi_nom| <= eta pi_nom }.
inline AmbiguitySet box_family(const Distribution& pi_nom, double eta) {
    detail::require(eta >= 0.0 && eta < 1.0, "box family: eta must lie in [0, 1)");
    if (eta == 0.0) return AmbiguitySet::singleton(pi_nom);
    return AmbiguitySet::box(pi_nom, eta * pi_nom.probs());
}

/// { pi : ||pi - pi_nom||_2 <= c }.
inline AmbiguitySet ball_family(const Distribution& pi_nom, double c) {
    detail::require(c >= 0.0 && std::isfinite(c), "ball family: c must be >= 0");
    if (c == 0.0) return AmbiguitySet::singleton(pi_nom);
    const Index k = pi_nom.size();
    return AmbiguitySet::norm_ball(pi_nom, c * Matrix::Identity(k, k), 2.0);
}

inline AmbiguitySet family_set(Family f, const Distribution& pi_nom, double size) {
    return f == Family::box ? box_family(pi_nom, size) : ball_family(pi_nom, size);
}

/// The four growth rates compared at one uncertainty size.
struct GrowthTable {
    double size = 0.0;
    double nominal_kelly = 0.0;   // G_nom(b_K)
    double worst_kelly = 0.0;     // G_Pi(b_K)
    double nominal_robust = 0.0;  // G_nom(b_RK)
    double worst_robust = 0.0;    // G_Pi(b_RK)
    SolveReport robust;
};

struct SweepResult {
    Family family = Family::box;
    SolveReport kelly;
    std::vector<GrowthTable> rows;

    std::vector<double> sizes() const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.size);
        return out;
    }
};

/// Robust solve at one size given the nominal Kelly bet.
inline GrowthTable evaluate_size(const HorseRaceInstance& inst, Family family, double size, const Bet& kelly_bet,
                                 double tol) {
    const AmbiguitySet set = family_set(family, inst.pi_nom, size);
    GrowthTable row;
    row.size = size;
    row.robust = solve_drkp(inst.market, set, tol);
    row.nominal_kelly = log_growth(inst.market, kelly_bet, inst.pi_nom);
    row.worst_kelly = worst_case(inst.market, kelly_bet, set).value;
    row.nominal_robust = log_growth(inst.market, row.robust.b_star, inst.pi_nom);
    row.worst_robust = row.robust.value;
    return row;
}

/// Solves Kelly once and the robust problem at every size. Sizes are
/// processed on up to `threads` workers; row order follows `sizes`.
inline SweepResult run_sweep(const HorseRaceInstance& inst, Family family, const std::vector<double>& sizes,
                             double tol = kDefaultSolveTolerance, unsigned threads = 1) {
    detail::require(std::is_sorted(sizes.begin(), sizes.end()), "sweep: sizes must be sorted ascending");
    for (double size : sizes) family_set(family, inst.pi_nom, size);
    SweepResult out;
    out.family = family;
    out.kelly = solve_kelly(inst.market, inst.pi_nom, tol);
    out.rows.resize(sizes.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(sizes.size());
    auto work = [&] {
        for (std::size_t i = next++; i < sizes.size(); i = next++) {
            try {
                out.rows[i] = evaluate_size(inst, family, sizes[i], out.kelly.b_star, tol);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sizes.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw std::runtime_error("sweep size " + std::to_string(sizes[i]) + ": " + errors[i]);
    return out;
}

}  // namespace robust_kelly
