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


#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "robust_kelly/divergence.hpp"
#include "support/oracles.hpp"

namespace {

using namespace robust_kelly;

std::vector<DivergenceKind> kinds() {
    return {DivergenceKind::kl(),          DivergenceKind::reverse_kl(),      DivergenceKind::pearson_chi2(),
            DivergenceKind::neyman_chi2(), DivergenceKind::hellinger(),       DivergenceKind::total_variation(),
            DivergenceKind::alpha(-1.0),   DivergenceKind::alpha(0.5),        DivergenceKind::alpha(2.0),
            DivergenceKind::alpha(3.0)};
}

std::vector<double> sample_slopes(const ConjugatePair& pair) {
    std::vector<double> s = {-6.0, -2.0, -1.0, -0.45, -0.1, 0.0, 0.2, 0.45};
    const double sup = pair.domain_sup();
    for (double frac : {0.5, 0.9, 0.99}) s.push_back(std::isinf(sup) ? 4.0 * frac : sup * frac);
    std::vector<double> out;
    for (double v : s)
        if (pair.in_domain(v)) out.push_back(v);
    return out;
}

TEST(Conjugate, SpotValues) {
    EXPECT_EQ(ConjugatePair(DivergenceKind::kl()).f_star(0.0), 0.0);
    const ConjugatePair tv(DivergenceKind::total_variation());
    EXPECT_EQ(tv.f_star(0.5), 0.5);
    EXPECT_EQ(tv.f_star(-2.0), -1.0);
    EXPECT_EQ(tv.f_star(1.5), kInf);
    const ConjugatePair a2(DivergenceKind::alpha(2.0)), pearson(DivergenceKind::pearson_chi2());
    for (double s : {-0.9, -0.3, 0.0, 0.7, 2.5}) {
        EXPECT_NEAR(a2.f_star(s), 0.5 * (s + 1) * (s + 1) - 0.5, 1e-14);
        EXPECT_NEAR(a2.f_star(s), pearson.f_star(s), 1e-14);
    }
}

TEST(Conjugate, GeneratorMatchesReference) {
    for (const auto& kind : kinds()) {
        const ConjugatePair pair(kind);
        EXPECT_EQ(pair.f(1.0), 0.0) << kind.name();
        for (double t : {0.0, 1e-3, 0.3, 0.9, 1.7, 5.0, 40.0}) {
            const double ref = rk_test::reference_f(kind, t);
            if (std::isinf(ref)) {
                EXPECT_TRUE(std::isinf(pair.f(t))) << kind.name() << " t=" << t;
            } else {
                EXPECT_NEAR(pair.f(t), ref, 1e-12 * (1 + std::abs(ref))) << kind.name() << " t=" << t;
            }
        }
    }
}

TEST(Conjugate, MatchesNumericalConjugate) {
    for (const auto& kind : kinds()) {
        const ConjugatePair pair(kind);
        auto f = [&](double t) { return rk_test::reference_f(kind, t); };
        for (double s : sample_slopes(pair)) {
            const double num = rk_test::numerical_conjugate(f, s);
            EXPECT_NEAR(pair.f_star(s), num, 1e-6 * std::max(1.0, std::abs(num))) << kind.name() << " s=" << s;
        }
        if (std::isfinite(pair.domain_sup()) && !pair.sup_inclusive()) {
            EXPECT_EQ(pair.f_star(pair.domain_sup() + 0.1), kInf) << kind.name();
            EXPECT_TRUE(std::isinf(rk_test::numerical_conjugate(f, pair.domain_sup() + 0.1))) << kind.name();
        }
    }
}

TEST(Conjugate, FenchelYoung) {
    rk_test::Generator gen(5);
    for (const auto& kind : kinds()) {
        const ConjugatePair pair(kind);
        for (double s : sample_slopes(pair)) {
            for (int i = 0; i < 20; ++i) {
                const double t = std::exp(gen.uniform(-6.0, 3.0));
                EXPECT_GE(pair.f(t) + pair.f_star(s), s * t - 1e-12) << kind.name();
            }
            const double t_star = pair.f_star_slope(s);
            if (std::isfinite(pair.f(t_star))) {
                EXPECT_NEAR(pair.f(t_star) + pair.f_star(s), s * t_star, 1e-9 * (1 + std::abs(s * t_star)))
                    << kind.name() << " s=" << s;
            }
        }
    }
}

TEST(Conjugate, SlopeIsDerivative) {
    for (const auto& kind : kinds()) {
        if (kind.family() == DivergenceFamily::total_variation) continue;
        const ConjugatePair pair(kind);
        for (double s : sample_slopes(pair)) {
            const double h = 1e-6;
            if (!pair.in_domain(s + h)) continue;
            const double fd = (pair.f_star(s + h) - pair.f_star(s - h)) / (2 * h);
            EXPECT_NEAR(pair.f_star_slope(s), fd, 1e-5 * std::max(1.0, std::abs(fd))) << kind.name() << " s=" << s;
        }
    }
}

TEST(Conjugate, AlphaLimits) {
    const ConjugatePair kl(DivergenceKind::kl()), rkl(DivergenceKind::reverse_kl());
    for (double d : {-1e-6, 1e-6}) {
        const ConjugatePair near_kl(DivergenceKind::alpha(1.0 + d)), near_rkl(DivergenceKind::alpha(d));
        for (double s : {-3.0, -1.0, 0.0, 0.4, 0.8}) {
            EXPECT_NEAR(near_kl.f_star(s), kl.f_star(s), 1e-4);
            EXPECT_NEAR(near_rkl.f_star(s), rkl.f_star(s), 1e-4);
        }
        for (double t : {0.1, 0.5, 2.0, 6.0}) {
            EXPECT_NEAR(near_kl.f(t), kl.f(t), 1e-4);
            EXPECT_NEAR(near_rkl.f(t), rkl.f(t), 1e-4);
        }
    }
    EXPECT_EQ(DivergenceKind::alpha(1.0), DivergenceKind::kl());
    EXPECT_EQ(DivergenceKind::alpha(0.0), DivergenceKind::reverse_kl());
}

TEST(Conjugate, HellingerIsAlphaHalf) {
    const ConjugatePair h(DivergenceKind::hellinger()), a(DivergenceKind::alpha(0.5));
    for (double s : {-4.0, -0.5, 0.0, 1.0, 1.9}) EXPECT_NEAR(h.f_star(s), a.f_star(s), 1e-12);
}

TEST(Conjugate, Perspective) {
    const ConjugatePair kl(DivergenceKind::kl());
    EXPECT_NEAR(kl.perspective(0.5, 0.3), 0.5 * std::expm1(0.6), 1e-15);
    EXPECT_EQ(kl.perspective(0.0, -1.0), 0.0);
    EXPECT_EQ(kl.perspective(0.0, 0.5), kInf);
}

TEST(Divergence, SpotValues) {
    const Vector pi = (Vector(2) << 0.5, 0.5).finished(), nom = (Vector(2) << 0.6, 0.4).finished();
    EXPECT_NEAR(divergence_value(DivergenceKind::kl(), pi, nom), 0.5 * std::log(5.0 / 6.0) + 0.5 * std::log(1.25), 1e-15);
    EXPECT_NEAR(divergence_value(DivergenceKind::total_variation(), pi, nom), 0.2, 1e-15);
    for (const auto& kind : kinds()) EXPECT_EQ(divergence_value(kind, nom, nom), 0.0);
}

}  // namespace
