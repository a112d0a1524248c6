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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
// when any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "robust_kelly/robust_kelly.hpp"
#include "support/oracles.hpp"

namespace {

using namespace robust_kelly;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

BettingMarket binary_market() {
    Matrix R(2, 2);
    R << 2.0, 0.0, 1.0, 1.0;
    return BettingMarket(R);
}

Distribution binary(double p) { return Distribution((Vector(2) << p, 1.0 - p).finished()); }

// Dual optimum for any variant. Singleton and hull sets are dualized
// through their linear descriptions.
double maximized_dual(const Vector& y, const AmbiguitySet& set) {
    if (auto s = set.get_if<SingletonSet>()) {
        const Index k = s->pi_nom.size();
        return maximize_dual(y, PolyhedralSet{Matrix::Identity(k, k), s->pi_nom.probs(), Matrix(0, k), Vector(0)}).value;
    }
    if (auto s = set.get_if<ConvexHullSet>()) {
        // max t subject to t <= v_i'y, as an LP in (t+, t-).
        auto lp = LinearProgram::with_variables(2);
        lp.objective << -1.0, 1.0;
        for (const auto& v : s->vertices) lp.add_ineq((Vector(2) << 1.0, -1.0).finished(), v.probs().dot(y));
        const auto sol = solve_lp(lp, 1e-12);
        return -sol.objective;
    }
    if (auto s = set.get_if<PolyhedralSet>()) return maximize_dual(y, *s).value;
    if (auto s = set.get_if<BoxSet>()) return maximize_dual(y, *s).value;
    if (auto s = set.get_if<NormBallSet>()) return maximize_dual(y, *s).value;
    if (auto s = set.get_if<DivergenceSet>()) return maximize_dual(y, *s).value;
    return maximize_dual(y, *set.get_if<WassersteinSet>()).value;
}

Outcome strong_duality() {
    const auto start = Clock::now();
    rk_test::Generator gen(1001);
    Outcome out;
    double worst = 0.0;
    std::string worst_variant;
    int count = 0;
    for (auto variant : rk_test::all_variants()) {
        for (int t = 0; t < 200; ++t) {
            const Index n = gen.integer(2, 6), k = gen.integer(2, 10);
            const BettingMarket m = gen.market(n, k);
            const Vector b = gen.simplex_point(n);
            const AmbiguitySet set = gen.set(variant, k);
            const double primal = worst_case(m, b, set).value;
            const double dual = maximized_dual(m.log_returns(b), set);
            const double diff = std::abs(primal - dual);
            if (!(diff <= worst)) {
                worst = diff;
                worst_variant = rk_test::variant_name(variant);
            }
            ++count;
        }
    }
    const double secs = seconds_since(start);
    out.pass = worst <= 1e-6 && secs < 60.0;
    out.detail = fmt("%d instances over %zu variants, max |primal - dual| = %.2e (%s), %.1f s", count,
                     rk_test::all_variants().size(), worst, worst_variant.c_str(), secs);
    return out;
}

Outcome brute_force() {
    rk_test::Generator gen(1002);
    Outcome out;
    double worst = 0.0;
    std::string worst_case_name;
    bool below = true;
    int count = 0;
    for (auto variant : rk_test::all_variants()) {
        for (Index k : {2, 2, 3, 3, 4}) {
            const BettingMarket m = gen.market(3, k, 1.0, 0.03);
            const Vector b = gen.simplex_point(3);
            const AmbiguitySet set = gen.set(variant, k);
            const Vector y = m.log_returns(b);
            const auto grid = rk_test::grid_minimum(y, rk_test::reference_membership(set), rk_test::known_member(set));
            const double value = worst_case(m, b, set).value;
            const double diff = std::abs(value - grid.first);
            if (!(diff <= worst)) {
                worst = diff;
                worst_case_name = rk_test::variant_name(variant) + " K=" + std::to_string(k);
            }
            // Grid points lie in the set, so the infimum cannot exceed them.
            below = below && value <= grid.first + 1e-9;
            ++count;
        }
    }
    out.pass = worst <= 1e-4 && below;
    out.detail = fmt("%d instances, max |oracle - grid| = %.2e (%s), oracle <= grid: %s", count, worst,
                     worst_case_name.c_str(), below ? "yes" : "no");
    return out;
}

Outcome analytic_kelly() {
    Outcome out;
    double worst = 0.0;
    for (double p : {0.5, 0.55, 0.6, 0.75}) {
        const auto r = solve_kelly(binary_market(), binary(p));
        worst = std::max(worst, std::abs(r.b_star[0] - std::max(2 * p - 1, 0.0)));
    }
    out.pass = worst <= 1e-6;
    out.detail = fmt("max |b1 - max(2p - 1, 0)| = %.2e", worst);
    return out;
}

Outcome analytic_robust_kelly() {
    Outcome out;
    double worst = 0.0;
    for (auto [p, r] : {std::pair{0.6, 0.1}, {0.6, 0.05}, {0.75, 0.1}}) {
        const auto s = solve_drkp(binary_market(), AmbiguitySet::box(binary(p), Vector::Constant(2, r)));
        worst = std::max(worst, std::abs(s.b_star[0] - std::max(2 * (p - r) - 1, 0.0)));
    }
    out.pass = worst <= 1e-5;
    out.detail = fmt("max |b1 - max(2(p - r) - 1, 0)| = %.2e", worst);
    return out;
}

Outcome degeneracy() {
    Outcome out;
    const double tiny = 1e-9;
    std::vector<std::pair<std::string, BettingMarket>> markets = {{"binary p=0.6", binary_market()}};
    const HorseRaceInstance race = make_horse_race(6, 7);
    markets.emplace_back("horse race n=6", race.market);
    std::vector<std::string> failures;
    double worst = 0.0;
    int cases = 0;
    for (const auto& [label, m] : markets) {
        const Distribution nom = m.num_outcomes() == 2 ? binary(0.6) : race.pi_nom;
        const Index k = nom.size();
        const double kelly = solve_kelly(m, nom).value;
        std::vector<std::pair<std::string, AmbiguitySet>> sets = {
            {"singleton", AmbiguitySet::singleton(nom)},
            {"box eta=0", AmbiguitySet::box(nom, Vector::Zero(k))},
            {"ball c=1e-9", AmbiguitySet::norm_ball(nom, tiny * Matrix::Identity(k, k), 2.0)},
            {"wasserstein s=1e-9", AmbiguitySet::wasserstein(nom, Matrix::Ones(k, k) - Matrix::Identity(k, k), tiny)},
        };
        for (auto v : rk_test::all_variants())
            if (rk_test::is_divergence(v))
                sets.emplace_back(rk_test::variant_name(v) + " eps=1e-9",
                                  AmbiguitySet::divergence(nom, rk_test::divergence_of(v), tiny));
        for (const auto& [name, set] : sets) {
            const double diff = std::abs(solve_drkp(m, set).value - kelly);
            worst = std::max(worst, diff);
            ++cases;
            if (diff > 2e-6) failures.push_back(fmt("%s/%s %.1e", label.c_str(), name.c_str(), diff));
        }
    }
    out.pass = failures.empty();
    out.detail = fmt("%d cases, max |robust - kelly| = %.2e", cases, worst);
    if (!failures.empty()) {
        out.detail += "; over 2e-6:";
        for (const auto& f : failures) out.detail += " " + f + ";";
    }
    return out;
}

struct PaperCells {
    double nominal_kelly, worst_kelly, nominal_robust, worst_robust;
};

Outcome table_reproduction() {
    const auto start = Clock::now();
    Outcome out;
    const HorseRaceInstance inst = make_horse_race(20, kCanonicalSeed);
    const Bet kelly = solve_kelly(inst.market, inst.pi_nom).b_star;
    const double bmax = inst.beta.maxCoeff(), bmin = inst.beta.minCoeff();
    bool ok = bmax >= 0.14 && bmin <= 0.016;
    std::string detail = fmt("seed %llu, beta %.1f%%..%.1f%%", static_cast<unsigned long long>(kCanonicalSeed),
                             100 * bmax, 100 * bmin);
    const std::pair<Family, double> cases[] = {{Family::box, 0.26}, {Family::ball, 0.016}};
    const PaperCells paper[] = {{4.3, -2.2, 2.2, 0.7}, {4.3, -2.2, 2.2, 0.4}};
    for (int i = 0; i < 2; ++i) {
        const GrowthTable row = evaluate_size(inst, cases[i].first, cases[i].second, kelly, kDefaultSolveTolerance);
        const bool order = row.nominal_kelly > row.nominal_robust && row.nominal_robust > 0.0 && row.worst_kelly < 0.0 &&
                           row.worst_robust > 0.0 && row.worst_robust - row.worst_kelly >= 0.01;
        const double got[] = {io::growth_pct(row.nominal_kelly), io::growth_pct(row.worst_kelly),
                              io::growth_pct(row.nominal_robust), io::growth_pct(row.worst_robust)};
        const double want[] = {paper[i].nominal_kelly, paper[i].worst_kelly, paper[i].nominal_robust,
                               paper[i].worst_robust};
        bool within = true;
        for (int c = 0; c < 4; ++c) within = within && std::abs(got[c] - want[c]) <= 0.5 * std::abs(want[c]);
        ok = ok && order && within && row.robust.converged;
        detail += fmt("; %s: %.2f/%.2f/%.2f/%.2f%% (order %s, magnitudes %s)", to_string(cases[i].first), got[0],
                      got[1], got[2], got[3], order ? "ok" : "BAD", within ? "ok" : "BAD");
    }
    const double secs = seconds_since(start);
    out.pass = ok && secs < 300.0;
    out.detail = detail + fmt("; %.1f s", secs);
    return out;
}

Outcome sweep_monotonicity() {
    Outcome out;
    const double tol = kDefaultSolveTolerance;
    const HorseRaceInstance inst = make_horse_race(20, kCanonicalSeed);
    bool ok = true;
    std::string detail;
    for (auto [family, top] : {std::pair{Family::box, 0.3}, {Family::ball, 0.02}}) {
        std::vector<double> sizes;
        for (int i = 0; i <= 10; ++i) sizes.push_back(top * i / 10.0);
        const SweepResult s = run_sweep(inst, family, sizes, tol, std::max(1u, std::thread::hardware_concurrency()));
        int violations = 0;
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            const GrowthTable& r = s.rows[i];
            if (r.nominal_kelly != s.rows[0].nominal_kelly) ++violations;
            if (r.worst_robust < r.worst_kelly - 2 * tol) ++violations;
            if (i > 0 && r.worst_kelly > s.rows[i - 1].worst_kelly + 2 * tol) ++violations;
            if (i > 0 && r.worst_robust > s.rows[i - 1].worst_robust + 2 * tol) ++violations;
            if (!r.robust.converged) ++violations;
        }
        ok = ok && violations == 0;
        detail += fmt("%s%s: 11 sizes, %d violations", detail.empty() ? "" : "; ", to_string(family), violations);
    }
    out.pass = ok;
    out.detail = detail;
    return out;
}

Outcome conjugate_table_suite() {
    Outcome out;
    std::vector<DivergenceKind> kinds = {DivergenceKind::kl(),          DivergenceKind::reverse_kl(),
                                         DivergenceKind::pearson_chi2(), DivergenceKind::neyman_chi2(),
                                         DivergenceKind::hellinger(),    DivergenceKind::total_variation()};
    for (double a : {-1.0, 0.5, 2.0, 3.0}) kinds.push_back(DivergenceKind::alpha(a));
    rk_test::Generator gen(1008);
    double conj_err = 0.0, fy_violation = 0.0;
    for (const auto& kind : kinds) {
        const ConjugatePair pair(kind);
        auto f = [&](double t) { return rk_test::reference_f(kind, t); };
        for (int i = 0; i < 40; ++i) {
            const double sup = std::isinf(pair.domain_sup()) ? 4.0 : pair.domain_sup();
            const double s = gen.uniform(-6.0, sup - 1e-3);
            const double num = rk_test::numerical_conjugate(f, s);
            conj_err = std::max(conj_err, std::abs(pair.f_star(s) - num) / std::max(1.0, std::abs(num)));
            for (int j = 0; j < 10; ++j) {
                const double t = std::exp(gen.uniform(-6.0, 3.0));
                fy_violation = std::max(fy_violation, s * t - pair.f(t) - pair.f_star(s));
            }
        }
    }
    double limit_err = 0.0;
    const ConjugatePair kl(DivergenceKind::kl()), rkl(DivergenceKind::reverse_kl());
    for (double d : {-1e-6, 1e-6}) {
        const ConjugatePair near_kl(DivergenceKind::alpha(1.0 + d)), near_rkl(DivergenceKind::alpha(d));
        for (double s : {-3.0, -1.0, -0.2, 0.0, 0.4, 0.8}) {
            limit_err = std::max(limit_err, std::abs(near_kl.f_star(s) - kl.f_star(s)));
            limit_err = std::max(limit_err, std::abs(near_rkl.f_star(s) - rkl.f_star(s)));
        }
    }
    out.pass = conj_err <= 1e-6 && fy_violation <= 1e-12 && limit_err <= 1e-4;
    out.detail = fmt("%zu generators, conjugate error %.1e, Fenchel-Young slack %.1e, alpha-limit error %.1e",
                     kinds.size(), conj_err, fy_violation, limit_err);
    return out;
}

Outcome certificate_soundness() {
    rk_test::Generator gen(1009);
    Outcome out;
    int bets = 0, violations = 0;
    double worst = -kInf;
    const auto& variants = rk_test::all_variants();
    for (int inst = 0; inst < 50; ++inst) {
        const Index n = gen.integer(2, 6), k = gen.integer(2, 10);
        Matrix R = gen.market(n, k).returns();
        Vector lower = Vector::Zero(n), upper = Vector::Ones(n);
        if (inst % 2 == 1)
            for (Index i = 0; i < n; ++i) {
                lower[i] = gen.uniform(0.0, 0.1);
                upper[i] = gen.uniform(0.5, 1.0);
            }
        const BettingMarket m(R, BetConstraintSet(lower, upper));
        const AmbiguitySet set = gen.set(variants[static_cast<std::size_t>(inst) % variants.size()], k);
        const SolveReport r = solve_drkp(m, set);
        std::vector<Vector> vertices;
        for (int v = 0; v < 6; ++v) {
            const Vector d = Vector::NullaryExpr(n, [&](Index) { return gen.normal(); });
            vertices.push_back(m.constraints().maximize(d).x);
        }
        for (int s = 0; s < 20; ++s) {
            const Vector w = gen.simplex_point(static_cast<Index>(vertices.size()));
            Vector b = Vector::Zero(n);
            for (std::size_t v = 0; v < vertices.size(); ++v) b += w[static_cast<Index>(v)] * vertices[v];
            const double g = worst_case(m, Bet(b), set).value;
            const double excess = g - (r.value + r.gap);
            worst = std::max(worst, excess);
            if (excess > 1e-9) ++violations;
            ++bets;
        }
    }
    out.pass = violations == 0;
    out.detail = fmt("%d bets over 50 instances, %d violations, max G(b) - (value + gap) = %.2e", bets, violations,
                     worst);
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_round_trip() {
    Outcome out;
    const fs::path root = fs::temp_directory_path() / ("rk_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    bool identical = true, certified = true, ran = true;
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 2; ++rep) {
        const fs::path dir = root / ("run" + std::to_string(rep));
        ran = ran && run_cli("horserace --n 3 --seed 17 --family box --sweep 0,0.1,0.2 --no-timing --out-dir " +
                             (dir / "box").string()) == 0;
        ran = ran && run_cli("horserace --n 4 --seed 17 --family ball --size 0.02 --no-timing --out-dir " +
                             (dir / "ball").string()) == 0;
        for (const auto& entry : fs::directory_iterator(RK_SAMPLES_DIR)) {
            if (entry.path().filename() == "bad_type.json") continue;
            const fs::path res = dir / ("solve_" + entry.path().filename().string());
            ran = ran && run_cli("solve " + entry.path().string() + " --no-timing --out " + res.string()) == 0;
        }
    }
    for (const auto& entry : fs::recursive_directory_iterator(root / "run0")) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = root / "run1" / fs::relative(entry.path(), root / "run0");
        identical = identical && slurp(entry.path()) == slurp(other);
    }
    for (const auto& entry : fs::directory_iterator(RK_SAMPLES_DIR)) {
        if (entry.path().filename() == "bad_type.json") continue;
        const fs::path res = root / "run0" / ("solve_" + entry.path().filename().string());
        const fs::path wc = root / "run0" / ("wc_" + entry.path().filename().string());
        ran = ran && run_cli("worst-case " + entry.path().string() + " --bet " + res.string() + " --no-timing --out " +
                             wc.string()) == 0;
        const auto problem = io::parse_problem(io::read_json_file(entry.path().string()));
        const double tol = problem.tolerance.value_or(kDefaultSolveTolerance);
        const double a = io::read_json_file(res.string())["worst_case_growth"].get<double>();
        const double b = io::read_json_file(wc.string())["worst_case_growth"].get<double>();
        worst_ratio = std::max(worst_ratio, std::abs(a - b) / (10 * tol));
        certified = certified && std::abs(a - b) <= 10 * tol;
    }
    fs::remove_all(root);
    out.pass = ran && identical && certified;
    out.detail = fmt("commands %s, repeated outputs %s, re-certification within %.2f of the 10*tol budget",
                     ran ? "ok" : "FAILED", identical ? "byte-identical" : "DIFFER", worst_ratio);
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"strong duality", strong_duality},
        {"brute-force oracle", brute_force},
        {"analytic binary Kelly", analytic_kelly},
        {"analytic binary robust Kelly", analytic_robust_kelly},
        {"degeneracy", degeneracy},
        {"horse race tables", table_reproduction},
        {"sweep monotonicity", sweep_monotonicity},
        {"conjugate table", conjugate_table_suite},
        {"certificate soundness", certificate_soundness},
        {"CLI round trip and determinism", cli_round_trip},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
