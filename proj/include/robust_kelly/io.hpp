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


/// \file io.hpp
/// \brief JSON problem and result documents.
///
/// Problem document:
///   { "returns": [[...], ...],                       n x K, row per bet
///     "bet_constraints": { "lower": [...], "upper": [...],
///                          "linear": { "F": [[...]], "g": [...] } },   optional
///     "ambiguity": { "type": "...", ... },
///     "tolerance": 1e-6 }                             optional
///
/// Ambiguity objects by "type":
///   singleton     pi_nom
///   convex_hull   vertices
///   polyhedral    A0, d0, A1, d1 (each pair optional)
///   box           pi_nom, rho (array or scalar)
///   norm_ball     pi_nom, p (number or "inf"), and either W (matrix) or c (W = c I)
///   divergence    pi_nom, divergence, epsilon, alpha (only for "alpha")
///   wasserstein   pi_nom, cost, s

#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/divergence.hpp"
#include "robust_kelly/solver.hpp"

namespace robust_kelly::io {

using Json = nlohmann::json;

/// Invalid problem document; `path` is a JSON pointer to the offending value.
class ProblemError : public std::invalid_argument {
public:
    ProblemError(std::string path, const std::string& message)
        : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct Problem {
    BettingMarket market;
    AmbiguitySet ambiguity;
    std::optional<double> tolerance;
};

namespace detail {

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ProblemError(path.empty() ? "/" : path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) known = known || it.key() == key;
        if (!known) throw ProblemError(child(path, it.key()), "unknown key");
    }
}

inline const Json& member(const Json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ProblemError(child(path, key), "missing required key");
    return obj.at(key);
}

inline double number(const Json& v, const std::string& path) {
    if (v.is_string() && (v == "inf" || v == "Infinity")) return kInf;
    if (!v.is_number()) throw ProblemError(path, "expected a number");
    return v.get<double>();
}

inline Vector vector(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ProblemError(path, "expected an array of numbers");
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = number(v[i], child(path, i));
    return out;
}

inline Matrix matrix(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ProblemError(path, "expected an array of rows");
    if (v.empty()) return Matrix(0, 0);
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
        const Vector row = vector(v[r], child(path, r));
        if (static_cast<std::size_t>(row.size()) != cols) throw ProblemError(child(path, r), "ragged matrix row");
        out.row(static_cast<Index>(r)) = row.transpose();
    }
    return out;
}

inline Distribution distribution(const Json& v, const std::string& path) {
    try {
        return Distribution(vector(v, path));
    } catch (const ProblemError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ProblemError(path, e.what());
    }
}

inline DivergenceKind divergence_kind(const Json& obj, const std::string& path) {
    const std::string at = child(path, "divergence");
    const Json& v = member(obj, path, "divergence");
    if (!v.is_string()) throw ProblemError(at, "expected a string");
    const std::string name = v.get<std::string>();
    if (name == "kl") return DivergenceKind::kl();
    if (name == "reverse_kl") return DivergenceKind::reverse_kl();
    if (name == "pearson_chi2") return DivergenceKind::pearson_chi2();
    if (name == "neyman_chi2") return DivergenceKind::neyman_chi2();
    if (name == "hellinger") return DivergenceKind::hellinger();
    if (name == "total_variation") return DivergenceKind::total_variation();
    if (name == "alpha") return DivergenceKind::alpha(number(member(obj, path, "alpha"), child(path, "alpha")));
    throw ProblemError(at, "unknown divergence '" + name + "'");
}

inline AmbiguitySet ambiguity(const Json& obj, const std::string& path) {
    if (!obj.is_object()) throw ProblemError(path, "expected an object");
    const Json& tag = member(obj, path, "type");
    if (!tag.is_string()) throw ProblemError(child(path, "type"), "expected a string");
    const std::string type = tag.get<std::string>();
    auto pi_nom = [&] { return distribution(member(obj, path, "pi_nom"), child(path, "pi_nom")); };
    auto mat = [&](const char* key) { return matrix(member(obj, path, key), child(path, key)); };
    auto num = [&](const char* key) { return number(member(obj, path, key), child(path, key)); };
    try {
        if (type == "singleton") {
            only_keys(obj, path, {"type", "pi_nom"});
            return AmbiguitySet::singleton(pi_nom());
        }
        if (type == "convex_hull") {
            only_keys(obj, path, {"type", "vertices"});
            const Json& vs = member(obj, path, "vertices");
            if (!vs.is_array()) throw ProblemError(child(path, "vertices"), "expected an array");
            std::vector<Distribution> vertices;
            for (std::size_t i = 0; i < vs.size(); ++i)
                vertices.push_back(distribution(vs[i], child(child(path, "vertices"), i)));
            return AmbiguitySet::convex_hull(std::move(vertices));
        }
        if (type == "polyhedral") {
            only_keys(obj, path, {"type", "A0", "d0", "A1", "d1"});
            PolyhedralSet s;
            if (obj.contains("A0")) {
                s.A0 = mat("A0");
                s.d0 = vector(member(obj, path, "d0"), child(path, "d0"));
            }
            if (obj.contains("A1")) {
                s.A1 = mat("A1");
                s.d1 = vector(member(obj, path, "d1"), child(path, "d1"));
            }
            return AmbiguitySet(std::move(s));
        }
        if (type == "box") {
            only_keys(obj, path, {"type", "pi_nom", "rho"});
            Distribution pn = pi_nom();
            const Json& r = member(obj, path, "rho");
            Vector rho = r.is_array() ? vector(r, child(path, "rho"))
                                      : Vector::Constant(pn.size(), number(r, child(path, "rho")));
            return AmbiguitySet::box(std::move(pn), std::move(rho));
        }
        if (type == "norm_ball") {
            only_keys(obj, path, {"type", "pi_nom", "W", "c", "p"});
            Distribution pn = pi_nom();
            if (obj.contains("W") == obj.contains("c"))
                throw ProblemError(child(path, "W"), "give exactly one of 'W' and 'c'");
            const Index k = pn.size();
            Matrix W = obj.contains("W") ? mat("W") : Matrix(num("c") * Matrix::Identity(k, k));
            return AmbiguitySet::norm_ball(std::move(pn), std::move(W), num("p"));
        }
        if (type == "divergence") {
            only_keys(obj, path, {"type", "pi_nom", "divergence", "alpha", "epsilon"});
            const DivergenceKind kind = divergence_kind(obj, path);
            if (obj.contains("alpha") && obj.at("divergence") != "alpha")
                throw ProblemError(child(path, "alpha"), "only allowed with divergence 'alpha'");
            return AmbiguitySet::divergence(pi_nom(), kind, num("epsilon"));
        }
        if (type == "wasserstein") {
            only_keys(obj, path, {"type", "pi_nom", "cost", "s"});
            return AmbiguitySet::wasserstein(pi_nom(), mat("cost"), num("s"));
        }
    } catch (const ProblemError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ProblemError(path, e.what());
    }
    throw ProblemError(child(path, "type"), "unknown ambiguity type '" + type + "'");
}

inline Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Json to_json(const Matrix& m) {
    Json out = Json::array();
    for (Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
    return out;
}

/// Finite numbers as-is; infinities as null (JSON has no representation).
inline Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json ambiguity_json(const AmbiguitySet& set) {
    Json out;
    out["type"] = set.type_name();
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConvexHullSet>) {
                out["vertices"] = Json::array();
                for (const auto& v : s.vertices) out["vertices"].push_back(to_json(v.probs()));
            } else if constexpr (std::is_same_v<T, PolyhedralSet>) {
                if (s.A0.rows() > 0) {
                    out["A0"] = to_json(s.A0);
                    out["d0"] = to_json(s.d0);
                }
                if (s.A1.rows() > 0) {
                    out["A1"] = to_json(s.A1);
                    out["d1"] = to_json(s.d1);
                }
            } else {
                out["pi_nom"] = to_json(s.pi_nom.probs());
                if constexpr (std::is_same_v<T, BoxSet>) {
                    out["rho"] = to_json(s.rho);
                } else if constexpr (std::is_same_v<T, NormBallSet>) {
                    const Index k = s.W.rows();
                    if (s.W == s.W(0, 0) * Matrix::Identity(k, k))
                        out["c"] = s.W(0, 0);
                    else
                        out["W"] = to_json(s.W);
                    out["p"] = std::isinf(s.p) ? Json("inf") : Json(s.p);
                } else if constexpr (std::is_same_v<T, DivergenceSet>) {
                    out["divergence"] = s.kind.family() == DivergenceFamily::alpha ? "alpha" : s.kind.name();
                    if (s.kind.family() == DivergenceFamily::alpha) out["alpha"] = s.kind.alpha_parameter();
                    out["epsilon"] = s.epsilon;
                } else if constexpr (std::is_same_v<T, WassersteinSet>) {
                    out["cost"] = to_json(s.cost);
                    out["s"] = s.s;
                }
            }
        },
        set.variant());
    return out;
}

}  // namespace detail

inline Problem parse_problem(const Json& doc) {
    detail::only_keys(doc, "", {"returns", "bet_constraints", "ambiguity", "tolerance"});
    const Matrix R = detail::matrix(detail::member(doc, "", "returns"), "/returns");
    if (R.size() == 0) throw ProblemError("/returns", "empty returns matrix");
    const Index n = R.rows();
    std::optional<BetConstraintSet> bets;
    if (doc.contains("bet_constraints")) {
        const Json& bc = doc.at("bet_constraints");
        detail::only_keys(bc, "/bet_constraints", {"lower", "upper", "linear"});
        const Vector lower =
            bc.contains("lower") ? detail::vector(bc.at("lower"), "/bet_constraints/lower") : Vector(Vector::Zero(n));
        const Vector upper =
            bc.contains("upper") ? detail::vector(bc.at("upper"), "/bet_constraints/upper") : Vector(Vector::Ones(n));
        Matrix F;
        Vector g;
        if (bc.contains("linear")) {
            const Json& lin = bc.at("linear");
            detail::only_keys(lin, "/bet_constraints/linear", {"F", "g"});
            F = detail::matrix(detail::member(lin, "/bet_constraints/linear", "F"), "/bet_constraints/linear/F");
            g = detail::vector(detail::member(lin, "/bet_constraints/linear", "g"), "/bet_constraints/linear/g");
        }
        try {
            bets.emplace(lower, upper, F, g);
        } catch (const std::invalid_argument& e) {
            throw ProblemError("/bet_constraints", e.what());
        }
    }
    std::optional<BettingMarket> market;
    try {
        market.emplace(R, bets ? *bets : BetConstraintSet::simplex(n));
    } catch (const std::invalid_argument& e) {
        throw ProblemError("/returns", e.what());
    }
    AmbiguitySet set = detail::ambiguity(detail::member(doc, "", "ambiguity"), "/ambiguity");
    if (set.dimension() != R.cols())
        throw ProblemError("/ambiguity", "dimension " + std::to_string(set.dimension()) + " does not match " +
                                             std::to_string(R.cols()) + " outcomes");
    std::optional<double> tol;
    if (doc.contains("tolerance")) {
        tol = detail::number(doc.at("tolerance"), "/tolerance");
        if (!(*tol > 0.0) || !std::isfinite(*tol)) throw ProblemError("/tolerance", "must be positive");
    }
    return {std::move(*market), std::move(set), tol};
}

inline Json problem_json(const BettingMarket& market, const AmbiguitySet& set, std::optional<double> tol = {}) {
    Json doc;
    doc["returns"] = detail::to_json(market.returns());
    const BetConstraintSet& bc = market.constraints();
    const Index n = market.num_bets();
    const bool plain = bc.lower() == Vector::Zero(n) && bc.upper() == Vector::Ones(n) && !bc.has_linear_constraints();
    if (!plain) {
        doc["bet_constraints"]["lower"] = detail::to_json(bc.lower());
        doc["bet_constraints"]["upper"] = detail::to_json(bc.upper());
        if (bc.has_linear_constraints()) {
            doc["bet_constraints"]["linear"]["F"] = detail::to_json(bc.F());
            doc["bet_constraints"]["linear"]["g"] = detail::to_json(bc.g());
        }
    }
    doc["ambiguity"] = detail::ambiguity_json(set);
    if (tol) doc["tolerance"] = *tol;
    return doc;
}

/// 100 (exp(v) - 1): per-round growth as a percentage.
inline double growth_pct(double nats) { return 100.0 * std::expm1(nats); }

struct ResultDiagnostics {
    int iterations = 0;
    double wall_time_ms = 0.0;
    int oracle_calls = 0;
};

inline Json result_json(const Vector& bet, double worst_case_growth, double gap, const Vector& worst_distribution,
                        const ResultDiagnostics& diag) {
    Json doc;
    doc["bet"] = detail::to_json(bet);
    doc["worst_case_growth"] = detail::real(worst_case_growth);
    doc["worst_case_growth_pct"] = detail::real(growth_pct(worst_case_growth));
    doc["gap"] = detail::real(gap);
    doc["worst_case_distribution"] = detail::to_json(worst_distribution);
    doc["diagnostics"]["iterations"] = diag.iterations;
    doc["diagnostics"]["wall_time_ms"] = diag.wall_time_ms;
    doc["diagnostics"]["oracle_calls"] = diag.oracle_calls;
    return doc;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ProblemError("/", std::string("malformed JSON in ") + path + ": " + e.what());
    }
}

}  // namespace robust_kelly::io
