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


// Command-line front end: solve, worst-case and horserace subcommands.
// Exit codes: 0 success, 1 invalid input, 2 tolerance not reached.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "robust_kelly/robust_kelly.hpp"

namespace fs = std::filesystem;
using namespace robust_kelly;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

void emit(const std::string& out_path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        write_atomic(out_path, text);
}

double elapsed_ms(std::chrono::steady_clock::time_point since, bool timing) {
    if (!timing) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_size(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Vector parse_bet(const std::string& arg) {
    Json doc;
    const auto first = arg.find_first_not_of(" \t");
    if (first != std::string::npos && arg[first] == '[') {
        try {
            doc = Json::parse(arg);
        } catch (const Json::parse_error& e) {
            throw io::ProblemError("--bet", std::string("malformed inline bet: ") + e.what());
        }
    } else {
        doc = io::read_json_file(arg);
    }
    if (doc.is_object()) {
        if (!doc.contains("bet")) throw io::ProblemError("/bet", "result document has no bet");
        return io::detail::vector(doc.at("bet"), "/bet");
    }
    return io::detail::vector(doc, "--bet");
}

struct SolveArgs {
    std::string problem;
    bool nominal = false;
    std::optional<double> tol;
    int max_iter = kDefaultMaxIterations;
    std::string out;
    bool no_timing = false;
};

int cmd_solve(const SolveArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    const io::Problem problem = io::parse_problem(io::read_json_file(args.problem));
    const double tol = args.tol.value_or(problem.tolerance.value_or(kDefaultSolveTolerance));
    const Distribution* nominal = problem.ambiguity.nominal();
    SolveReport report;
    if (args.nominal) {
        if (!nominal) throw io::ProblemError("/ambiguity", "a nominal solve needs an ambiguity set with pi_nom");
        report = solve_kelly(problem.market, *nominal, tol, args.max_iter);
    } else {
        report = solve_drkp(problem.market, problem.ambiguity, tol, args.max_iter);
    }
    // Growth figures always refer to the file's ambiguity set, so that
    // re-evaluating the bet with `worst-case` reproduces them.
    WorstCaseResult wc = worst_case(problem.market, report.b_star, problem.ambiguity);
    io::ResultDiagnostics diag{report.iterations, 0.0, report.oracle_calls + 1};
    diag.wall_time_ms = elapsed_ms(started, !args.no_timing);
    Json doc = io::result_json(report.b_star.alloc(), wc.value, report.gap, wc.pi_star.probs(), diag);
    doc["mode"] = args.nominal ? "nominal" : "robust";
    doc["converged"] = report.converged;
    if (nominal) doc["nominal_growth"] = io::detail::real(log_growth(problem.market, report.b_star, *nominal));
    emit(args.out, doc);
    return report.converged ? kExitOk : kExitNotConverged;
}

struct WorstCaseArgs {
    std::string problem;
    std::string bet;
    std::optional<double> tol;
    std::string out;
    bool no_timing = false;
};

int cmd_worst_case(const WorstCaseArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    const io::Problem problem = io::parse_problem(io::read_json_file(args.problem));
    const double tol = args.tol.value_or(problem.tolerance.value_or(kDefaultSolveTolerance));
    const Vector alloc = parse_bet(args.bet);
    if (alloc.size() != problem.market.num_bets())
        throw io::ProblemError("--bet", "expected " + std::to_string(problem.market.num_bets()) + " entries");
    Bet bet = [&] {
        try {
            return Bet(alloc);
        } catch (const std::invalid_argument& e) {
            throw io::ProblemError("--bet", e.what());
        }
    }();
    if (!problem.market.constraints().contains(bet.alloc()))
        throw io::ProblemError("--bet", "bet violates the bet constraints");
    const WorstCaseResult wc = worst_case(problem.market, bet, problem.ambiguity, std::min(tol, kDefaultOracleTolerance));
    const Certificate cert = certify(problem.market, problem.ambiguity, bet, tol);
    io::ResultDiagnostics diag{0, 0.0, 2};
    diag.wall_time_ms = elapsed_ms(started, !args.no_timing);
    Json doc = io::result_json(bet.alloc(), wc.value, wc.gap, wc.pi_star.probs(), diag);
    doc["optimality_gap"] = io::detail::real(cert.gap);
    if (const Distribution* nominal = problem.ambiguity.nominal())
        doc["nominal_growth"] = io::detail::real(log_growth(problem.market, bet, *nominal));
    emit(args.out, doc);
    return wc.converged ? kExitOk : kExitNotConverged;
}

struct HorseRaceArgs {
    Index n = 20;
    std::uint64_t seed = kCanonicalSeed;
    std::string family = "box";
    std::optional<double> size;
    std::string sweep;
    std::string out_dir;
    double tol = kDefaultSolveTolerance;
    bool no_timing = false;
};

unsigned worker_count() {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ROBUST_KELLY_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1)
            throw std::invalid_argument("ROBUST_KELLY_THREADS must be a positive integer");
        threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    }
    return threads;
}

std::vector<double> parse_sizes(const std::string& csv) {
    std::vector<double> sizes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            sizes.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw io::ProblemError("--sweep", "not a number: '" + item + "'");
        }
    }
    if (sizes.empty()) throw io::ProblemError("--sweep", "no sizes given");
    return sizes;
}

int cmd_horserace(const HorseRaceArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    if (args.n < 2) throw io::ProblemError("--n", "need at least two horses");
    if (args.family != "box" && args.family != "ball")
        throw io::ProblemError("--family", "unknown family '" + args.family + "'");
    const Family family = args.family == "box" ? Family::box : Family::ball;
    const std::vector<double> sizes = args.size ? std::vector<double>{*args.size} : parse_sizes(args.sweep);
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw io::ProblemError("--sweep", "sizes must be ascending");
    for (double s : sizes) {
        try {
            family_set(family, Distribution::uniform(2), s);
        } catch (const std::invalid_argument& e) {
            throw io::ProblemError(args.size ? "--size" : "--sweep", e.what());
        }
    }

    const HorseRaceInstance inst = make_horse_race(args.n, args.seed);
    const fs::path dir = args.out_dir.empty() ? fs::path(".") : fs::path(args.out_dir);

    Json instance;
    instance["n"] = args.n;
    instance["seed"] = args.seed;
    instance["beta"] = io::detail::to_json(inst.beta);
    instance["outcomes"] = Json::array();
    for (const auto& [j, k] : inst.outcomes) instance["outcomes"].push_back({j, k});
    instance["pi_nom"] = io::detail::to_json(inst.pi_nom.probs());
    instance["returns"] = io::detail::to_json(inst.market.returns());
    write_atomic(dir / "instance.json", instance.dump(2) + "\n");

    const SweepResult sweep = run_sweep(inst, family, sizes, args.tol, worker_count());
    bool all_converged = sweep.kelly.converged;

    std::ostringstream table, curves;
    table << "size,bet,distribution,growth,growth_pct\n";
    curves << "size,nominal_kelly,worst_kelly,nominal_robust,worst_robust,robust_gap,converged\n";
    for (const GrowthTable& row : sweep.rows) {
        const std::string tag = std::string(to_string(family)) + "_" + format_size(row.size);
        const AmbiguitySet set = family_set(family, inst.pi_nom, row.size);
        write_atomic(dir / ("problem_" + tag + ".json"),
                     io::problem_json(inst.market, set, args.tol).dump(2) + "\n");
        io::ResultDiagnostics diag{row.robust.iterations, 0.0, row.robust.oracle_calls};
        if (!args.no_timing) diag.wall_time_ms = row.robust.wall_time.count() * 1e3;
        Json result = io::result_json(row.robust.b_star.alloc(), row.robust.value, row.robust.gap,
                                      row.robust.worst_case.probs(), diag);
        result["mode"] = "robust";
        result["converged"] = row.robust.converged;
        result["nominal_growth"] = io::detail::real(row.nominal_robust);
        write_atomic(dir / ("result_" + tag + ".json"), result.dump(2) + "\n");
        all_converged = all_converged && row.robust.converged;

        const std::pair<const char*, double> cells[] = {{"kelly,nominal", row.nominal_kelly},
                                                        {"kelly,worst", row.worst_kelly},
                                                        {"robust,nominal", row.nominal_robust},
                                                        {"robust,worst", row.worst_robust}};
        for (const auto& [label, g] : cells)
            table << format_real(row.size) << ',' << label << ',' << format_real(g) << ','
                  << format_real(io::growth_pct(g)) << '\n';
        curves << format_real(row.size) << ',' << format_real(row.nominal_kelly) << ','
               << format_real(row.worst_kelly) << ',' << format_real(row.nominal_robust) << ','
               << format_real(row.worst_robust) << ',' << format_real(row.robust.gap) << ','
               << (row.robust.converged ? 1 : 0) << '\n';
    }
    write_atomic(dir / "table.csv", table.str());
    write_atomic(dir / "sweep.csv", curves.str());
    if (!args.no_timing)
        std::cerr << "horserace: " << sizes.size() << " size(s) in " << format_size(elapsed_ms(started, true))
                  << " ms\n";
    return all_converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kelly and distributionally robust Kelly betting"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve the nominal or robust Kelly problem");
    solve->add_option("problem", solve_args.problem, "Problem JSON file")->required();
    auto* robust_flag = solve->add_flag("--robust", "Maximize worst-case growth (default)");
    solve->add_flag("--nominal", solve_args.nominal, "Maximize growth under the nominal distribution")
        ->excludes(robust_flag);
    solve->add_option("--tol", solve_args.tol, "Gap tolerance in nats per round");
    solve->add_option("--max-iter", solve_args.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
    solve->add_option("--out", solve_args.out, "Result file (stdout if omitted)");
    solve->add_flag("--no-timing", solve_args.no_timing, "Write zero wall time for reproducible output");

    WorstCaseArgs wc_args;
    auto* wc = app.add_subcommand("worst-case", "Worst-case growth of a given bet");
    wc->add_option("problem", wc_args.problem, "Problem JSON file")->required();
    wc->add_option("--bet", wc_args.bet, "Bet as a JSON array, or a file holding one or a result")->required();
    wc->add_option("--tol", wc_args.tol, "Tolerance in nats per round");
    wc->add_option("--out", wc_args.out, "Result file (stdout if omitted)");
    wc->add_flag("--no-timing", wc_args.no_timing, "Write zero wall time for reproducible output");

    HorseRaceArgs hr_args;
    auto* hr = app.add_subcommand("horserace", "Place-bet horse race experiment");
    hr->add_option("--n", hr_args.n, "Number of horses");
    hr->add_option("--seed", hr_args.seed, "Generator seed");
    hr->add_option("--family", hr_args.family, "Uncertainty family: box or ball");
    auto* size_opt = hr->add_option("--size", hr_args.size, "Single uncertainty size (eta or c)");
    auto* sweep_opt = hr->add_option("--sweep", hr_args.sweep, "Comma-separated ascending sizes");
    size_opt->excludes(sweep_opt);
    hr->add_option("--out-dir", hr_args.out_dir, "Output directory")->required();
    hr->add_option("--tol", hr_args.tol, "Gap tolerance in nats per round")->check(CLI::PositiveNumber);
    hr->add_flag("--no-timing", hr_args.no_timing, "Write zero wall times for reproducible output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*solve) return cmd_solve(solve_args);
        if (*wc) return cmd_worst_case(wc_args);
        if (!hr_args.size && hr_args.sweep.empty()) throw io::ProblemError("--size", "give --size or --sweep");
        return cmd_horserace(hr_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}
