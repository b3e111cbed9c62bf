// Command-line front end: simulate, classify, boundary, table2, regionmap,
// profit, sweep. Deterministic text/CSV/JSON output; numbers are printed as
// decimal strings so nothing is lost downstream.
//
// Exit codes: 0 success, 2 bad flags, 3 undetected behavior (simulate),
// 4 undecidable boundary (ambiguous sign or no sign change).

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parrondo/parrondo.hpp"

namespace {

using namespace parrondo;
using nlohmann::json;

struct CommonFlags {
    std::string rho, phi;
    long bits = 256;
};

PrecisionConfig config_for_bits(long bits) {
    // sub-64-bit widths are a supported diagnostic mode (reproducing the
    // double-precision misclassification); eps scale with the width
    if (bits < 64) return PrecisionConfig::unchecked(bits);
    double eps = bits >= 200 ? 1e-30 : 1e-12;
    return PrecisionConfig::make(bits, eps, eps);
}

Params make_params(const CommonFlags& f) {
    return Params::from_strings(f.rho, f.phi, config_for_bits(f.bits));
}

/// Exact rational pi when rho was given as a small fraction "a/b".
std::optional<std::string> rational_pi_string(const std::string& rho_text) {
    auto slash = rho_text.find('/');
    if (slash == std::string::npos) return std::nullopt;
    try {
        long long a = std::stoll(rho_text.substr(0, slash));
        long long b = std::stoll(rho_text.substr(slash + 1));
        if (a <= 0 || b <= 0 || a >= b || b > 1000000) return std::nullopt;
        long long denom = 2 * (b * b + a * b + a * a);
        long long n0 = b * b + a * a;
        long long n1 = a * (a + b);
        long long n2 = b * (a + b);
        auto frac = [&](long long n) {
            long long g = std::gcd(n, denom);
            return std::to_string(n / g) + "/" + std::to_string(denom / g);
        };
        return frac(n0) + "," + frac(n1) + "," + frac(n2);
    } catch (...) {
        return std::nullopt;
    }
}

std::string cycles_string(const std::vector<GamePattern>& cycles) {
    std::string out;
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        if (i != 0) out += ";";
        out += cycles[i].to_string();
    }
    return out;
}

std::string point_string(const SimplexPoint& p, std::size_t digits = 0) {
    return p.x0.to_string(digits) + "," + p.x1.to_string(digits) + "," + p.x2.to_string(digits);
}

CurveSpec parse_curve(const std::string& text) {
    auto fail = [&]() -> CurveSpec {
        throw CLI::ValidationError("--curve", "expected G:n:m, E:n, E:n:m, H:n:m or b:n; got '" +
                                                text + "'");
    };
    auto c1 = text.find(':');
    if (c1 == std::string::npos) return fail();
    std::string kind = text.substr(0, c1);
    std::string rest = text.substr(c1 + 1);
    auto c2 = rest.find(':');
    int n = 0, m = 0;
    bool has_m = c2 != std::string::npos;
    try {
        n = std::stoi(has_m ? rest.substr(0, c2) : rest);
        if (has_m) m = std::stoi(rest.substr(c2 + 1));
    } catch (...) {
        return fail();
    }
    using K = CurveSpec::Kind;
    if (kind == "G" && has_m) return CurveSpec{K::G, n, m};
    if (kind == "H" && has_m) return CurveSpec{K::H, n, m};
    if (kind == "E" && has_m) return CurveSpec{K::Em, n, m};
    if (kind == "E") return CurveSpec{K::E, n, 0};
    if (kind == "b" && !has_m) return CurveSpec{K::BIntercept, n, 0};
    return fail();
}

struct Range {
    Real lo, hi;
    long steps;
};

Range parse_range(const std::string& text, long bits) {
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("--range", "expected a:b:steps; got '" + text + "'");
    Real lo = Real::from_string(text.substr(0, c1), bits);
    Real hi = Real::from_string(text.substr(c1 + 1, c2 - c1 - 1), bits);
    long steps = std::stol(text.substr(c2 + 1));
    if (steps < 1) throw CLI::ValidationError("--range", "steps must be >= 1");
    return Range{std::move(lo), std::move(hi), steps};
}

Real range_value(const Range& r, long i) {
    if (r.steps == 1) return r.lo;
    return r.lo + (r.hi - r.lo) * i / (r.steps - 1);
}

int cmd_simulate(const CommonFlags& common, const std::string& x0_text,
                 const std::string& x1_text, long steps, const std::string& format,
                 long trailing_b) {
    Params params = make_params(common);
    long bits = params.bits();
    Real x0 = Real::from_string(x0_text, bits);
    Real x1 = Real::from_string(x1_text, bits);
    SimplexPoint start = make_simplex_point(x0, x1, 1 - x0 - x1);

    Trajectory trace{{start}, {}, params};
    std::optional<DetectedBehavior> behavior;
    DetectOptions opts;
    opts.trailing_b = trailing_b;
    try {
        behavior = detect(start, params, steps, opts, &trace);
    } catch (const UndetectedError&) {
        behavior = std::nullopt;
    }

    if (format == "json") {
        json rows = json::array();
        for (std::size_t t = 0; t < trace.games.size(); ++t)
            rows.push_back({{"t", t},
                            {"game", std::string(1, trace.games[t])},
                            {"x0", trace.states[t].x0.to_string()},
                            {"x1", trace.states[t].x1.to_string()},
                            {"x2", trace.states[t].x2.to_string()}});
        json out{{"rows", std::move(rows)}};
        if (behavior) {
            json cyc = json::array();
            for (const auto& st : behavior->cycle_states)
                cyc.push_back({{"x0", st.x0.to_string()},
                               {"x1", st.x1.to_string()},
                               {"x2", st.x2.to_string()}});
            out["behavior"] = {{"kind", behavior->to_string()},
                               {"pattern", behavior->pattern.to_string()},
                               {"transient", behavior->transient_length},
                               {"cycle_states", std::move(cyc)}};
        } else {
            out["behavior"] = {{"kind", "undetected"}};
        }
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "t,game,x0,x1,x2\n";
        for (std::size_t t = 0; t < trace.games.size(); ++t)
            std::cout << t << "," << trace.games[t] << "," << point_string(trace.states[t])
                      << "\n";
        if (behavior) {
            std::cout << "# behavior: " << behavior->to_string() << "\n";
            std::cout << "# transient: " << behavior->transient_length << "\n";
            std::cout << "# final: " << point_string(trace.states.back()) << "\n";
        } else {
            std::cout << "# behavior: undetected\n";
        }
    }
    return behavior ? 0 : 3;
}

int cmd_classify(const CommonFlags& common) {
    Params params = make_params(common);
    Classification cls = classify(params);
    if (cls.regime == Classification::Regime::GASEquilibrium) {
        auto pi_frac = rational_pi_string(common.rho);
        std::string pi = pi_frac ? *pi_frac : point_string(spectral(params).pi, 30);
        std::cout << "GAS-equilibrium pi=(" << pi << ")\n";
        return 0;
    }
    std::cout << "limit-cycles cycles=" << cycles_string(cls.cycles)
              << " unstable-equilibrium=" << (cls.unstable_equilibrium ? "true" : "false")
              << " band=" << cls.band;
    if (cls.region12) std::cout << " region12=" << *cls.region12;
    std::cout << "\n";
    return 0;
}

int cmd_boundary(const CommonFlags& common, const std::string& curve_text, int digits) {
    CurveSpec curve = parse_curve(curve_text);
    Real rho = Real::from_string(common.rho, std::max(common.bits, 64 + 5L * digits));
    BoundaryRoot root = boundary_root(curve, rho, digits, common.bits);
    std::cout << curve.name() << " truncated=" << root.truncated << " rounded=" << root.rounded
              << "\n";
    return 0;
}

int cmd_table2(int digits, long bits) {
    Real rho = Real::from_ratio(1, 3, std::max(bits, 64 + 5L * digits));
    for (const auto& row : critical_table(rho, digits, bits))
        std::cout << row.curve.name() << " " << row.root.truncated << "\n";
    return 0;
}

int cmd_regionmap(const std::string& rho_range, const std::string& phi_range, long bits,
                  unsigned threads, const std::string& format) {
    Range rr = parse_range(rho_range, bits);
    Range pr = parse_range(phi_range, bits);
    const long total = rr.steps * pr.steps;
    struct Row {
        std::string rho, phi, regime, cycles, region;
    };
    std::vector<Row> rows(static_cast<std::size_t>(total));

    parallel_for(static_cast<std::size_t>(total), [&](std::size_t idx) {
        long i = static_cast<long>(idx) / pr.steps;
        long j = static_cast<long>(idx) % pr.steps;
        Real rho = range_value(rr, i);
        Real phi = range_value(pr, j);
        Row row{rho.to_string(20), phi.to_string(20), "", "", ""};
        try {
            Params params(rho, phi, config_for_bits(bits));
            Classification cls = classify(params);
            if (cls.regime == Classification::Regime::GASEquilibrium) {
                row.regime = "gas";
            } else {
                row.regime = "cycles";
                row.cycles = cycles_string(cls.cycles);
                if (cls.region12) row.region = std::to_string(*cls.region12);
            }
        } catch (const Error& e) {
            row.regime = std::string("error:") + e.what();
        }
        rows[idx] = std::move(row);
    }, threads);

    if (format == "json") {
        json out = json::array();
        for (const auto& r : rows)
            out.push_back({{"rho", r.rho},
                           {"phi", r.phi},
                           {"regime", r.regime},
                           {"cycles", r.cycles},
                           {"region12", r.region}});
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "rho,phi,regime,cycles,region12\n";
        for (const auto& r : rows)
            std::cout << r.rho << "," << r.phi << "," << r.regime << "," << r.cycles << ","
                      << r.region << "\n";
    }
    return 0;
}

int cmd_profit(const CommonFlags& common) {
    Params params = make_params(common);
    Classification cls = classify(params);
    if (cls.regime == Classification::Regime::GASEquilibrium) {
        Real mu = mu_b_forever(params);
        std::cout << "mu=" << mu.to_string() << "\n";
        return 0;
    }
    for (const auto& pattern : cls.cycles) {
        Real mu = pattern.kind == GamePattern::Kind::OneN
                      ? mu_cycle_1n(pattern.n, params)
                      : mu_cycle_1n1nm2(pattern.n, params);
        std::cout << "mu" << pattern.to_string() << "=" << mu.to_string(30) << "\n";
    }
    return 0;
}

int cmd_sweep(const std::vector<std::string>& rhos, const std::vector<std::string>& phis,
              long starts, long budget, std::uint64_t seed, long bits,
              const std::string& format, unsigned threads) {
    std::vector<Params> grid;
    for (const auto& r : rhos)
        for (const auto& p : phis) grid.push_back(Params::from_strings(r, p, config_for_bits(bits)));
    if (grid.empty()) throw CLI::ValidationError("--rho/--phi", "empty grid");

    SweepSummary summary = sweep(grid, starts, budget, seed, threads);

    if (format == "json") {
        json points = json::array();
        for (const auto& p : summary.points) {
            json details = json::array();
            for (const auto& d : p.details)
                details.push_back({{"start_index", d.start_index},
                                   {"start", point_string(d.start)},
                                   {"expected", d.expected},
                                   {"found", d.found}});
            points.push_back({{"rho", p.rho},
                              {"phi", p.phi},
                              {"expected", p.expected},
                              {"agreements", p.agreements},
                              {"disagreements", p.disagreements},
                              {"undetected", p.undetected},
                              {"details", std::move(details)}});
        }
        json out{{"seed", summary.seed},
                 {"agreements", summary.agreements},
                 {"disagreements", summary.disagreements},
                 {"undetected", summary.undetected},
                 {"points", std::move(points)}};
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& p : summary.points) {
            std::cout << "point rho=" << p.rho << " phi=" << p.phi << " expected=\"" << p.expected
                      << "\" agree=" << p.agreements << " disagree=" << p.disagreements
                      << " undetected=" << p.undetected << "\n";
            for (const auto& d : p.details)
                std::cout << "  finding start#" << d.start_index << " ("
                          << point_string(d.start, 25) << ") found=" << d.found << "\n";
        }
        std::cout << "total agree=" << summary.agreements
                  << " disagree=" << summary.disagreements
                  << " undetected=" << summary.undetected << " seed=" << summary.seed << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Greedy collective Parrondo games: simulation, classification, verification"};
    app.require_subcommand(1);

    CommonFlags common;

    auto* sim = app.add_subcommand("simulate", "iterate the greedy map and detect the behavior");
    std::string x0_text, x1_text, sim_format = "csv";
    long sim_steps = 10000, trailing_b = 64;
    sim->add_option("--rho", common.rho, "rho in (0,1), decimal or a/b")->required();
    sim->add_option("--phi", common.phi, "phi in (0,1], decimal or a/b")->required();
    sim->add_option("--x0", x0_text, "start fraction with capital = 0 mod 3")->required();
    sim->add_option("--x1", x1_text, "start fraction with capital = 1 mod 3")->required();
    sim->add_option("--steps", sim_steps, "detection budget");
    sim->add_option("--bits", common.bits, "mantissa bits");
    sim->add_option("--format", sim_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--trailing-b", trailing_b, "B letters required for the equilibrium call");

    auto* cls = app.add_subcommand("classify", "analytic behavior prediction at (rho, phi)");
    cls->add_option("--rho", common.rho)->required();
    cls->add_option("--phi", common.phi)->required();
    cls->add_option("--bits", common.bits);

    auto* bnd = app.add_subcommand("boundary", "phi-root of a boundary curve at fixed rho");
    std::string curve_text;
    int digits = 18;
    bnd->add_option("--rho", common.rho)->required();
    bnd->add_option("--curve", curve_text, "G:n:m | E:n | E:n:m | H:n:m | b:n")->required();
    bnd->add_option("--digits", digits, "certified decimal places (truncated)");
    bnd->add_option("--bits", common.bits);

    auto* tbl = app.add_subcommand("table2", "the nine critical phi values at rho = 1/3");
    int tbl_digits = 18;
    long tbl_bits = 256;
    tbl->add_option("--digits", tbl_digits);
    tbl->add_option("--bits", tbl_bits);

    auto* rmap = app.add_subcommand("regionmap", "CSV/JSON map of regime/cycles over a grid");
    std::string rho_range, phi_range, rmap_format = "csv";
    unsigned threads = 0;
    long rmap_bits = 256;
    rmap->add_option("--rho-range", rho_range, "a:b:steps")->required();
    rmap->add_option("--phi-range", phi_range, "a:b:steps")->required();
    rmap->add_option("--bits", rmap_bits);
    rmap->add_option("--threads", threads, "0 = hardware");
    rmap->add_option("--format", rmap_format)->check(CLI::IsMember({"csv", "json"}));

    auto* prf = app.add_subcommand("profit", "closed-form per-turn profit at (rho, phi)");
    prf->add_option("--rho", common.rho)->required();
    prf->add_option("--phi", common.phi)->required();
    prf->add_option("--bits", common.bits);

    auto* swp = app.add_subcommand("sweep", "random-start simulation vs analytic prediction");
    std::vector<std::string> sweep_rhos, sweep_phis;
    long starts = 100, budget = 10000;
    std::uint64_t seed = 0;
    std::string sweep_format = "text";
    long sweep_bits = 256;
    unsigned sweep_threads = 0;
    swp->add_option("--rho", sweep_rhos, "rho values (repeatable)")->required();
    swp->add_option("--phi", sweep_phis, "phi values (repeatable)")->required();
    swp->add_option("--starts", starts, "random starts per grid point");
    swp->add_option("--budget", budget, "detection budget per start");
    swp->add_option("--seed", seed);
    swp->add_option("--bits", sweep_bits);
    swp->add_option("--format", sweep_format)->check(CLI::IsMember({"text", "json"}));
    swp->add_option("--threads", sweep_threads, "0 = hardware");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(common, x0_text, x1_text, sim_steps, sim_format, trailing_b);
        if (cls->parsed()) return cmd_classify(common);
        if (bnd->parsed()) return cmd_boundary(common, curve_text, digits);
        if (tbl->parsed()) return cmd_table2(tbl_digits, tbl_bits);
        if (rmap->parsed())
            return cmd_regionmap(rho_range, phi_range, rmap_bits, threads, rmap_format);
        if (prf->parsed()) return cmd_profit(common);
        if (swp->parsed())
            return cmd_sweep(sweep_rhos, sweep_phis, starts, budget, seed, sweep_bits,
                             sweep_format, sweep_threads);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const DegenerateSpectrumError& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 2;
    } catch (const BoundaryAmbiguousError& e) {
        std::cerr << "boundary undecidable: " << e.what() << "\n";
        return 4;
    } catch (const NoSignChangeError& e) {
        std::cerr << "boundary undecidable: " << e.what() << "\n";
        return 4;
    } catch (const PredicateAmbiguousError& e) {
        std::cerr << "boundary undecidable: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
