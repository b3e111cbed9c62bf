#pragma once

// Brute-force cross-validation of the analytic predictions.
//
// Every closed-form claim (which cycles exist, where the equilibrium
// attracts) is checked against direct greedy simulation. Disagreements are
// first-class results: in the conjectured parts of the parameter plane they
// would be findings, not failures.

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "parrondo/classifier.hpp"
#include "parrondo/dynamics.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/model.hpp"

namespace parrondo {

/// Runs body(i) for i in [0, n) across hardware threads. Each index is an
/// independent work item; callers collect results by index, so the outcome
/// is deterministic regardless of scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned max_threads = 0) {
    unsigned hw = max_threads != 0 ? max_threads : std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    hw = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    if (hw <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(hw);
    for (unsigned w = 0; w < hw; ++w)
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& t : workers) t.join();
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Deterministic uniform sample on the simplex: the k-th start of grid point
/// `point_index` under `seed`, via sorted uniform gaps.
inline SimplexPoint random_simplex_point(std::uint64_t seed, std::uint64_t point_index,
                                         std::uint64_t k, long bits) {
    std::uint64_t base = detail::splitmix64(seed ^ detail::splitmix64(point_index + 1));
    double u = detail::unit_double(detail::splitmix64(base + 2 * k));
    double v = detail::unit_double(detail::splitmix64(base + 2 * k + 1));
    if (u > v) std::swap(u, v);
    Real a = Real::from_double(u, bits);
    Real b = Real::from_double(v, bits);
    return SimplexPoint{a, b - a, 1 - b};
}

/// Report of one stationary-start replay.
struct CycleVerification {
    GamePattern pattern;
    SimplexPoint start;
    long period;
};

/// Starts the greedy map exactly at the stationary state of a predicted
/// cycle and checks that the trajectory locks into that cycle immediately
/// (transient 0) with matching period states.
inline CycleVerification verify_cycle_from_stationary(const Params& params,
                                                      const GamePattern& pattern,
                                                      long budget = 10000) {
    Classification cls = classify(params);
    if (!cls.has_cycle(pattern))
        throw NotACycleError("pattern " + pattern.to_string() + " is not predicted at these parameters");

    SimplexPoint start = cycle_stationary(pattern, params);
    DetectedBehavior got = detect(start, params, budget);
    if (got.kind != DetectedBehavior::Kind::Cycle)
        throw MismatchError("expected cycle " + pattern.to_string() + ", found equilibrium", 0);
    if (!(got.pattern == pattern))
        throw MismatchError("expected cycle " + pattern.to_string() + ", detected " +
                                got.pattern.to_string(),
                            got.transient_length);
    if (got.transient_length != 0)
        throw MismatchError("stationary start should have no transient", got.transient_length);

    // the replayed period must pass through the stationary start
    const Real eps = params.cycle_eps();
    bool hits_start = false;
    for (const auto& st : got.cycle_states)
        if (linf_dist(st, start) < eps) {
            hits_start = true;
            break;
        }
    if (!hits_start) throw MismatchError("cycle does not pass through its stationary state", 0);
    return CycleVerification{pattern, std::move(start), pattern.period()};
}

/// One simulated start that did not match the analytic prediction.
struct Disagreement {
    std::size_t point_index;
    std::uint64_t start_index;
    SimplexPoint start;
    std::string expected;
    std::string found; // detected behavior, or "undetected"
};

struct SweepPointResult {
    std::string rho, phi;
    std::string expected;
    long agreements = 0;
    long disagreements = 0;
    long undetected = 0;
    std::vector<Disagreement> details;
};

struct SweepSummary {
    std::vector<SweepPointResult> points;
    long agreements = 0;
    long disagreements = 0;
    long undetected = 0;
    std::uint64_t seed = 0;

    bool clean() const { return disagreements == 0 && undetected == 0; }
};

/// Runs `starts_per_point` random starts at every grid point and compares
/// the detected behavior against classify. Grid points run concurrently;
/// identical seed and grid give identical summaries.
inline SweepSummary sweep(const std::vector<Params>& grid, long starts_per_point, long budget,
                          std::uint64_t seed, unsigned max_threads = 0) {
    SweepSummary summary;
    summary.seed = seed;
    summary.points.resize(grid.size());

    parallel_for(grid.size(), [&](std::size_t gi) {
        const Params& params = grid[gi];
        SweepPointResult res;
        res.rho = params.rho_text().empty() ? params.rho().to_string(30) : params.rho_text();
        res.phi = params.phi_text().empty() ? params.phi().to_string(30) : params.phi_text();

        Classification cls = classify(params);
        if (cls.regime == Classification::Regime::GASEquilibrium) {
            res.expected = "B-forever equilibrium";
        } else {
            res.expected = "cycle in {";
            for (std::size_t i = 0; i < cls.cycles.size(); ++i) {
                if (i != 0) res.expected += ", ";
                res.expected += cls.cycles[i].to_string();
            }
            res.expected += "}";
        }

        for (long k = 0; k < starts_per_point; ++k) {
            SimplexPoint start = random_simplex_point(seed, gi, static_cast<std::uint64_t>(k),
                                                      params.bits());
            std::string found;
            bool agree = false;
            bool detected = true;
            try {
                DetectedBehavior got = detect(start, params, budget);
                found = got.to_string();
                if (cls.regime == Classification::Regime::GASEquilibrium)
                    agree = got.kind == DetectedBehavior::Kind::BForeverEquilibrium;
                else
                    agree = got.kind == DetectedBehavior::Kind::Cycle &&
                            cls.has_cycle(got.pattern);
            } catch (const UndetectedError&) {
                found = "undetected";
                detected = false;
            }
            if (agree) {
                ++res.agreements;
            } else if (!detected) {
                ++res.undetected;
                res.details.push_back(Disagreement{gi, static_cast<std::uint64_t>(k), start,
                                                   res.expected, found});
            } else {
                ++res.disagreements;
                res.details.push_back(Disagreement{gi, static_cast<std::uint64_t>(k), start,
                                                   res.expected, found});
            }
        }
        summary.points[gi] = std::move(res);
    }, max_threads);

    for (const auto& p : summary.points) {
        summary.agreements += p.agreements;
        summary.disagreements += p.disagreements;
        summary.undetected += p.undetected;
    }
    return summary;
}

} // namespace parrondo
