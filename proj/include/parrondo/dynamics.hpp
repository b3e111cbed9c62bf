#pragma once

// The greedy map and its asymptotics.
//
// At each turn the population plays game A if x0 >= pi0 and game B
// otherwise (a tie counts as A: both games then have zero expected profit
// and A is preferred). Iterating this piecewise-linear map either settles
// into the stationary point of game B with B played forever, or locks into
// a periodic game pattern [1,n] / [1,n,1,n-2].

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parrondo/errors.hpp"
#include "parrondo/model.hpp"

namespace parrondo {

/// Symbolic description of an asymptotic game pattern.
struct GamePattern {
    enum class Kind { BForever, OneN, OneNOneNm2 };
    Kind kind;
    int n = 0; // cycle index for OneN (n >= 2 even) and OneNOneNm2 (n >= 4 even)

    static GamePattern b_forever() { return {Kind::BForever, 0}; }
    static GamePattern one_n(int n) {
        if (n < 2 || n % 2 != 0) throw BadIndexError("[1,n] needs even n >= 2");
        return {Kind::OneN, n};
    }
    static GamePattern one_n_one_nm2(int n) {
        if (n < 4 || n % 2 != 0) throw BadIndexError("[1,n,1,n-2] needs even n >= 4");
        return {Kind::OneNOneNm2, n};
    }

    int period() const {
        switch (kind) {
            case Kind::BForever: return 0;
            case Kind::OneN: return n + 1;
            case Kind::OneNOneNm2: return 2 * n;
        }
        return 0;
    }

    std::string to_string() const {
        switch (kind) {
            case Kind::BForever: return "B-forever";
            case Kind::OneN: return "[1," + std::to_string(n) + "]";
            case Kind::OneNOneNm2:
                return "[1," + std::to_string(n) + ",1," + std::to_string(n - 2) + "]";
        }
        return "?";
    }

    friend bool operator==(const GamePattern& a, const GamePattern& b) {
        return a.kind == b.kind && a.n == b.n;
    }
    friend bool operator!=(const GamePattern& a, const GamePattern& b) { return !(a == b); }
};

/// A finite orbit of the greedy map. states has one more entry than games;
/// games[t] is the letter played when moving states[t] -> states[t+1].
struct Trajectory {
    std::vector<SimplexPoint> states;
    std::string games;
    Params params;
};

/// What a trajectory settled into.
struct DetectedBehavior {
    enum class Kind { BForeverEquilibrium, Cycle };
    Kind kind;
    GamePattern pattern;
    long transient_length = 0;
    std::vector<SimplexPoint> cycle_states; // one period, starting at an A-state

    std::string to_string() const {
        if (kind == Kind::BForeverEquilibrium) return "B-forever equilibrium";
        return "cycle " + pattern.to_string();
    }
};

struct DetectOptions {
    long trailing_b = 64; // consecutive B letters required for the equilibrium call
};

namespace detail {

inline char greedy_letter(const SimplexPoint& x, const SimplexPoint& pi) {
    return (x.x0 >= pi.x0) ? 'A' : 'B';
}

inline SimplexPoint advance(const SimplexPoint& x, const Mat3& m) {
    Vec3 y = x.to_vec() * m;
    Real s = y.sum();
    return SimplexPoint{y[0] / s, y[1] / s, y[2] / s};
}

/// Reads the letter block of one period as a cyclic word; returns the
/// matching pattern, if any, together with the in-block offset of the A that
/// starts the canonical spelling.
inline std::optional<std::pair<GamePattern, long>> recognize_block(const std::string& letters,
                                                                   long begin, long p) {
    long a_count = 0;
    long a1 = -1, a2 = -1;
    for (long j = 0; j < p; ++j) {
        if (letters[static_cast<std::size_t>(begin + j)] == 'A') {
            ++a_count;
            if (a1 < 0)
                a1 = j;
            else if (a2 < 0)
                a2 = j;
        }
    }
    if (a_count == 1) {
        long n = p - 1;
        if (n >= 2 && n % 2 == 0)
            return std::make_pair(GamePattern::one_n(static_cast<int>(n)), a1);
        return std::nullopt;
    }
    if (a_count == 2) {
        long run1 = a2 - a1 - 1;      // B run after the first A
        long run2 = p - (a2 - a1) - 1; // B run after the second A (wraps)
        long nbig = std::max(run1, run2);
        long nsmall = std::min(run1, run2);
        if (nbig >= 4 && nbig % 2 == 0 && nsmall == nbig - 2)
            return std::make_pair(GamePattern::one_n_one_nm2(static_cast<int>(nbig)),
                                  run1 == nbig ? a1 : a2);
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace detail

/// One greedy turn: the letter chosen at x and the renormalized image.
inline std::pair<SimplexPoint, char> step(const SimplexPoint& x, const Params& params) {
    auto [pa, pb] = build_matrices(params);
    const SimplexPoint& pi = spectral(params).pi;
    char letter = detail::greedy_letter(x, pi);
    return {detail::advance(x, letter == 'A' ? pa : pb), letter};
}

/// Runs the greedy map for max_steps turns, recording states and letters.
inline Trajectory iterate(const SimplexPoint& start, const Params& params, long max_steps) {
    if (max_steps < 1) throw BadIndexError("max_steps must be >= 1");
    auto [pa, pb] = build_matrices(params);
    const SimplexPoint& pi = spectral(params).pi;
    Trajectory traj{{start}, {}, params};
    traj.states.reserve(static_cast<std::size_t>(max_steps) + 1);
    for (long t = 0; t < max_steps; ++t) {
        const SimplexPoint& x = traj.states.back();
        char letter = detail::greedy_letter(x, pi);
        traj.games.push_back(letter);
        traj.states.push_back(detail::advance(x, letter == 'A' ? pa : pb));
    }
    return traj;
}

/// Coefficients (c1, c2) of the two-eigenvalue decay
/// pi0 - pi0(n) = c1 e1^n - c2 e2^n for pure game-B iteration started at x.
inline std::pair<Real, Real> decay_coefficients(const SimplexPoint& x, const Params& params) {
    const SpectralData& sd = spectral(params);
    Real one_p_rho2 = 1 + params.rho() * params.rho();
    Real ratio = sd.s / one_p_rho2;
    Real front = one_p_rho2 / (2 * sd.s);
    Real dx0 = x.x0 - sd.pi.x0;
    Real dx1 = x.x1 - sd.pi.x1;
    Real c1 = front * ((1 - ratio) * dx0 + 2 * dx1);
    Real c2 = front * ((1 + ratio) * dx0 + 2 * dx1);
    return {std::move(c1), std::move(c2)};
}

/// Iterates until the trajectory certifies an equilibrium or a limit cycle.
///
/// Equilibrium: the last trailing_b letters are all B and the state is
/// within cycle_eps of pi. When |e2| > |e1| (the unstable-equilibrium
/// regime above 2/3), closeness to pi is not enough: the pure-B map still
/// contracts toward pi, so an orbit can hug pi for dozens of turns and
/// leave afterwards. There the declaration additionally requires that the
/// alternating component of the current state, c2 e2^n, cannot outgrow the
/// c1 e1^n part within the remaining budget.
///
/// Cycle: two consecutive identical letter periods of length p <= budget/4,
/// states matching within cycle_eps across one period, and a letter block
/// of the form [1,n] or [1,n,1,n-2].
///
/// If `trace` is nonnull it receives the trajectory walked so far.
inline DetectedBehavior detect(const SimplexPoint& start, const Params& params,
                               long budget = 10000, const DetectOptions& opts = {},
                               Trajectory* trace = nullptr) {
    if (budget < 1) throw BadIndexError("budget must be >= 1");
    auto [pa, pb] = build_matrices(params);
    const SpectralData& sd = spectral(params);
    const Real cyc_eps = params.cycle_eps();
    const long max_period = std::max<long>(1, budget / 4);

    std::vector<SimplexPoint> states{start};
    states.reserve(static_cast<std::size_t>(budget) + 1);
    std::string letters;
    std::vector<long> a_at;       // positions of A letters
    long last_a = -1;

    auto publish_trace = [&]() {
        if (trace != nullptr) *trace = Trajectory{states, letters, params};
    };

    auto finish_cycle = [&](long period) -> DetectedBehavior {
        const long total = static_cast<long>(letters.size());
        // earliest index from which the period-p recurrence already holds
        long from = total - 2 * period;
        while (from > 0) {
            long u = from - 1;
            if (letters[static_cast<std::size_t>(u)] !=
                letters[static_cast<std::size_t>(u + period)])
                break;
            if (!(linf_dist(states[static_cast<std::size_t>(u)],
                            states[static_cast<std::size_t>(u + period)]) < cyc_eps))
                break;
            from = u;
        }
        auto match = detail::recognize_block(letters, total - period, period);
        // anchor one period at the canonical A inside the periodic tail
        long canon = total - period + match->second;
        while (canon - period >= from) canon -= period;
        std::vector<SimplexPoint> one_period;
        one_period.reserve(static_cast<std::size_t>(period));
        for (long j = 0; j < period; ++j)
            one_period.push_back(states[static_cast<std::size_t>(canon + j)]);
        publish_trace();
        return DetectedBehavior{DetectedBehavior::Kind::Cycle, match->first, from,
                                std::move(one_period)};
    };

    for (long t = 0; t < budget; ++t) {
        const SimplexPoint& x = states.back();
        char letter = detail::greedy_letter(x, sd.pi);
        letters.push_back(letter);
        states.push_back(detail::advance(x, letter == 'A' ? pa : pb));
        const long total = t + 1;
        if (letter == 'A') {
            a_at.push_back(t);
            last_a = t;
        }

        // equilibrium test; the state must sit strictly on the B side — an
        // orbit that rounds exactly onto pi plays A next (the tie rule), so
        // it is not a B-forever orbit
        if (total - (last_a + 1) >= opts.trailing_b && states.back().x0 < sd.pi.x0 &&
            linf_dist(states.back(), sd.pi) < cyc_eps) {
            bool settled;
            double r = std::abs(sd.e2.to_double()) / std::max(std::abs(sd.e1.to_double()), 1e-300);
            if (r <= 1.0) {
                settled = true; // the pure-B orbit can never re-cross x0 = pi0
            } else {
                auto [c1x, c2x] = decay_coefficients(states.back(), params);
                if (c2x.is_zero()) {
                    settled = true; // on the feeder line at this precision
                } else if (c1x.sign_raw() <= 0) {
                    settled = false; // no margin left: the escape is imminent
                } else {
                    // escape once |c2| |e2|^m catches up with c1 e1^m
                    double m = (c1x.log2_magnitude() - c2x.log2_magnitude() - 2) / std::log2(r);
                    settled = total + static_cast<long>(std::max(0.0, m)) > budget;
                }
            }
            if (settled) {
                publish_trace();
                return DetectedBehavior{DetectedBehavior::Kind::BForeverEquilibrium,
                                        GamePattern::b_forever(), last_a + 1, {}};
            }
        }

        // cycle test, anchored when the newest letter is an A
        if (letter == 'A' && a_at.size() >= 2) {
            const long k = static_cast<long>(a_at.size());
            long candidates[2] = {t - a_at[static_cast<std::size_t>(k - 2)], 0};
            long n_cand = 1;
            if (k >= 3) {
                long p2 = t - a_at[static_cast<std::size_t>(k - 3)];
                if (p2 != candidates[0]) candidates[n_cand++] = p2;
            }
            for (long ci = 0; ci < n_cand; ++ci) {
                const long p = candidates[ci];
                if (p < 1 || p > max_period || 2 * p > total) continue;
                bool letters_ok = true;
                for (long j = 0; j < p && letters_ok; ++j)
                    letters_ok = letters[static_cast<std::size_t>(total - p + j)] ==
                                 letters[static_cast<std::size_t>(total - 2 * p + j)];
                if (!letters_ok) continue;
                bool states_ok = true;
                for (long j = 0; j <= p && states_ok; ++j)
                    states_ok = linf_dist(states[static_cast<std::size_t>(total - p + j)],
                                          states[static_cast<std::size_t>(total - 2 * p + j)]) <
                                cyc_eps;
                if (!states_ok) continue;
                if (!detail::recognize_block(letters, total - p, p)) continue;
                return finish_cycle(p);
            }
        }
    }
    publish_trace();
    throw UndetectedError("no equilibrium or recognizable cycle within " +
                          std::to_string(budget) + " steps; raise the budget or precision");
}

/// Result of the B-forever membership test, tagging which of the seven
/// phi-regimes applied.
struct BForeverMembership {
    bool member;
    int case_tag; // 1..7
};

/// Whether x (in the B-side of the simplex) starts a B-forever orbit.
///
/// The deciding set depends on where phi falls relative to phi1, 2/3 and
/// phi2. Between 2/3 and phi2 the set is a line, so membership there is a
/// band test against compare_eps. At and above phi2 the set is empty.
inline BForeverMembership in_b_forever(const SimplexPoint& x, const Params& params) {
    const SpectralData& sd = spectral(params);
    if (x.x0 >= sd.pi.x0) throw NotInDeltaBError("state has x0 >= pi0");

    const long bits = params.bits();
    const Real band = sign_band(bits);
    const Real& phi = params.phi();
    Real two_thirds = Real::from_ratio(2, 3, bits);

    Sign vs_phi1 = certified_sign(phi - sd.phi1, band);
    Sign vs_23 = certified_sign(phi - two_thirds, band);
    Sign vs_phi2 = certified_sign(phi - sd.phi2, band);

    Real dx0 = x.x0 - sd.pi.x0;
    Real dx1 = x.x1 - sd.pi.x1;
    Real ratio = sd.s / (1 + params.rho() * params.rho());

    if (vs_phi2 != Sign::Negative) {
        // the set is empty at and above phi2
        return {false, vs_phi2 == Sign::Positive ? 7 : 6};
    }
    if (vs_23 == Sign::Positive) {
        // line case: |(1 + S/(1+rho^2)) dx0 + 2 dx1| within the membership band
        Real expr = (1 + ratio) * dx0 + 2 * dx1;
        return {abs(expr) < params.compare_eps(), 5};
    }
    if (vs_23 == Sign::ZeroAmbiguous) {
        Real expr = dx0 + 2 * dx1;
        return {certified_sign(expr, band) == Sign::Positive, 4};
    }
    if (vs_phi1 == Sign::Positive) {
        Real coeff = 1 + (3 * phi - 2) * (1 + params.rho()) / (phi * (1 - params.rho()));
        Real expr = coeff * dx0 + 2 * dx1;
        return {certified_sign(expr, band) == Sign::Positive, 3};
    }
    Real expr = (1 - ratio) * dx0 + 2 * dx1;
    if (vs_phi1 == Sign::ZeroAmbiguous)
        return {certified_sign(expr, band) == Sign::Positive, 2};
    // below phi1 the set is closed, so the boundary counts as inside
    return {certified_sign(expr, band) != Sign::Negative, 1};
}

} // namespace parrondo
