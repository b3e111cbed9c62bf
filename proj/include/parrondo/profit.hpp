#pragma once

// Asymptotic cumulative average profit per turn.
//
// A turn in which game B is played by the fraction phi of the population
// has expected average profit phi * [x0 (2 p0 - 1) + (1 - x0)(2 p1 - 1)];
// a game-A turn contributes 0. Game B is fair at the stationary point, so
// the B-forever regime earns nothing, while every limit cycle earns a
// strictly positive per-turn average.

#include <utility>
#include <vector>

#include "parrondo/classifier.hpp"
#include "parrondo/dynamics.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/model.hpp"

namespace parrondo {

/// Per-state payoff column (2 p0 - 1, 2 p1 - 1, 2 p1 - 1).
inline Vec3 profit_vector(const Params& params) {
    auto [p0, p1] = win_probabilities(params);
    Real good = 2 * p1 - 1;
    return Vec3(2 * p0 - 1, good, good);
}

/// Expected profit of one played-by-everyone B turn at state x.
inline Real b_turn_profit(const SimplexPoint& x, const Real& p0, const Real& p1) {
    return x.x0 * (2 * p0 - 1) + (1 - x.x0) * (2 * p1 - 1);
}

/// Profit of the B-forever regime: exactly zero. The identity phi*pi*zeta = 0
/// is recomputed and asserted to vanish at working precision.
inline Real mu_b_forever(const Params& params) {
    const SpectralData& sd = spectral(params);
    Real residue = params.phi() * dot(sd.pi.to_vec(), profit_vector(params));
    if (abs(residue) > Real::pow2(-params.bits() + 32, params.bits()))
        throw NumericError("stationary profit identity failed to vanish");
    return Real(params.bits());
}

namespace detail {

inline void require_one_n_cycle(int n, const Params& params) {
    if (n < 2 || n % 2 != 0) throw BadIndexError("[1,n] needs even n >= 2");
    if (cycle_fn_sign(CycleFn::E, n, n, params) == Sign::Negative)
        throw NotACycleError("[1," + std::to_string(n) + "] does not exist here (E_n < 0)");
    if (n >= 4 && cycle_fn_sign(CycleFn::Em, n, n - 2, params) != Sign::Negative)
        throw NotACycleError("[1," + std::to_string(n) +
                             "] does not exist here (E_{n,n-2} >= 0)");
}

inline void require_one_n_one_nm2_cycle(int n, const Params& params) {
    if (n < 4 || n % 2 != 0) throw BadIndexError("[1,n,1,n-2] needs even n >= 4");
    if (cycle_fn_sign(CycleFn::G, n, n - 2, params) != Sign::Negative)
        throw NotACycleError("[1," + std::to_string(n) + ",1," + std::to_string(n - 2) +
                             "] does not exist here (G_{n,n-2} >= 0)");
    if (cycle_fn_sign(CycleFn::H, n, n - 2, params) == Sign::Negative)
        throw NotACycleError("[1," + std::to_string(n) + ",1," + std::to_string(n - 2) +
                             "] does not exist here (H_{n,n-2} < 0)");
}

} // namespace detail

/// Closed-form profit of the [1,n] cycle through the E_{n,m}/D_n sums.
inline Real mu_cycle_1n(int n, const Params& params) {
    detail::require_one_n_cycle(n, params);
    auto [p0, p1] = win_probabilities(params);
    auto ctx = detail::cycle_ctx(params);
    Real dn = detail::eval_d_n(ctx, n);
    Real acc = Real(params.bits());
    for (int m = 0; m < n; ++m) acc += detail::eval_e_nm(ctx, n, m);
    return 2 * params.phi() / (n + 1) * (p0 - p1) * acc / dn;
}

/// The same profit from the matrix form
/// phi/(n+1) * pi_[1,n] P_A (I + P_B + ... + P_B^{n-1}) zeta.
inline Real mu_cycle_1n_matrix(int n, const Params& params) {
    detail::require_one_n_cycle(n, params);
    auto [pa, pb] = build_matrices(params);
    SimplexPoint start = cycle_stationary(GamePattern::one_n(n), params);
    Mat3 acc = Mat3::identity(params.bits());
    Mat3 pow = Mat3::identity(params.bits());
    for (int m = 1; m < n; ++m) {
        pow = pow * pb;
        acc = acc + pow;
    }
    Vec3 weights = (start.to_vec() * pa) * acc;
    return params.phi() / (n + 1) * dot(weights, profit_vector(params));
}

/// Closed-form profit of the [1,n,1,n-2] cycle through G/H sums over I_n.
inline Real mu_cycle_1n1nm2(int n, const Params& params) {
    detail::require_one_n_one_nm2_cycle(n, params);
    auto [p0, p1] = win_probabilities(params);
    auto ctx = detail::cycle_ctx(params);
    Real in = detail::eval_i_n(ctx, n);
    Real acc = Real(params.bits());
    for (int m = 0; m < n; ++m) acc += detail::eval_g_nm(ctx, n, m);
    for (int m = 0; m <= n - 3; ++m) acc += detail::eval_h_nm(ctx, n, m);
    return params.phi() / n * (p0 - p1) * acc / in;
}

/// Matrix form of the [1,n,1,n-2] profit:
/// phi/(2n) * pi [P_A (I+..+P_B^{n-1}) + P_A P_B^n P_A (I+..+P_B^{n-3})] zeta.
inline Real mu_cycle_1n1nm2_matrix(int n, const Params& params) {
    detail::require_one_n_one_nm2_cycle(n, params);
    auto [pa, pb] = build_matrices(params);
    long bits = params.bits();
    SimplexPoint start = cycle_stationary(GamePattern::one_n_one_nm2(n), params);

    Mat3 acc_long = Mat3::identity(bits);
    Mat3 acc_short = Mat3::identity(bits);
    Mat3 pow = Mat3::identity(bits);
    for (int m = 1; m < n; ++m) {
        pow = pow * pb;
        acc_long = acc_long + pow;
        if (m <= n - 3) acc_short = acc_short + pow;
    }
    Mat3 bn = power_b(params, n);
    Mat3 combined = pa * acc_long + pa * bn * pa * acc_short;
    Vec3 weights = start.to_vec() * combined;
    return params.phi() / (2 * n) * dot(weights, profit_vector(params));
}

/// Per-turn Cesaro average profit of a recorded trajectory. A-turns
/// contribute zero; B-turns contribute phi times the expected profit at the
/// pre-move state.
inline Real empirical_profit(const Trajectory& traj) {
    if (traj.games.empty()) throw BadIndexError("empty trajectory");
    auto [p0, p1] = win_probabilities(traj.params);
    const Real& phi = traj.params.phi();
    Real acc = Real(traj.params.bits());
    for (std::size_t t = 0; t < traj.games.size(); ++t)
        if (traj.games[t] == 'B') acc += phi * b_turn_profit(traj.states[t], p0, p1);
    return acc / static_cast<long>(traj.games.size());
}

} // namespace parrondo
