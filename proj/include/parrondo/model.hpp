#pragma once

// Game parameters, transition matrices, stationary distributions, and the
// spectral decomposition of the game-B chain.
//
// The model is the three-state chain of capital residues mod 3. Playing the
// full game B moves a player by the matrix
//
//     PB0 = ( 0      p0     1-p0 )
//           ( 1-p1   0      p1   )
//           ( p1     1-p1   0    ),
//
// with p0 = rho^2/(1+rho^2) and p1 = 1/(1+rho); game A is the same matrix at
// rho = 1 (fair coin). When only a fraction phi of the population plays, the
// one-turn matrices are the convex mixtures P = (1-phi) I + phi P0.

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "parrondo/errors.hpp"
#include "parrondo/linalg.hpp"
#include "parrondo/real.hpp"

namespace parrondo {

using TransitionMatrix = Mat3;

/// A population state: fractions of players whose capital is 0, 1, 2 mod 3.
struct SimplexPoint {
    Real x0, x1, x2;

    Vec3 to_vec() const { return Vec3(x0, x1, x2); }
    static SimplexPoint from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }

    Real sum() const { return x0 + x1 + x2; }

    /// Rescales so the coordinates sum to exactly-rounded 1.
    SimplexPoint normalized() const {
        Real s = sum();
        return {x0 / s, x1 / s, x2 / s};
    }

    friend Real linf_dist(const SimplexPoint& a, const SimplexPoint& b) {
        return linf_dist(a.to_vec(), b.to_vec());
    }
};

/// Checked constructor: nonnegative coordinates summing to 1 within
/// 2^(-bits+8); the result is renormalized.
inline SimplexPoint make_simplex_point(Real x0, Real x1, Real x2) {
    long bits = std::max({x0.precision(), x1.precision(), x2.precision()});
    if (x0.sign_raw() < 0 || x1.sign_raw() < 0 || x2.sign_raw() < 0)
        throw NumericError("simplex coordinates must be nonnegative");
    SimplexPoint p{std::move(x0), std::move(x1), std::move(x2)};
    Real drift = abs(p.sum() - 1);
    if (drift > Real::pow2(-bits + 8, bits))
        throw NumericError("simplex coordinates do not sum to 1");
    return p.normalized();
}

struct SpectralData;
namespace detail {
struct SpectralCache {
    std::once_flag once;
    std::shared_ptr<const SpectralData> data;
};
} // namespace detail

/// The pair (rho, phi) plus its precision context. rho is strictly inside
/// (0,1); phi lies in (0,1]. Immutable; copies share the lazily built
/// spectral cache.
class Params {
public:
    Params(Real rho, Real phi, PrecisionConfig cfg, std::string rho_text = {},
           std::string phi_text = {})
        : rho_(std::move(rho)),
          phi_(std::move(phi)),
          cfg_(cfg),
          rho_text_(std::move(rho_text)),
          phi_text_(std::move(phi_text)),
          cache_(std::make_shared<detail::SpectralCache>()) {
        cfg_.validate();
        if (!(rho_ > 0 && rho_ < 1))
            throw DegenerateSpectrumError("rho must lie strictly in (0,1)");
        if (!(phi_ > 0 && phi_ <= 1)) throw NumericError("phi must lie in (0,1]");
    }

    /// Parses rho and phi ("a/b" exact rational or decimal) once, at the
    /// working precision. The source text is kept so precision escalation can
    /// re-parse instead of widening an already-rounded value.
    static Params from_strings(const std::string& rho, const std::string& phi,
                               PrecisionConfig cfg = PrecisionConfig::make()) {
        return Params(Real::from_string(rho, cfg.mantissa_bits),
                      Real::from_string(phi, cfg.mantissa_bits), cfg, rho, phi);
    }

    const Real& rho() const { return rho_; }
    const Real& phi() const { return phi_; }
    const PrecisionConfig& precision() const { return cfg_; }
    long bits() const { return cfg_.mantissa_bits; }
    const std::string& rho_text() const { return rho_text_; }
    const std::string& phi_text() const { return phi_text_; }

    /// Same parameters realized at another mantissa width. Values with a
    /// source text are re-parsed; plain binary values are widened exactly.
    Params at_bits(long bits_target) const {
        PrecisionConfig cfg = cfg_;
        cfg.mantissa_bits = bits_target;
        Real r = rho_text_.empty() ? rho_.at_precision(bits_target)
                                   : Real::from_string(rho_text_, bits_target);
        Real p = phi_text_.empty() ? phi_.at_precision(bits_target)
                                   : Real::from_string(phi_text_, bits_target);
        return Params(std::move(r), std::move(p), cfg, rho_text_, phi_text_);
    }

    Real compare_eps() const { return Real::from_double(cfg_.compare_eps, bits()); }
    Real cycle_eps() const { return Real::from_double(cfg_.cycle_eps, bits()); }

    detail::SpectralCache& cache() const { return *cache_; }

private:
    Real rho_, phi_;
    PrecisionConfig cfg_;
    std::string rho_text_, phi_text_;
    std::shared_ptr<detail::SpectralCache> cache_;
};

/// Everything spectral about the game-B chain, plus the critical phi
/// thresholds derived from the nonunit eigenvalues.
struct SpectralData {
    Real s;                  // sqrt((1+rho^2)(1+4 rho+rho^2))
    Real e1_circ, e2_circ;   // nonunit eigenvalues of the unmixed chain
    Real e1, e2;             // nonunit eigenvalues of the phi-mixture
    Real phi1, phi2, phi3;   // critical phi thresholds
    SimplexPoint pi;         // stationary distribution (independent of phi)
    Mat3 right_eigenvectors; // columns r0, r1, r2
    Mat3 left_eigenvectors;  // inverse of the right matrix
    Real p0, p1;             // win probabilities of game B
};

/// Win probabilities of game B: p0 on a multiple-of-3 capital, p1 otherwise.
inline std::pair<Real, Real> win_probabilities(const Params& params) {
    const Real& rho = params.rho();
    Real rho2 = rho * rho;
    return {rho2 / (rho2 + 1), 1 / (rho + 1)};
}

/// Stationary distribution of the game-B chain; independent of phi.
inline SimplexPoint stationary(const Params& params) {
    const Real& rho = params.rho();
    Real rho2 = rho * rho;
    Real denom = 2 * (1 + rho + rho2);
    return SimplexPoint{(1 + rho2) / denom, rho * (1 + rho) / denom, (1 + rho) / denom};
}

namespace detail {

/// Mixture (1-phi) I + phi P0 for the three-state game matrix with win
/// probabilities (p0, p1). The last entry of each row is computed as one
/// minus the other two, which keeps every row sum at exactly 1 in the
/// rounded arithmetic.
inline Mat3 mixed_matrix(const Real& p0, const Real& p1, const Real& phi) {
    Real keep = 1 - phi;
    auto row = [&](Real a, Real b) {
        Real c = 1 - (a + b);
        return std::array<Real, 3>{std::move(a), std::move(b), std::move(c)};
    };
    auto r0 = row(keep, phi * p0);           // (1-phi, phi p0, ~phi(1-p0))
    auto r1 = row(phi * (1 - p1), keep);     // (.., 1-phi, ~phi p1)
    auto r2 = row(phi * p1, phi * (1 - p1)); // (.., .., ~1-phi)
    return Mat3({r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]});
}

inline std::shared_ptr<const SpectralData> compute_spectral(const Params& params) {
    const long bits = params.bits();
    const Real& rho = params.rho();
    if (!(rho > 0 && rho < 1))
        throw DegenerateSpectrumError("eigenvalue formulas need rho in (0,1)");
    const Real& phi = params.phi();
    Real rho2 = rho * rho;
    Real rho3 = rho2 * rho;
    Real one_p_rho2 = 1 + rho2;
    Real s = sqrt(one_p_rho2 * (1 + 4 * rho + rho2));

    // e_circ = (1-rho) S / (2 (1+rho)(1+rho^2)), the half-gap of the
    // unmixed eigenvalues around -1/2
    Real half = Real::from_ratio(1, 2, bits);
    Real gap = (1 - rho) * s / (2 * (1 + rho) * one_p_rho2);
    Real e1c = gap - half;
    Real e2c = -half - gap;
    Real e1 = 1 - phi + phi * e1c;
    Real e2 = 1 - phi + phi * e2c;

    Real base = 3 * (1 + rho) * one_p_rho2;
    Real wing = (1 - rho) * s;
    Real two_num = 2 * (1 + rho) * one_p_rho2;
    Real phi1 = two_num / (base + wing);
    Real phi2 = two_num / (base - wing);
    Real phi3 = (1 + rho) * ((1 - rho) * one_p_rho2 + (1 + rho) * s) /
                (2 * (1 + rho + rho2) * s);

    Real one = Real::from_long(1, bits);
    // right eigenvectors, one per column
    Vec3 r1((1 + rho) * (1 - rho2 - s), 2 + rho + 2 * rho2 + rho3 + rho * s,
            -(1 + 2 * rho + rho2 + 2 * rho3 - s));
    Vec3 r2((1 + rho) * (1 - rho2 + s), 2 + rho + 2 * rho2 + rho3 - rho * s,
            -(1 + 2 * rho + rho2 + 2 * rho3 + s));
    Mat3 right({one, r1[0], r2[0], one, r1[1], r2[1], one, r1[2], r2[2]});
    Mat3 left = right.inverse();

    auto [p0, p1] = win_probabilities(params);
    auto data = std::make_shared<SpectralData>(SpectralData{
        std::move(s), std::move(e1c), std::move(e2c), std::move(e1), std::move(e2),
        std::move(phi1), std::move(phi2), std::move(phi3), stationary(params),
        std::move(right), std::move(left), std::move(p0), std::move(p1)});
    return data;
}

} // namespace detail

/// Spectral data for these parameters, computed once and cached immutably.
inline const SpectralData& spectral(const Params& params) {
    auto& cache = params.cache();
    std::call_once(cache.once, [&] { cache.data = detail::compute_spectral(params); });
    return *cache.data;
}

/// One-turn transition matrices (P_A, P_B) of the phi-mixture. Game A is
/// the rho = 1 case, built directly with p0 = p1 = 1/2.
inline std::pair<TransitionMatrix, TransitionMatrix> build_matrices(const Params& params) {
    auto [p0, p1] = win_probabilities(params);
    Real half = Real::from_ratio(1, 2, params.bits());
    return {detail::mixed_matrix(half, half, params.phi()),
            detail::mixed_matrix(p0, p1, params.phi())};
}

/// P_B^n through the spectral representation R diag(1, e1^n, e2^n) L.
inline TransitionMatrix power_b(const Params& params, long n) {
    if (n < 0) throw BadIndexError("matrix power needs n >= 0");
    const SpectralData& sd = spectral(params);
    long bits = params.bits();
    Real one = Real::from_long(1, bits);
    Mat3 d = Mat3::diag(one, pow_ui(sd.e1, static_cast<unsigned long>(n)),
                        pow_ui(sd.e2, static_cast<unsigned long>(n)));
    return sd.right_eigenvectors * d * sd.left_eigenvectors;
}

/// P_A^n in closed form: off-diagonal d_n = (1-(1-3 phi/2)^n)/3.
inline TransitionMatrix power_a(const Params& params, long n) {
    if (n < 0) throw BadIndexError("matrix power needs n >= 0");
    long bits = params.bits();
    Real shrink = 1 - Real::from_ratio(3, 2, bits) * params.phi();
    Real dn = (1 - pow_ui(shrink, static_cast<unsigned long>(n))) / 3;
    Real diag = 1 - 2 * dn;
    return Mat3({diag, dn, dn, dn, diag, dn, dn, dn, diag});
}

/// Stationary row vector of an irreducible 3x3 stochastic matrix, from the
/// 2x2 fixed-point system (x2 eliminated by the simplex constraint).
inline SimplexPoint stationary_of(const Mat3& m) {
    Real a = m.at(0, 0) - m.at(2, 0) - 1;
    Real b = m.at(1, 0) - m.at(2, 0);
    Real c = m.at(0, 1) - m.at(2, 1);
    Real d = m.at(1, 1) - m.at(2, 1) - 1;
    Real det = a * d - b * c;
    if (det.is_zero()) throw NumericError("cycle map has no unique stationary vector");
    Real rhs0 = -m.at(2, 0);
    Real rhs1 = -m.at(2, 1);
    Real x0 = (rhs0 * d - b * rhs1) / det;
    Real x1 = (a * rhs1 - rhs0 * c) / det;
    Real x2 = 1 - x0 - x1;
    return SimplexPoint{std::move(x0), std::move(x1), std::move(x2)};
}

} // namespace parrondo
