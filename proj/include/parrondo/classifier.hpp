#pragma once

// Closed-form region analysis of the greedy dynamics.
//
// The asymptotic behavior across the (rho, phi) parameter plane is decided
// by signs of a family of functions E_n, E_{n,m}, G_{n,m}, H_{n,m} built
// from the nonunit eigenvalues e1, e2. A limit cycle [1,n] exists (from its
// stationary start) iff E_{n,n-2} < 0 <= E_n, and [1,n,1,n-2] exists iff
// G_{n,n-2} < 0 <= H_{n,n-2}. Boundary curves between behavior bands are
// the zero sets of these functions; their phi-roots are found by bisection
// on certified signs.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parrondo/dynamics.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/model.hpp"

namespace parrondo {

enum class CycleFn { E, Em, G, H, D, I };

namespace detail {

struct CycleFnCtx {
    Real e1, e2, q;       // q = 3 phi - 2
    Real m_minus, m_plus; // 3(1+rho)(1+rho^2) -/+ (1-rho) S
    Real front;           // phi (1-rho)
    Real s;
    Real rho_poly;        // 1 + rho + rho^2
};

inline CycleFnCtx cycle_ctx(const Params& params) {
    const SpectralData& sd = spectral(params);
    const Real& rho = params.rho();
    const Real& phi = params.phi();
    Real base = 3 * (1 + rho) * (1 + rho * rho);
    Real wing = (1 - rho) * sd.s;
    return CycleFnCtx{sd.e1,     sd.e2,          3 * phi - 2,      base - wing,
                      base + wing, phi * (1 - rho), sd.s, 1 + rho + rho * rho};
}

inline Real pw(const Real& base, long n) { return pow_ui(base, static_cast<unsigned long>(n)); }

inline Real eval_e_nm(const CycleFnCtx& c, long n, long m) {
    return c.front *
           (pw(c.e2, m) * (2 + pw(c.e1, n) * c.q) * c.m_minus -
            pw(c.e1, m) * (2 + pw(c.e2, n) * c.q) * c.m_plus) /
           2;
}

inline Real eval_g_nm(const CycleFnCtx& c, long n, long m) {
    Real q2 = c.q * c.q;
    return c.front *
           (pw(c.e2, m) * (4 - pw(c.e1, 2 * (n - 1)) * q2) * (2 - pw(c.e2, n - 2) * c.q) *
                c.m_minus -
            pw(c.e1, m) * (4 - pw(c.e2, 2 * (n - 1)) * q2) * (2 - pw(c.e1, n - 2) * c.q) *
                c.m_plus);
}

inline Real eval_h_nm(const CycleFnCtx& c, long n, long m) {
    Real q2 = c.q * c.q;
    return c.front *
           (pw(c.e2, m) * (4 - pw(c.e1, 2 * (n - 1)) * q2) * (2 - pw(c.e2, n) * c.q) *
                c.m_minus -
            pw(c.e1, m) * (4 - pw(c.e2, 2 * (n - 1)) * q2) * (2 - pw(c.e1, n) * c.q) *
                c.m_plus);
}

inline Real eval_d_n(const CycleFnCtx& c, long n) {
    return 2 * (2 + pw(c.e1, n) * c.q) * (2 + pw(c.e2, n) * c.q) * c.rho_poly * c.s;
}

inline Real eval_i_n(const CycleFnCtx& c, long n) {
    return 2 * (2 - pw(c.e1, n - 1) * c.q) * (2 - pw(c.e2, n - 1) * c.q) * eval_d_n(c, n - 1);
}

} // namespace detail

/// Evaluates one of the cycle functions at working precision.
/// E and Em need even n >= 2, G and H even n >= 4 (0 <= m <= n where a
/// second index applies); D accepts n >= 0 and I accepts n >= 1.
inline Real eval_cycle_fn(CycleFn which, long n, long m, const Params& params) {
    auto c = detail::cycle_ctx(params);
    switch (which) {
        case CycleFn::E:
            if (n < 2 || n % 2 != 0) throw BadIndexError("E_n needs even n >= 2");
            return detail::eval_e_nm(c, n, n);
        case CycleFn::Em:
            if (n < 2 || n % 2 != 0) throw BadIndexError("E_{n,m} needs even n >= 2");
            if (m < 0 || m > n) throw BadIndexError("E_{n,m} needs 0 <= m <= n");
            return detail::eval_e_nm(c, n, m);
        case CycleFn::G:
            if (n < 4 || n % 2 != 0) throw BadIndexError("G_{n,m} needs even n >= 4");
            if (m < 0 || m > n) throw BadIndexError("G_{n,m} needs 0 <= m <= n");
            return detail::eval_g_nm(c, n, m);
        case CycleFn::H:
            if (n < 4 || n % 2 != 0) throw BadIndexError("H_{n,m} needs even n >= 4");
            if (m < 0 || m > n) throw BadIndexError("H_{n,m} needs 0 <= m <= n");
            return detail::eval_h_nm(c, n, m);
        case CycleFn::D:
            if (n < 0) throw BadIndexError("D_n needs n >= 0");
            return detail::eval_d_n(c, n);
        case CycleFn::I:
            if (n < 1) throw BadIndexError("I_n needs n >= 1");
            return detail::eval_i_n(c, n);
    }
    throw BadIndexError("unknown cycle function");
}

/// F_n = (e1/e2)^n [2 + e2^n(3 phi - 2)] / [2 + e1^n(3 phi - 2)], the
/// decreasing-in-even-n ratio whose crossing of phi1/phi2 defines s.
inline Real cycle_fn_f(long n, const Params& params) {
    if (n < 1) throw BadIndexError("F_n needs n >= 1");
    auto c = detail::cycle_ctx(params);
    Real r = detail::pw(c.e1 / c.e2, n);
    return r * (2 + detail::pw(c.e2, n) * c.q) / (2 + detail::pw(c.e1, n) * c.q);
}

namespace detail {

/// Adaptive certified sign of a cycle function (or any re-evaluable
/// quantity) with precision doubling; ZeroAmbiguous only at the cap.
inline Sign cycle_fn_sign(CycleFn which, long n, long m, const Params& params) {
    return adaptive_sign(
        [&](long bits) { return eval_cycle_fn(which, n, m, params.at_bits(bits)); },
        params.bits());
}

inline std::string cycle_fn_name(CycleFn which, long n, long m) {
    switch (which) {
        case CycleFn::E: return "E_" + std::to_string(n);
        case CycleFn::Em: return "E_" + std::to_string(n) + "_" + std::to_string(m);
        case CycleFn::G: return "G_" + std::to_string(n) + "_" + std::to_string(m);
        case CycleFn::H: return "H_" + std::to_string(n) + "_" + std::to_string(m);
        case CycleFn::D: return "D_" + std::to_string(n);
        case CycleFn::I: return "I_" + std::to_string(n);
    }
    return "?";
}

inline Sign require_sign(CycleFn which, long n, long m, const Params& params) {
    Sign s = cycle_fn_sign(which, n, m, params);
    if (s == Sign::ZeroAmbiguous) throw BoundaryAmbiguousError(cycle_fn_name(which, n, m));
    return s;
}

} // namespace detail

/// Smallest even n with E_n >= 0. Finite for 2/3 < phi < phi2 because the
/// even-n sequence F_n decreases to 0; n grows without bound as phi
/// approaches 2/3 from above, hence the explicit cap.
inline int find_s(const Params& params, int n_max = 4096) {
    for (long n = 2; n <= n_max; n += 2) {
        Sign s = detail::cycle_fn_sign(CycleFn::E, n, n, params);
        if (s == Sign::Positive) return static_cast<int>(n);
        if (s == Sign::ZeroAmbiguous)
            throw BoundaryAmbiguousError(detail::cycle_fn_name(CycleFn::E, n, n));
    }
    throw SNotFoundError(n_max);
}

/// Analytic prediction of the asymptotic behavior at (rho, phi).
struct Classification {
    enum class Regime { GASEquilibrium, CycleSet };
    Regime regime;
    std::vector<GamePattern> cycles; // one or two patterns when phi > 2/3
    bool unstable_equilibrium = false;
    std::optional<int> region12;
    std::string band; // which sign tests decided the cycle set
    int s = 0;        // smallest even n with E_n >= 0 (cycle regime only)

    bool has_cycle(const GamePattern& p) const {
        for (const auto& c : cycles)
            if (c == p) return true;
        return false;
    }
};

inline int region12(const Params& params); // defined below

/// Full analytic classification.
///
/// phi <= 2/3: globally stable equilibrium, no cycles. phi >= phi2: the
/// unique cycle is [1,2]. In between, s = find_s locates the band and the
/// four sign tests E_{s,s-2}, G/H at s and s+2 decide which of the one or
/// two coexisting cycles are present.
inline Classification classify(const Params& params) {
    const long bits = params.bits();
    const SpectralData& sd = spectral(params);
    Real two_thirds = Real::from_ratio(2, 3, bits);

    Classification out{Classification::Regime::GASEquilibrium, {}, false, std::nullopt, "", 0};
    if (params.phi() <= two_thirds) {
        out.band = "phi<=2/3";
        return out;
    }

    out.regime = Classification::Regime::CycleSet;
    Sign vs_phi2 = adaptive_sign(
        [&](long b) {
            Params p = params.at_bits(b);
            return p.phi() - spectral(p).phi2;
        },
        bits);
    out.unstable_equilibrium = (vs_phi2 == Sign::Negative);

    if (vs_phi2 != Sign::Negative) {
        out.s = 2;
        out.cycles.push_back(GamePattern::one_n(2));
        out.band = "phi>=phi2";
    } else {
        const int s = find_s(params);
        out.s = s;
        std::string band = "s=" + std::to_string(s);

        bool one_s;
        if (s == 2) {
            one_s = true; // E_{2,0} < 0 holds identically
        } else {
            Sign e_ssm2 = detail::require_sign(CycleFn::Em, s, s - 2, params);
            band += e_ssm2 == Sign::Negative ? ";E_" + std::to_string(s) + "_" +
                                                   std::to_string(s - 2) + "<0"
                                             : ";E_" + std::to_string(s) + "_" +
                                                   std::to_string(s - 2) + ">=0";
            one_s = (e_ssm2 == Sign::Negative);
        }
        if (one_s) out.cycles.push_back(GamePattern::one_n(s));

        if (s >= 4) {
            Sign g = detail::require_sign(CycleFn::G, s, s - 2, params);
            if (g == Sign::Negative) {
                Sign h = detail::require_sign(CycleFn::H, s, s - 2, params);
                if (h != Sign::Negative) {
                    out.cycles.push_back(GamePattern::one_n_one_nm2(s));
                    band += ";G_" + std::to_string(s) + "_" + std::to_string(s - 2) + "<0<=H";
                }
            }
        }
        {
            Sign g = detail::require_sign(CycleFn::G, s + 2, s, params);
            if (g == Sign::Negative) {
                Sign h = detail::require_sign(CycleFn::H, s + 2, s, params);
                if (h != Sign::Negative) {
                    out.cycles.push_back(GamePattern::one_n_one_nm2(s + 2));
                    band += ";G_" + std::to_string(s + 2) + "_" + std::to_string(s) + "<0<=H";
                }
            } else {
                band += ";G_" + std::to_string(s + 2) + "_" + std::to_string(s) + ">=0";
            }
        }
        out.band = band;
    }

    // the twelve-region index applies on G_{4,2} >= 0 only
    try {
        Sign g42 = detail::cycle_fn_sign(CycleFn::G, 4, 2, params);
        if (g42 != Sign::Negative) out.region12 = region12(params);
    } catch (const Error&) {
        out.region12 = std::nullopt; // on or too близко to an internal curve
    }
    return out;
}

/// Coefficients and axis intercepts of the band line
/// alpha_n x0 + beta_n x1 = gamma_n (the locus where the state reached after
/// one A and n B moves has x0 exactly at pi0).
struct LineFamily {
    Real alpha, beta, gamma;
    Real a; // intercept with the vertical line x0 = pi0
    Real b; // intercept with the axis x1 = 0
    Real c; // intercept with the edge x0 + x1 = 1
};

inline LineFamily line_family(int n, const Params& params) {
    if (n < 1) throw BadIndexError("line family needs n >= 1");
    const SpectralData& sd = spectral(params);
    const Real& rho = params.rho();
    const Real& phi = params.phi();
    Real one_p_rho2 = 1 + rho * rho;
    Real q = 3 * phi - 2;
    Real e1n = pow_ui(sd.e1, static_cast<unsigned long>(n));
    Real e2n = pow_ui(sd.e2, static_cast<unsigned long>(n));
    long sgn = (n % 2 == 0) ? 1 : -1;

    Real alpha = sgn * q * (e2n * (one_p_rho2 + sd.s) - e1n * (one_p_rho2 - sd.s)) / (4 * sd.s);
    Real beta = sgn * q * (e2n - e1n) * one_p_rho2 / (2 * sd.s);
    Real rho_poly = 1 + rho + rho * rho;
    Real gamma_num =
        e2n * (phi * rho_poly * (3 + 3 * rho * rho + sd.s) -
               one_p_rho2 * (1 + 2 * rho + 3 * rho * rho + sd.s)) -
        e1n * (phi * rho_poly * (3 + 3 * rho * rho - sd.s) -
               one_p_rho2 * (1 + 2 * rho + 3 * rho * rho - sd.s));
    Real gamma = sgn * gamma_num / (4 * rho_poly * sd.s);

    Real a = (gamma - alpha * sd.pi.x0) / beta;
    Real b = gamma / alpha;
    Real c = (gamma - beta) / (alpha - beta);
    return LineFamily{std::move(alpha), std::move(beta), std::move(gamma), std::move(a),
                      std::move(b), std::move(c)};
}

namespace detail {

/// Directly expanded coefficients for n = 1 and n = 2; used to cross-check
/// the spectral forms and by the region predicates.
inline LineFamily line1_explicit(const Params& params) {
    const SpectralData& sd = spectral(params);
    const Real& rho = params.rho();
    const Real& phi = params.phi();
    Real q = 3 * phi - 2;
    Real alpha = q * (-(1 + rho) + phi * (2 + rho)) / (2 * (1 + rho));
    Real beta = phi * q * (1 - rho) / (2 * (1 + rho));
    Real rho_poly = 1 + rho + rho * rho;
    Real gamma = ((1 + rho) * (1 + rho * rho) - phi * (3 + rho) * rho_poly +
                  3 * phi * phi * rho_poly) /
                 (2 * (1 + rho) * rho_poly);
    Real a = (gamma - alpha * sd.pi.x0) / beta;
    Real b = gamma / alpha;
    Real c = (gamma - beta) / (alpha - beta);
    return LineFamily{std::move(alpha), std::move(beta), std::move(gamma), std::move(a),
                      std::move(b), std::move(c)};
}

inline LineFamily line2_explicit(const Params& params) {
    const SpectralData& sd = spectral(params);
    const Real& rho = params.rho();
    const Real& phi = params.phi();
    Real rho2 = rho * rho;
    Real rho3 = rho2 * rho;
    Real rho4 = rho2 * rho2;
    Real q = 3 * phi - 2;
    Real one_p_rho = 1 + rho;
    Real one_p_rho2 = 1 + rho2;
    Real rho_poly = 1 + rho + rho2;
    Real alpha = q *
                 (one_p_rho * one_p_rho * one_p_rho2 -
                  2 * phi * one_p_rho * (2 + rho) * one_p_rho2 +
                  phi * phi * (4 + 5 * rho + 3 * rho2 + 5 * rho3 + rho4)) /
                 (2 * one_p_rho * one_p_rho * one_p_rho2);
    Real beta = q * q * phi * (1 - rho) / (2 * one_p_rho);
    Real gamma = (-(one_p_rho * one_p_rho) * one_p_rho2 * one_p_rho2 +
                  phi * one_p_rho * (5 + rho) * one_p_rho2 * rho_poly -
                  2 * phi * phi * one_p_rho2 * (5 + 5 * rho - rho2) * rho_poly +
                  phi * phi * phi * rho_poly * (7 + 5 * rho + 3 * rho2 + 5 * rho3 - 2 * rho4)) /
                 (2 * one_p_rho * one_p_rho * one_p_rho2 * rho_poly);
    Real a = (gamma - alpha * sd.pi.x0) / beta;
    Real b = gamma / alpha;
    Real c = (gamma - beta) / (alpha - beta);
    return LineFamily{std::move(alpha), std::move(beta), std::move(gamma), std::move(a),
                      std::move(b), std::move(c)};
}

} // namespace detail

/// Boundary curves whose phi-roots are tabulated and compared across bands.
struct CurveSpec {
    enum class Kind { G, E, Em, H, BIntercept } kind;
    int n = 0;
    int m = 0;

    std::string name() const {
        switch (kind) {
            case Kind::G: return "G_" + std::to_string(n) + "_" + std::to_string(m);
            case Kind::E: return "E_" + std::to_string(n);
            case Kind::Em: return "E_" + std::to_string(n) + "_" + std::to_string(m);
            case Kind::H: return "H_" + std::to_string(n) + "_" + std::to_string(m);
            case Kind::BIntercept: return "b_" + std::to_string(n) + "-pi0";
        }
        return "?";
    }
};

namespace detail {

inline Real eval_curve(const CurveSpec& curve, const Params& params) {
    switch (curve.kind) {
        case CurveSpec::Kind::G: return eval_cycle_fn(CycleFn::G, curve.n, curve.m, params);
        case CurveSpec::Kind::E: return eval_cycle_fn(CycleFn::E, curve.n, curve.n, params);
        case CurveSpec::Kind::Em: return eval_cycle_fn(CycleFn::Em, curve.n, curve.m, params);
        case CurveSpec::Kind::H: return eval_cycle_fn(CycleFn::H, curve.n, curve.m, params);
        case CurveSpec::Kind::BIntercept: {
            LineFamily lf = line_family(curve.n, params);
            return lf.b - spectral(params).pi.x0;
        }
    }
    throw BadIndexError("unknown curve");
}

} // namespace detail

/// A phi-root certified to `digits` decimal places (truncated) at fixed rho.
struct BoundaryRoot {
    Real lo, hi;            // final certified bracket
    std::string truncated;  // digits decimal places, truncated
    std::string rounded;    // digits decimal places, correctly rounded
};

/// Bisection for the phi-root of a boundary curve inside (2/3, phi2) at a
/// fixed rho. Signs at probe points are certified with adaptive precision
/// doubling; the bracket is narrowed until both endpoints agree on the first
/// `digits` decimal places of the truncated and the rounded forms.
inline BoundaryRoot boundary_root(const CurveSpec& curve, const Real& rho, int digits,
                                  long bits = 256) {
    if (digits < 1) throw BadIndexError("digits must be >= 1");
    const long work = std::max<long>(bits, 64 + static_cast<long>(4.3 * digits));

    auto params_at = [&](const Real& phi, long b) {
        PrecisionConfig cfg = PrecisionConfig::make(b);
        return Params(rho.at_precision(b), phi.at_precision(b), cfg);
    };
    auto curve_sign = [&](const Real& phi) {
        return adaptive_sign(
            [&](long b) { return detail::eval_curve(curve, params_at(phi, b)); }, work);
    };

    // search interval: (2/3, phi2) shrunk by a hair on both sides
    Real phi2 = [&] {
        PrecisionConfig cfg = PrecisionConfig::make(work);
        Params probe(rho.at_precision(work), Real::from_ratio(1, 2, work), cfg);
        return spectral(probe).phi2; // phi2 does not depend on phi
    }();
    Real margin = Real::pow2(-24, work);
    Real lo = Real::from_ratio(2, 3, work) + margin;
    Real hi = phi2 - margin;

    Sign slo = curve_sign(lo);
    Sign shi = curve_sign(hi);
    if (slo == Sign::ZeroAmbiguous || shi == Sign::ZeroAmbiguous)
        throw BoundaryAmbiguousError(curve.name());
    if (slo == shi) throw NoSignChangeError(curve.name());

    const long max_iter = 64 + static_cast<long>(4 * 3.33 * digits);
    for (long it = 0; it < max_iter; ++it) {
        std::string tlo = truncate_decimal(lo, digits);
        if (tlo == truncate_decimal(hi, digits) &&
            round_decimal(lo, digits) == round_decimal(hi, digits)) {
            return BoundaryRoot{lo, hi, tlo, round_decimal(lo, digits)};
        }
        Real mid = (lo + hi) / 2;
        Sign smid = curve_sign(mid);
        if (smid == Sign::ZeroAmbiguous) throw BoundaryAmbiguousError(curve.name());
        if (smid == slo)
            lo = mid;
        else
            hi = mid;
    }
    throw BoundaryAmbiguousError(curve.name() + " (bracket did not settle)");
}

/// The classical critical-value ladder at a given rho: the nine curves
/// ordered from the highest phi-root to the lowest, each with the cycle
/// forms living directly above it.
struct CriticalRow {
    std::string forms;
    CurveSpec curve;
    BoundaryRoot root;
};

inline std::vector<CriticalRow> critical_table(const Real& rho, int digits, long bits = 256) {
    using K = CurveSpec::Kind;
    const std::pair<const char*, CurveSpec> rows[] = {
        {"[1,2]", {K::G, 4, 2}},
        {"[1,4,1,2], [1,2]", {K::E, 2, 0}},
        {"[1,4,1,2]", {K::Em, 4, 2}},
        {"[1,4,1,2], [1,4]", {K::H, 4, 2}},
        {"[1,4]", {K::G, 6, 4}},
        {"[1,6,1,4], [1,4]", {K::E, 4, 0}},
        {"[1,6,1,4]", {K::Em, 6, 4}},
        {"[1,6,1,4], [1,6]", {K::H, 6, 4}},
        {"[1,6]", {K::G, 8, 6}},
    };
    std::vector<CriticalRow> out;
    out.reserve(9);
    for (const auto& [forms, curve] : rows)
        out.push_back(CriticalRow{forms, curve, boundary_root(curve, rho, digits, bits)});
    return out;
}

/// One of the B-forever entry lines (the sets reaching the B-forever line
/// after an A, BA, or BBA prefix). Each is a segment of w1 = slope*w0 +
/// intercept inside its domain (the A-side for the first, the B-side for
/// the other two).
struct BForeverLine {
    std::string name;   // "f", "g", or "h"
    Real slope;
    Real intercept;
    bool domain_is_a;   // whether the line lives in the A-side of the simplex
    bool nonempty;
};

namespace detail {

/// Whether the segment w1 = slope*w0 + intercept meets
/// {w0 in [w_lo, w_hi], 0 <= w1 <= 1 - w0}. The slope is < -1, so both
/// constraints are monotone in w0.
inline bool segment_nonempty(const Real& slope, const Real& intercept, const Real& w_lo,
                             const Real& w_hi) {
    // w1 <= 1 - w0  <=>  w0 >= (intercept - 1)/(-1 - slope)
    Real lower = (intercept - 1) / (-1 - slope);
    // w1 >= 0       <=>  w0 <= intercept / (-slope)
    Real upper = intercept / (-slope);
    Real lo = w_lo > lower ? w_lo : lower;
    Real hi = w_hi < upper ? w_hi : upper;
    return lo <= hi;
}

} // namespace detail

/// The up-to-three one-dimensional B-forever feeders for 2/3 < phi < phi2.
/// The A-side line is nonempty exactly when phi3 <= phi < phi2.
inline std::vector<BForeverLine> b_forever_lines(const Params& params) {
    const SpectralData& sd = spectral(params);
    const long bits = params.bits();
    Real two_thirds = Real::from_ratio(2, 3, bits);
    if (!(params.phi() > two_thirds) || !(params.phi() < sd.phi2))
        throw NotInPartitionError("b_forever_lines needs 2/3 < phi < phi2");

    const Real& rho = params.rho();
    const Real& phi = params.phi();
    Real one_p_rho2 = 1 + rho * rho;
    Real q = 3 * phi - 2;
    Real slope = -(1 + sd.s / one_p_rho2) / 2;

    Real pi0 = sd.pi.x0;
    Real pi1 = sd.pi.x1;
    Real common = 2 * (phi - 2 * pi1) * one_p_rho2 + (phi - 2 * pi0) * (one_p_rho2 + sd.s);

    Real f_int = common / (2 * q * one_p_rho2);
    Sign vs_phi3 = adaptive_sign(
        [&](long b) {
            Params p = params.at_bits(b);
            return p.phi() - spectral(p).phi3;
        },
        bits);
    bool f_nonempty = (vs_phi3 != Sign::Negative);

    Real g1 = phi * q * ((1 + 2 * rho) * one_p_rho2 + sd.s) - (1 + rho) * common;
    Real g2 = q * (1 + rho) * one_p_rho2 + phi * (1 - rho) * sd.s;
    Real g_int = g1 / (q * g2);

    Real rho2 = rho * rho;
    Real rho3 = rho2 * rho;
    Real rho4 = rho2 * rho2;
    Real h1 = phi * q *
                  (2 * (1 + rho) * ((1 + 2 * rho) * one_p_rho2 + sd.s) -
                   phi * (2 + 6 * rho + 3 * rho2 + 4 * rho3 + 3 * rho4 +
                          (2 + 2 * rho - rho2) * sd.s)) -
              (1 + rho) * (1 + rho) * common;
    Real h2 = -2 * (1 + rho) * (1 + rho) * one_p_rho2 +
              6 * phi * (1 + rho) * (1 + rho) * one_p_rho2 -
              phi * phi * (5 + 10 * rho + 6 * rho2 + 10 * rho3 + 5 * rho4) -
              phi * q * (1 - rho2) * sd.s;
    Real h_int = h1 / (q * h2);

    Real zero = Real(bits);
    std::vector<BForeverLine> out;
    out.push_back(BForeverLine{"f", slope, f_int, true, f_nonempty});
    out.push_back(
        BForeverLine{"g", slope, g_int, false, detail::segment_nonempty(slope, g_int, zero, pi0)});
    out.push_back(
        BForeverLine{"h", slope, h_int, false, detail::segment_nonempty(slope, h_int, zero, pi0)});
    return out;
}

namespace detail {

/// Atoms of the twelve-region partition, certified adaptively.
struct RegionAtoms {
    Sign g42;           // G_{4,2} vs 0
    Sign a2_gap;        // a2 - (1 - pi0)
    Sign b2_gap;        // b2 - 1
    Sign phi_mix_line;  // phi - [(3/4)(1-rho) + (2/3) rho]
    Sign phi_vs_phi3;   // phi - phi3
    Sign b1_gap;        // b1 - 1
    Sign phi_vs_a1line; // phi - (1 - rho/3)
    Sign b2_vs_b1;      // b2 - b1
    Sign ftest;         // alpha1 f0 + beta1 f1 - gamma1, with (f0,f1) = (1,0,0) PA PB
};

inline RegionAtoms region_atoms(const Params& params) {
    auto sig = [&](auto&& fn) { return adaptive_sign(fn, params.bits()); };
    RegionAtoms a{
        sig([&](long b) { return eval_cycle_fn(CycleFn::G, 4, 2, params.at_bits(b)); }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            LineFamily l2 = line_family(2, p);
            return l2.a - (1 - spectral(p).pi.x0);
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return line_family(2, p).b - 1;
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return p.phi() - (Real::from_ratio(3, 4, b) * (1 - p.rho()) +
                              Real::from_ratio(2, 3, b) * p.rho());
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return p.phi() - spectral(p).phi3;
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return line_family(1, p).b - 1;
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return p.phi() - (1 - p.rho() / 3);
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            return line_family(2, p).b - line_family(1, p).b;
        }),
        sig([&](long b) {
            Params p = params.at_bits(b);
            auto [pa, pb] = build_matrices(p);
            Mat3 map = pa * pb;
            LineFamily l1 = line_family(1, p);
            return l1.alpha * map.at(0, 0) + l1.beta * map.at(0, 1) - l1.gamma;
        }),
    };
    return a;
}

inline bool ge(Sign s) { return s != Sign::Negative; }
inline bool gt(Sign s) { return s == Sign::Positive; }
inline bool le(Sign s) { return s != Sign::Positive; }
inline bool lt(Sign s) { return s == Sign::Negative; }

} // namespace detail

namespace detail {

/// Truth values of the twelve enumerated predicates, as literally written.
/// These are NOT mutually exclusive: the band directly above G_{4,2} = 0
/// also satisfies the region-7 conjunction (a2 < 1-pi0, phi < 1-rho/3), so
/// the partition is the enumeration read as a decision list.
inline std::array<bool, 13> region_predicates(const RegionAtoms& a) {
    std::array<bool, 13> match{};
    match[1] = ge(a.g42) && lt(a.a2_gap) && lt(a.phi_mix_line);
    match[2] = ge(a.a2_gap) && lt(a.b2_gap) && lt(a.phi_mix_line);
    match[3] = ge(a.b2_gap);
    match[4] = lt(a.b2_gap) && lt(a.phi_vs_phi3) && gt(a.phi_mix_line);
    match[5] = ge(a.phi_vs_phi3) && gt(a.b1_gap);
    match[6] = le(a.b1_gap) && ge(a.a2_gap) && lt(a.b2_vs_b1);
    match[7] = lt(a.a2_gap) && lt(a.phi_vs_a1line);
    match[8] = ge(a.phi_vs_a1line) && lt(a.b2_vs_b1);
    match[9] = ge(a.b2_vs_b1) && lt(a.phi_vs_a1line);
    match[10] = ge(a.phi_vs_a1line) && ge(a.a2_gap);
    match[11] = ge(a.b2_vs_b1) && lt(a.a2_gap) && lt(a.ftest);
    match[12] = ge(a.ftest);
    return match;
}

} // namespace detail

/// All literal predicate matches at (rho, phi); diagnostic companion of
/// region12 (the first entry is what region12 returns).
inline std::vector<int> region12_matches(const Params& params) {
    Real two_thirds = Real::from_ratio(2, 3, params.bits());
    if (!(params.phi() > two_thirds)) throw NotInPartitionError("region index needs phi > 2/3");

    detail::RegionAtoms a = detail::region_atoms(params);
    if (a.g42 == Sign::ZeroAmbiguous) throw PredicateAmbiguousError("G_4_2 on boundary");
    if (detail::lt(a.g42)) throw NotInPartitionError("G_4_2 < 0");

    for (Sign s : {a.a2_gap, a.b2_gap, a.phi_mix_line, a.phi_vs_phi3, a.b1_gap, a.phi_vs_a1line,
                   a.b2_vs_b1, a.ftest})
        if (s == Sign::ZeroAmbiguous)
            throw PredicateAmbiguousError("region predicate on an internal curve");

    auto match = detail::region_predicates(a);
    std::vector<int> out;
    for (int r = 1; r <= 12; ++r)
        if (match[static_cast<std::size_t>(r)]) out.push_back(r);
    if (out.empty()) throw PredicateAmbiguousError("no region predicate matched");
    return out;
}

/// Index 1..12 of the partition cell containing (rho, phi), for parameters
/// with phi > 2/3 and G_{4,2} >= 0: the first matching predicate in the
/// enumeration order.
inline int region12(const Params& params) { return region12_matches(params).front(); }

/// One vertex-absorption check: the image of a named corner point under the
/// one-period map, with the membership tests it must pass. Corner points
/// can map exactly onto the x0 = pi0 face (the b1 vertex does, by the
/// definition of the band line), so the x0 test is the closed one, decided
/// by certified signs; the band-line test is strict.
struct VertexCheck {
    std::string name;
    SimplexPoint image;
    bool x0_ok;   // image.x0 >= pi0 (closed, certified)
    bool line_ok; // alpha1 image.x0 + beta1 image.x1 < gamma1 (strict, certified)
    bool pass;
};

struct VertexReport {
    int region;
    std::vector<VertexCheck> checks;
    bool all_pass;
};

namespace detail {

enum class AbsorbVertex { Corner100, B1Edge, C1Edge, PiA1, PiTop, PiBottom };

inline Vec3 absorb_vertex(AbsorbVertex id, const Params& params) {
    const SpectralData& sd = spectral(params);
    long bits = params.bits();
    Real zero = Real(bits);
    Real one = Real::from_long(1, bits);
    Real pi0 = sd.pi.x0;
    switch (id) {
        case AbsorbVertex::Corner100: return Vec3(one, zero, zero);
        case AbsorbVertex::B1Edge: {
            Real b1 = line_family(1, params).b;
            return Vec3(b1, zero, 1 - b1);
        }
        case AbsorbVertex::C1Edge: {
            Real c1 = line_family(1, params).c;
            return Vec3(c1, 1 - c1, zero);
        }
        case AbsorbVertex::PiA1: {
            Real a1 = line_family(1, params).a;
            return Vec3(pi0, a1, 1 - pi0 - a1);
        }
        case AbsorbVertex::PiTop: return Vec3(pi0, 1 - pi0, zero);
        case AbsorbVertex::PiBottom: return Vec3(pi0, zero, 1 - pi0);
    }
    throw BadIndexError("unknown vertex");
}

inline Vec3 absorb_image(AbsorbVertex id, int b_powers, const Params& params) {
    auto [pa, pb] = build_matrices(params);
    Vec3 img = absorb_vertex(id, params) * pa;
    for (int i = 0; i < b_powers; ++i) img = img * pb;
    Real s = img.sum();
    return Vec3(img[0] / s, img[1] / s, img[2] / s);
}

} // namespace detail

/// Verifies, for regions 3, 9, 10 and 11, that the relevant corner points
/// map back into the ABB-invariant region — the finite computation behind
/// the uniqueness of the [1,2] cycle there.
inline VertexReport check_vertex_absorption(const Params& params) {
    int region = region12(params);
    if (region != 3 && region != 9 && region != 10 && region != 11)
        throw WrongRegionError("vertex absorption applies in regions 3, 9, 10, 11 only");

    using V = detail::AbsorbVertex;
    struct Item {
        const char* name;
        V vertex;
        int b_powers;
    };
    std::vector<Item> items;
    if (region == 3) {
        // the ABBA region is the whole A-side; its closure has three corners
        items = {{"r", V::PiBottom, 2}, {"s", V::Corner100, 2}, {"t", V::PiTop, 2}};
    } else if (region == 9) {
        items = {{"f", V::Corner100, 1}, {"g", V::B1Edge, 1}, {"h", V::C1Edge, 1},
                 {"r", V::PiBottom, 2},  {"s", V::B1Edge, 2}, {"t", V::C1Edge, 2},
                 {"u", V::PiTop, 2}};
    } else {
        items = {{"f", V::Corner100, 1}, {"g", V::B1Edge, 1}, {"h", V::PiA1, 1},
                 {"i", V::PiTop, 1},     {"s", V::B1Edge, 2}, {"t", V::PiA1, 2},
                 {"u", V::PiBottom, 2}};
    }

    std::vector<VertexCheck> checks;
    for (const auto& item : items) {
        Vec3 img = detail::absorb_image(item.vertex, item.b_powers, params);
        Sign x0_sign = adaptive_sign(
            [&](long b) {
                Params p = params.at_bits(b);
                Vec3 v = detail::absorb_image(item.vertex, item.b_powers, p);
                return v[0] - spectral(p).pi.x0;
            },
            params.bits());
        Sign line_sign = adaptive_sign(
            [&](long b) {
                Params p = params.at_bits(b);
                Vec3 v = detail::absorb_image(item.vertex, item.b_powers, p);
                LineFamily l1 = line_family(1, p);
                return l1.alpha * v[0] + l1.beta * v[1] - l1.gamma;
            },
            params.bits());
        bool x0_ok = x0_sign != Sign::Negative; // closed side of the face
        bool line_ok = line_sign == Sign::Negative;
        bool pass = x0_ok && line_ok;
        if (region == 3) {
            // the second band line is not binding in region 3; confirm anyway
            Sign l2_sign = adaptive_sign(
                [&](long b) {
                    Params p = params.at_bits(b);
                    Vec3 v = detail::absorb_image(item.vertex, item.b_powers, p);
                    LineFamily l2 = line_family(2, p);
                    return l2.alpha * v[0] + l2.beta * v[1] - l2.gamma;
                },
                params.bits());
            pass = pass && (l2_sign != Sign::Positive);
        }
        checks.push_back(VertexCheck{item.name, SimplexPoint{img[0], img[1], img[2]}, x0_ok,
                                     line_ok, pass});
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    return VertexReport{region, std::move(checks), all};
}

/// Stationary state of the one-period cycle map for a pattern.
inline SimplexPoint cycle_stationary(const GamePattern& pattern, const Params& params) {
    auto [pa, pb] = build_matrices(params);
    if (pattern.kind == GamePattern::Kind::OneN) {
        return stationary_of(pa * power_b(params, pattern.n));
    }
    if (pattern.kind == GamePattern::Kind::OneNOneNm2) {
        Mat3 m = pa * power_b(params, pattern.n) * pa * power_b(params, pattern.n - 2);
        return stationary_of(m);
    }
    return spectral(params).pi;
}

} // namespace parrondo
