#pragma once

// Arbitrary-precision real numbers and certified sign decisions.
//
// Real wraps an MPFR binary float. Every value carries its own mantissa
// width; arithmetic is correctly rounded (round-to-nearest) at the larger
// of the operand widths. Operations that would produce a NaN throw instead,
// so NaN never escapes.

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "parrondo/errors.hpp"

namespace parrondo {

enum class Sign { Negative = -1, ZeroAmbiguous = 0, Positive = 1 };

/// Precision context shared by a whole computation.
///
/// compare_eps bounds geometric membership tests (distance to a line),
/// cycle_eps bounds state-recurrence tests. Both are tuned for the default
/// 256-bit mantissa; callers running at other widths should rescale them.
struct PrecisionConfig {
    long mantissa_bits = 256;
    double compare_eps = 1e-30;
    double cycle_eps = 1e-30;
    bool allow_low_precision = false; // diagnostic mode only (53-bit anomaly runs)

    static PrecisionConfig make(long bits = 256, double cmp_eps = 1e-30,
                                double cyc_eps = 1e-30) {
        PrecisionConfig cfg{bits, cmp_eps, cyc_eps, false};
        cfg.validate();
        return cfg;
    }

    /// Bypasses the >= 64-bit floor; used to reproduce double-precision
    /// misclassifications on purpose.
    static PrecisionConfig unchecked(long bits, double cmp_eps = 1e-12,
                                     double cyc_eps = 1e-12) {
        PrecisionConfig cfg{bits, cmp_eps, cyc_eps, true};
        if (bits < MPFR_PREC_MIN)
            throw NumericError("mantissa_bits below MPFR minimum");
        if (!(cfg.compare_eps > 0 && cfg.compare_eps < 1) ||
            !(cfg.cycle_eps > 0 && cfg.cycle_eps < 1))
            throw NumericError("eps values must lie in (0,1)");
        return cfg;
    }

    void validate() const {
        if (!allow_low_precision && mantissa_bits < 64)
            throw NumericError("mantissa_bits must be >= 64");
        if (mantissa_bits < MPFR_PREC_MIN)
            throw NumericError("mantissa_bits below MPFR minimum");
        if (!(compare_eps > 0 && compare_eps < 1))
            throw NumericError("compare_eps must lie in (0,1)");
        if (!(cycle_eps > 0 && cycle_eps < 1))
            throw NumericError("cycle_eps must lie in (0,1)");
    }
};

/// Hard ceiling for adaptive precision doubling.
inline constexpr long kPrecisionCapBits = 4096;

class Real {
public:
    explicit Real(long prec_bits) { mpfr_init2(v_, prec(prec_bits)); mpfr_set_zero(v_, 1); }

    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    static Real zero(long bits) { return Real(bits); }

    static Real from_long(long value, long bits) {
        Real r(bits);
        mpfr_set_si(r.v_, value, MPFR_RNDN);
        return r;
    }

    static Real from_double(double value, long bits) {
        Real r(bits);
        mpfr_set_d(r.v_, value, MPFR_RNDN);
        if (mpfr_nan_p(r.v_)) throw NumericError("NaN input");
        return r;
    }

    /// Exact rational num/den, rounded once into the target width.
    static Real from_ratio(long num, long den, long bits) {
        if (den == 0) throw NumericError("zero denominator");
        Real r(bits);
        mpfr_set_si(r.v_, num, MPFR_RNDN); // exact for any long
        mpfr_div_si(r.v_, r.v_, den, MPFR_RNDN);
        return r;
    }

    /// Parses "a/b" (exact rational, one rounding) or a decimal literal.
    static Real from_string(std::string_view text, long bits) {
        std::string s(text);
        Real r(bits);
        if (s.find('/') != std::string::npos) {
            mpq_t q;
            mpq_init(q);
            if (mpq_set_str(q, s.c_str(), 10) != 0 || mpz_sgn(mpq_denref(q)) == 0) {
                mpq_clear(q);
                throw NumericError("cannot parse rational '" + s + "'");
            }
            mpq_canonicalize(q);
            mpfr_set_q(r.v_, q, MPFR_RNDN);
            mpq_clear(q);
        } else {
            if (s.empty() || mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
                throw NumericError("cannot parse number '" + s + "'");
        }
        if (!mpfr_number_p(r.v_)) throw NumericError("non-finite input '" + s + "'");
        return r;
    }

    /// 2^e at the given width (exact).
    static Real pow2(long e, long bits) {
        Real r(bits);
        mpfr_set_si_2exp(r.v_, 1, e, MPFR_RNDN);
        return r;
    }

    long precision() const { return static_cast<long>(mpfr_get_prec(v_)); }

    /// Same numeric value re-represented at a (usually wider) mantissa.
    /// Widening is exact.
    Real at_precision(long bits) const {
        Real r(bits);
        mpfr_set(r.v_, v_, MPFR_RNDN);
        return r;
    }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign_raw() const { return mpfr_sgn(v_); }

    /// log2 |x| within +-0.5, usable far beyond the double exponent range;
    /// -infinity for zero.
    double log2_magnitude() const {
        if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
        return static_cast<double>(mpfr_get_exp(v_)) - 0.5;
    }

    friend Real operator+(const Real& a, const Real& b) {
        Real r(std::max(a.precision(), b.precision()));
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a, const Real& b) {
        Real r(std::max(a.precision(), b.precision()));
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, const Real& b) {
        Real r(std::max(a.precision(), b.precision()));
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator/(const Real& a, const Real& b) {
        if (mpfr_zero_p(b.v_)) throw NumericError("division by zero");
        Real r(std::max(a.precision(), b.precision()));
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a) {
        Real r(a.precision());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    friend Real operator+(const Real& a, long b) {
        Real r(a.precision());
        mpfr_add_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator+(long a, const Real& b) { return b + a; }
    friend Real operator-(const Real& a, long b) {
        Real r(a.precision());
        mpfr_sub_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator-(long a, const Real& b) {
        Real r(b.precision());
        mpfr_si_sub(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, long b) {
        Real r(a.precision());
        mpfr_mul_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator*(long a, const Real& b) { return b * a; }
    friend Real operator/(const Real& a, long b) {
        if (b == 0) throw NumericError("division by zero");
        Real r(a.precision());
        mpfr_div_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator/(long a, const Real& b) {
        if (mpfr_zero_p(b.v_)) throw NumericError("division by zero");
        Real r(b.precision());
        mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }

    Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& o) {
        if (mpfr_zero_p(o.v_)) throw NumericError("division by zero");
        mpfr_div(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }

    friend int compare(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_); }
    friend bool operator<(const Real& a, const Real& b) { return compare(a, b) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return compare(a, b) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return compare(a, b) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return compare(a, b) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return compare(a, b) == 0; }
    friend bool operator!=(const Real& a, const Real& b) { return compare(a, b) != 0; }

    friend bool operator<(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) < 0; }
    friend bool operator>(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) > 0; }
    friend bool operator<=(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) <= 0; }
    friend bool operator>=(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) >= 0; }
    friend bool operator==(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) == 0; }

    friend Real sqrt(const Real& a) {
        if (mpfr_sgn(a.v_) < 0) throw NumericError("sqrt of negative value");
        Real r(a.precision());
        mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real abs(const Real& a) {
        Real r(a.precision());
        mpfr_abs(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real pow_ui(const Real& a, unsigned long n) {
        Real r(a.precision());
        mpfr_pow_ui(r.v_, a.v_, n, MPFR_RNDN);
        return r;
    }

    /// Decimal rendering. significant == 0 requests enough digits to read the
    /// binary value back exactly; output is deterministic for a given value.
    std::string to_string(std::size_t significant = 0) const {
        if (mpfr_zero_p(v_)) return "0";
        mpfr_exp_t exp = 0;
        char* raw = mpfr_get_str(nullptr, &exp, 10, significant, v_, MPFR_RNDN);
        if (raw == nullptr) throw NumericError("mpfr_get_str failed");
        std::string digits(raw);
        mpfr_free_str(raw);
        bool neg = !digits.empty() && digits[0] == '-';
        if (neg) digits.erase(0, 1);
        // strip trailing zeros (keep at least one digit)
        std::size_t last = digits.find_last_not_of('0');
        digits.erase(std::min(digits.size(), last + 1));
        if (digits.empty()) digits = "0";
        std::string out;
        long e = static_cast<long>(exp); // value = 0.digits * 10^e
        long nd = static_cast<long>(digits.size());
        if (e <= 0 && e > -8) {
            out = "0." + std::string(static_cast<std::size_t>(-e), '0') + digits;
        } else if (e > 0 && e <= nd) {
            out = digits.substr(0, static_cast<std::size_t>(e));
            if (e < nd) out += "." + digits.substr(static_cast<std::size_t>(e));
        } else if (e > nd && e <= nd + 8) {
            out = digits + std::string(static_cast<std::size_t>(e - nd), '0');
        } else {
            out = digits.substr(0, 1);
            if (digits.size() > 1) out += "." + digits.substr(1);
            out += "e" + std::to_string(e - 1);
        }
        return neg ? "-" + out : out;
    }

    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

private:
    static mpfr_prec_t prec(long bits) {
        if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX)
            throw NumericError("unsupported mantissa width");
        return static_cast<mpfr_prec_t>(bits);
    }
    mpfr_t v_;
};

/// Sign of `value`, certified against an evaluation-error band.
/// Positive iff value > err_bound, Negative iff value < -err_bound,
/// ZeroAmbiguous otherwise. Raising err_bound can only move answers toward
/// ZeroAmbiguous. Callers getting ZeroAmbiguous re-evaluate at doubled
/// mantissa width, up to kPrecisionCapBits.
inline Sign certified_sign(const Real& value, const Real& err_bound) {
    if (err_bound.sign_raw() < 0) throw NumericError("err_bound must be >= 0");
    if (value > err_bound) return Sign::Positive;
    if (value < -err_bound) return Sign::Negative;
    return Sign::ZeroAmbiguous;
}

/// Default error band at a given mantissa width: 2^(-bits/2).
inline Real sign_band(long bits) { return Real::pow2(-(bits / 2), bits); }

/// Escalates an evaluation through doubled mantissa widths until its sign is
/// certified or the cap is reached. `eval` maps a width to the value computed
/// at that width.
template <class Eval>
Sign adaptive_sign(Eval&& eval, long start_bits, long cap_bits = kPrecisionCapBits) {
    long bits = start_bits;
    for (;;) {
        Real v = eval(bits);
        Sign s = certified_sign(v, sign_band(bits));
        if (s != Sign::ZeroAmbiguous) return s;
        if (bits >= cap_bits) return Sign::ZeroAmbiguous;
        bits = std::min(bits * 2, cap_bits);
    }
}

/// Fixed-point decimal with exactly `places` digits after the point,
/// truncated toward zero.
inline std::string truncate_decimal(const Real& x, int places) {
    if (places < 0) throw NumericError("places must be >= 0");
    long work = x.precision() + 4 * places + 64;
    mpfr_t scaled;
    mpfr_init2(scaled, static_cast<mpfr_prec_t>(work));
    mpfr_set(scaled, x.raw(), MPFR_RNDN);
    mpfr_t ten;
    mpfr_init2(ten, static_cast<mpfr_prec_t>(work));
    mpfr_ui_pow_ui(ten, 10, static_cast<unsigned long>(places), MPFR_RNDN);
    mpfr_mul(scaled, scaled, ten, MPFR_RNDN);
    mpfr_trunc(scaled, scaled);
    mpz_t z;
    mpz_init(z);
    mpfr_get_z(z, scaled, MPFR_RNDZ);
    char* raw = mpz_get_str(nullptr, 10, z);
    std::string digits(raw);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(raw, digits.size() + 1);
    mpz_clear(z);
    mpfr_clear(ten);
    mpfr_clear(scaled);

    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(0, 1);
    if (static_cast<int>(digits.size()) <= places)
        digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    std::string out = digits.substr(0, digits.size() - static_cast<std::size_t>(places));
    if (places > 0) out += "." + digits.substr(digits.size() - static_cast<std::size_t>(places));
    return neg ? "-" + out : out;
}

/// Fixed-point decimal with `places` digits after the point, rounded to
/// nearest.
inline std::string round_decimal(const Real& x, int places) {
    if (places < 0) throw NumericError("places must be >= 0");
    long work = x.precision() + 4 * places + 64;
    mpfr_t scaled;
    mpfr_init2(scaled, static_cast<mpfr_prec_t>(work));
    mpfr_set(scaled, x.raw(), MPFR_RNDN);
    mpfr_t ten;
    mpfr_init2(ten, static_cast<mpfr_prec_t>(work));
    mpfr_ui_pow_ui(ten, 10, static_cast<unsigned long>(places), MPFR_RNDN);
    mpfr_mul(scaled, scaled, ten, MPFR_RNDN);
    mpfr_rint(scaled, scaled, MPFR_RNDN);
    mpz_t z;
    mpz_init(z);
    mpfr_get_z(z, scaled, MPFR_RNDZ);
    char* raw = mpz_get_str(nullptr, 10, z);
    std::string digits(raw);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(raw, digits.size() + 1);
    mpz_clear(z);
    mpfr_clear(ten);
    mpfr_clear(scaled);

    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(0, 1);
    if (static_cast<int>(digits.size()) <= places)
        digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    std::string out = digits.substr(0, digits.size() - static_cast<std::size_t>(places));
    if (places > 0) out += "." + digits.substr(digits.size() - static_cast<std::size_t>(places));
    return neg ? "-" + out : out;
}

} // namespace parrondo
