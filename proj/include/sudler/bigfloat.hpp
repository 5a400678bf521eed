#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>

#include "sudler/errors.hpp"

namespace sudler {

// RAII wrapper around a single mpfr_t with an explicit precision.
class Real {
public:
    explicit Real(mpfr_prec_t prec = 64) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    Real(const Real& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, MPFR_PREC_MIN);
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
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    void set_ui(unsigned long u) { mpfr_set_ui(v_, u, MPFR_RNDN); }
    void set_z(const mpz_class& z, mpfr_rnd_t r) { mpfr_set_z(v_, z.get_mpz_t(), r); }
    void set_ld(long double x, mpfr_rnd_t r) { mpfr_set_ld(v_, x, r); }

    double to_double(mpfr_rnd_t r = MPFR_RNDN) const { return mpfr_get_d(v_, r); }
    long double to_long_double(mpfr_rnd_t r = MPFR_RNDN) const { return mpfr_get_ld(v_, r); }

    int sgn() const { return mpfr_sgn(v_); }
    int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }
    int cmp_ui(unsigned long u) const { return mpfr_cmp_ui(v_, u); }
    int cmp_d(double d) const { return mpfr_cmp_d(v_, d); }
    bool is_number() const { return mpfr_number_p(v_) != 0; }

private:
    mpfr_t v_;
};

// Closed interval [lo, hi] with outward-rounded endpoint arithmetic.
// All operations return intervals that enclose the exact result.
struct Ival {
    Real lo, hi;

    explicit Ival(mpfr_prec_t prec = 64) : lo(prec), hi(prec) {}

    mpfr_prec_t prec() const { return std::max(lo.prec(), hi.prec()); }

    static Ival exact_ui(unsigned long u, mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_set_ui(r.lo.raw(), u, MPFR_RNDD);
        mpfr_set_ui(r.hi.raw(), u, MPFR_RNDU);
        return r;
    }
    static Ival exact_z(const mpz_class& z, mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_set_z(r.lo.raw(), z.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(r.hi.raw(), z.get_mpz_t(), MPFR_RNDU);
        return r;
    }
    static Ival exact_ld(long double x, mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_set_ld(r.lo.raw(), x, MPFR_RNDD);
        mpfr_set_ld(r.hi.raw(), x, MPFR_RNDU);
        return r;
    }
    // num/den with den > 0.
    static Ival ratio_z(const mpz_class& num, const mpz_class& den, mpfr_prec_t prec) {
        Ival r(prec);
        mpfr_set_z(r.lo.raw(), num.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(r.lo.raw(), r.lo.raw(), den.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(r.hi.raw(), num.get_mpz_t(), MPFR_RNDU);
        mpfr_div_z(r.hi.raw(), r.hi.raw(), den.get_mpz_t(), MPFR_RNDU);
        return r;
    }

    bool contains_zero() const { return lo.sgn() <= 0 && hi.sgn() >= 0; }
    bool is_positive() const { return lo.sgn() > 0; }
    bool is_negative() const { return hi.sgn() < 0; }

    double width() const {
        Real w(64);
        mpfr_sub(w.raw(), hi.raw(), lo.raw(), MPFR_RNDU);
        return w.to_double(MPFR_RNDU);
    }
    long double mid() const {
        Real m(std::max(lo.prec(), hi.prec()));
        mpfr_add(m.raw(), lo.raw(), hi.raw(), MPFR_RNDN);
        mpfr_div_2ui(m.raw(), m.raw(), 1, MPFR_RNDN);
        return m.to_long_double();
    }
    // Radius around mid(), padded for the conversions above.
    double rad() const {
        double w = width();
        long double m = mid();
        double pad = static_cast<double>((m < 0 ? -m : m)) * 1e-17 + 1e-300;
        return 0.5 * w + pad;
    }
};

inline Ival iv_add(const Ival& a, const Ival& b) {
    Ival r(std::max(a.prec(), b.prec()));
    mpfr_add(r.lo.raw(), a.lo.raw(), b.lo.raw(), MPFR_RNDD);
    mpfr_add(r.hi.raw(), a.hi.raw(), b.hi.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_sub(const Ival& a, const Ival& b) {
    Ival r(std::max(a.prec(), b.prec()));
    mpfr_sub(r.lo.raw(), a.lo.raw(), b.hi.raw(), MPFR_RNDD);
    mpfr_sub(r.hi.raw(), a.hi.raw(), b.lo.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_neg(const Ival& a) {
    Ival r(a.prec());
    mpfr_neg(r.lo.raw(), a.hi.raw(), MPFR_RNDD);
    mpfr_neg(r.hi.raw(), a.lo.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_abs(const Ival& a) {
    if (a.lo.sgn() >= 0) return a;
    if (a.hi.sgn() <= 0) return iv_neg(a);
    Ival r(a.prec());
    mpfr_set_ui(r.lo.raw(), 0, MPFR_RNDD);
    Real nl(a.prec());
    mpfr_neg(nl.raw(), a.lo.raw(), MPFR_RNDU);
    if (mpfr_cmp(nl.raw(), a.hi.raw()) > 0)
        mpfr_set(r.hi.raw(), nl.raw(), MPFR_RNDU);
    else
        mpfr_set(r.hi.raw(), a.hi.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_mul_z(const Ival& a, const mpz_class& z) {
    Ival r(a.prec());
    if (mpz_sgn(z.get_mpz_t()) >= 0) {
        mpfr_mul_z(r.lo.raw(), a.lo.raw(), z.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(r.hi.raw(), a.hi.raw(), z.get_mpz_t(), MPFR_RNDU);
    } else {
        mpfr_mul_z(r.lo.raw(), a.hi.raw(), z.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(r.hi.raw(), a.lo.raw(), z.get_mpz_t(), MPFR_RNDU);
    }
    return r;
}

inline Ival iv_mul_ui(const Ival& a, unsigned long u) {
    Ival r(a.prec());
    mpfr_mul_ui(r.lo.raw(), a.lo.raw(), u, MPFR_RNDD);
    mpfr_mul_ui(r.hi.raw(), a.hi.raw(), u, MPFR_RNDU);
    return r;
}

inline Ival iv_div_z(const Ival& a, const mpz_class& z) {
    if (mpz_sgn(z.get_mpz_t()) == 0) throw DomainError("interval division by zero");
    Ival r(a.prec());
    if (mpz_sgn(z.get_mpz_t()) > 0) {
        mpfr_div_z(r.lo.raw(), a.lo.raw(), z.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(r.hi.raw(), a.hi.raw(), z.get_mpz_t(), MPFR_RNDU);
    } else {
        mpfr_div_z(r.lo.raw(), a.hi.raw(), z.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(r.hi.raw(), a.lo.raw(), z.get_mpz_t(), MPFR_RNDU);
    }
    return r;
}

// General multiplication; endpoint candidates with directed rounding.
inline Ival iv_mul(const Ival& a, const Ival& b) {
    mpfr_prec_t p = std::max(a.prec(), b.prec());
    Ival r(p);
    Real t(p);
    bool first = true;
    const Real* as[2] = {&a.lo, &a.hi};
    const Real* bs[2] = {&b.lo, &b.hi};
    for (const Real* x : as) {
        for (const Real* y : bs) {
            mpfr_mul(t.raw(), x->raw(), y->raw(), MPFR_RNDD);
            if (first || mpfr_cmp(t.raw(), r.lo.raw()) < 0) mpfr_set(r.lo.raw(), t.raw(), MPFR_RNDD);
            mpfr_mul(t.raw(), x->raw(), y->raw(), MPFR_RNDU);
            if (first || mpfr_cmp(t.raw(), r.hi.raw()) > 0) mpfr_set(r.hi.raw(), t.raw(), MPFR_RNDU);
            first = false;
        }
    }
    return r;
}

// 1/a for intervals certified away from zero.
inline Ival iv_inv(const Ival& a) {
    if (a.contains_zero()) throw PrecisionExhaustedError("interval reciprocal straddles zero");
    Ival r(a.prec());
    mpfr_ui_div(r.lo.raw(), 1, a.hi.raw(), MPFR_RNDD);
    mpfr_ui_div(r.hi.raw(), 1, a.lo.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_log(const Ival& a) {
    if (a.lo.sgn() <= 0)
        throw PrecisionExhaustedError("interval log of nonpositive lower bound");
    Ival r(a.prec());
    mpfr_log(r.lo.raw(), a.lo.raw(), MPFR_RNDD);
    mpfr_log(r.hi.raw(), a.hi.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_sqrt_z(const mpz_class& z, mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_set_z(r.lo.raw(), z.get_mpz_t(), MPFR_RNDD);
    mpfr_sqrt(r.lo.raw(), r.lo.raw(), MPFR_RNDD);
    mpfr_set_z(r.hi.raw(), z.get_mpz_t(), MPFR_RNDU);
    mpfr_sqrt(r.hi.raw(), r.hi.raw(), MPFR_RNDU);
    return r;
}

inline Ival iv_pi(mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_const_pi(r.lo.raw(), MPFR_RNDD);
    mpfr_const_pi(r.hi.raw(), MPFR_RNDU);
    return r;
}

// Certified comparison: -1 if a < b surely, +1 if a > b surely, 0 if the
// enclosures overlap.
inline int iv_cmp(const Ival& a, const Ival& b) {
    if (mpfr_cmp(a.hi.raw(), b.lo.raw()) < 0) return -1;
    if (mpfr_cmp(a.lo.raw(), b.hi.raw()) > 0) return +1;
    return 0;
}

// Subtract floor(lo) and return an interval in [0, 1+width).  The caller
// decides what to do when the result touches the integers.
inline Ival iv_reduce_mod1(const Ival& t, mpz_class* k_out = nullptr) {
    mpz_class k;
    mpfr_get_z(k.get_mpz_t(), t.lo.raw(), MPFR_RNDD);
    Ival r(t.prec());
    mpfr_sub_z(r.lo.raw(), t.lo.raw(), k.get_mpz_t(), MPFR_RNDD);
    mpfr_sub_z(r.hi.raw(), t.hi.raw(), k.get_mpz_t(), MPFR_RNDU);
    if (k_out) *k_out = k;
    return r;
}

// Enclosure of sin(pi * x) for x in [0, 1].  Monotone on [0,1/2] and
// [1/2,1]; the straddling case is capped at 1.
inline Ival iv_sin_pi01(const Ival& x) {
    mpfr_prec_t p = x.prec();
    Ival pi = iv_pi(p);
    Ival t(p);
    mpfr_mul(t.lo.raw(), x.lo.raw(), pi.lo.raw(), MPFR_RNDD);
    mpfr_mul(t.hi.raw(), x.hi.raw(), pi.hi.raw(), MPFR_RNDU);
    Real half_lo(p), half_hi(p);
    mpfr_div_2ui(half_lo.raw(), pi.lo.raw(), 1, MPFR_RNDD);
    mpfr_div_2ui(half_hi.raw(), pi.hi.raw(), 1, MPFR_RNDU);

    Ival s(p);
    if (mpfr_cmp(t.hi.raw(), half_lo.raw()) <= 0) {
        mpfr_sin(s.lo.raw(), t.lo.raw(), MPFR_RNDD);
        mpfr_sin(s.hi.raw(), t.hi.raw(), MPFR_RNDU);
    } else if (mpfr_cmp(t.lo.raw(), half_hi.raw()) >= 0) {
        mpfr_sin(s.lo.raw(), t.hi.raw(), MPFR_RNDD);
        mpfr_sin(s.hi.raw(), t.lo.raw(), MPFR_RNDU);
    } else {
        Real s1(p), s2(p);
        mpfr_sin(s1.raw(), t.lo.raw(), MPFR_RNDD);
        mpfr_sin(s2.raw(), t.hi.raw(), MPFR_RNDD);
        if (mpfr_cmp(s1.raw(), s2.raw()) < 0)
            mpfr_set(s.lo.raw(), s1.raw(), MPFR_RNDD);
        else
            mpfr_set(s.lo.raw(), s2.raw(), MPFR_RNDD);
        mpfr_set_ui(s.hi.raw(), 1, MPFR_RNDU);
    }
    return s;
}

// log(2 sin(pi x)) for an enclosure x certified inside (0, 1).
inline Ival iv_log_2sin_pi(const Ival& x) {
    if (x.lo.sgn() <= 0 || x.hi.cmp_ui(1) >= 0)
        throw PrecisionExhaustedError("log|2 sin(pi x)|: enclosure touches the integers");
    Ival s = iv_sin_pi01(x);
    Ival two_s(s.prec());
    mpfr_mul_2ui(two_s.lo.raw(), s.lo.raw(), 1, MPFR_RNDD);
    mpfr_mul_2ui(two_s.hi.raw(), s.hi.raw(), 1, MPFR_RNDU);
    return iv_log(two_s);
}

} // namespace sudler
