#pragma once

// Test-side oracles, independent of the library's interval machinery:
// plain MPFR at fixed high precision for values, brute-force enumeration
// for combinatorial claims.

#include <gmpxx.h>
#include <mpfr.h>

#include <functional>
#include <vector>

namespace oracle {

constexpr mpfr_prec_t kPrec = 320;

struct Mpfr {
    mpfr_t v;
    Mpfr() { mpfr_init2(v, kPrec); mpfr_set_zero(v, 1); }
    explicit Mpfr(double d) { mpfr_init2(v, kPrec); mpfr_set_d(v, d, MPFR_RNDN); }
    Mpfr(const Mpfr& o) { mpfr_init2(v, kPrec); mpfr_set(v, o.v, MPFR_RNDN); }
    Mpfr& operator=(const Mpfr& o) { mpfr_set(v, o.v, MPFR_RNDN); return *this; }
    ~Mpfr() { mpfr_clear(v); }
    double d() const { return mpfr_get_d(v, MPFR_RNDN); }
    long double ld() const { return mpfr_get_ld(v, MPFR_RNDN); }
};

// (a + b sqrt(d))/c at kPrec bits.
inline Mpfr quadratic_value(long d, long a, long b, long c) {
    Mpfr r;
    mpfr_sqrt_ui(r.v, static_cast<unsigned long>(d), MPFR_RNDN);
    mpfr_mul_si(r.v, r.v, b, MPFR_RNDN);
    mpfr_add_si(r.v, r.v, a, MPFR_RNDN);
    mpfr_div_si(r.v, r.v, c, MPFR_RNDN);
    return r;
}

inline Mpfr golden_value() { return quadratic_value(5, -1, 1, 2); }

// |q alpha - p|
inline Mpfr delta_value(const Mpfr& alpha, const mpz_class& q, const mpz_class& p) {
    Mpfr r;
    mpfr_mul_z(r.v, alpha.v, q.get_mpz_t(), MPFR_RNDN);
    mpfr_sub_z(r.v, r.v, p.get_mpz_t(), MPFR_RNDN);
    mpfr_abs(r.v, r.v, MPFR_RNDN);
    return r;
}

// log|2 sin(pi (n alpha + x))| summed for n = 1..N.
inline Mpfr log_product(const Mpfr& alpha, unsigned long N, const Mpfr* shift = nullptr) {
    Mpfr acc, t, pi;
    mpfr_const_pi(pi.v, MPFR_RNDN);
    for (unsigned long n = 1; n <= N; ++n) {
        mpfr_mul_ui(t.v, alpha.v, n, MPFR_RNDN);
        if (shift) mpfr_add(t.v, t.v, shift->v, MPFR_RNDN);
        mpfr_frac(t.v, t.v, MPFR_RNDN); // in (-1,1)
        mpfr_mul(t.v, t.v, pi.v, MPFR_RNDN);
        mpfr_sin(t.v, t.v, MPFR_RNDN);
        mpfr_abs(t.v, t.v, MPFR_RNDN);
        mpfr_mul_2ui(t.v, t.v, 1, MPFR_RNDN);
        mpfr_log(t.v, t.v, MPFR_RNDN);
        mpfr_add(acc.v, acc.v, t.v, MPFR_RNDN);
    }
    return acc;
}

// All valid Ostrowski digit strings of depth K for digit caps a[0..K-1]
// (a[l] = a_{l+1}), visiting each string once.
inline void all_digit_strings(const std::vector<long>& a, int K,
                              const std::function<void(const std::vector<long>&)>& fn) {
    std::vector<long> b(K, 0);
    std::function<void(int)> rec = [&](int l) {
        if (l == K) {
            fn(b);
            return;
        }
        long cap = (l == 0) ? a[0] - 1 : a[l];
        for (long v = 0; v <= cap; ++v) {
            b[l] = v;
            bool ok = !(l >= 1 && b[l] == a[l] && b[l - 1] != 0);
            if (ok) rec(l + 1);
        }
        b[l] = 0;
    };
    rec(0);
}

} // namespace oracle
