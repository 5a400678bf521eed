#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "sudler/contfrac.hpp"
#include "sudler/errors.hpp"
#include "sudler/ostrowski.hpp"

namespace sudler {

enum class Rigor { certified, heuristic };

// A log-domain quantity with an absolute error bound.  Certified values
// come from interval arithmetic and enclose the true quantity; heuristic
// values carry an error-analysis bound over non-certified libm calls.
struct LogValue {
    long double value = 0;
    double abs_error = 0;
    Rigor rigor = Rigor::certified;
};

enum class Method { direct, decomposed };

struct Budget {
    std::uint64_t max_terms = 2'000'000'000ULL;  // fast path
    std::uint64_t max_terms_certified = 4'000'000ULL;
    std::uint64_t cot_cap = 1'000'000ULL;
};

namespace detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr long double kPi = 3.141592653589793238462643383279502884L;

inline u64 to_u64(const mpz_class& z, const char* what) {
    if (z < 0 || mpz_sizeinbase(z.get_mpz_t(), 2) > 63)
        throw BudgetExceededError(std::string(what) + " does not fit 64 bits");
    mpz_class lowmask = (mpz_class(1) << 64) - 1;
    return mpz_class(z & lowmask).get_ui();
}

inline u128 mpz_to_u128(const mpz_class& z) {
    mpz_class mask = (mpz_class(1) << 64) - 1;
    u64 lo = mpz_class(z & mask).get_ui();
    u64 hi = mpz_class((z >> 64) & mask).get_ui();
    return (static_cast<u128>(hi) << 64) | lo;
}

inline long double u128_frac_to_ld(u128 x) {
    return std::ldexp(static_cast<long double>(static_cast<u64>(x >> 64)), -64) +
           std::ldexp(static_cast<long double>(static_cast<u64>(x)), -128);
}

} // namespace detail

// alpha as a 128-bit fixed-point enclosure [lo, lo + width]/2^128.
// n*alpha mod 1 is then exact integer arithmetic mod 2^128, which keeps
// the fast evaluator's argument error at n * width ulps.
struct FastAlpha {
    detail::u128 lo = 0;
    unsigned width_ulps = 0;
    long double approx = 0;

    static FastAlpha from_table(const ConvergentTable& t) {
        const Ival& a = t.alpha_enclosure();
        Real tmp(a.prec());
        mpz_class lo_z, hi_z;
        mpfr_mul_2ui(tmp.raw(), a.lo.raw(), 128, MPFR_RNDD);
        mpfr_get_z(lo_z.get_mpz_t(), tmp.raw(), MPFR_RNDD);
        mpfr_mul_2ui(tmp.raw(), a.hi.raw(), 128, MPFR_RNDU);
        mpfr_get_z(hi_z.get_mpz_t(), tmp.raw(), MPFR_RNDU);
        if (lo_z < 0 || hi_z > (mpz_class(1) << 128))
            throw InvalidSpecError("fast alpha: enclosure outside (0,1)");
        mpz_class w = hi_z - lo_z;
        if (w > 64)
            throw PrecisionExhaustedError("fast alpha: table enclosure wider than 64 ulps of 2^-128");
        FastAlpha f;
        f.lo = detail::mpz_to_u128(lo_z);
        f.width_ulps = static_cast<unsigned>(w.get_ui());
        f.approx = a.mid();
        return f;
    }
};

namespace detail {

// One term log|2 sin(pi (n alpha + shift))| in long double.  The zero-shift
// path reduces n alpha mod 1 exactly in u128 before converting, so the
// distance to the integers keeps full relative accuracy at any scale.
struct TermAccum {
    long double sum = 0;
    long double sum_abs = 0;
    double sum_inv_d = 0;
    double max_run = 0; // max |running sum| within this accumulation

    void add(const TermAccum& o) {
        double here = std::fabs(static_cast<double>(sum));
        max_run = std::max(max_run, here + o.max_run);
        sum += o.sum;
        sum_abs += o.sum_abs;
        sum_inv_d += o.sum_inv_d;
    }
};

constexpr long double kSingularTolFast = 1e-15L;

inline long double term_log2sin(u128 x, long double shift, u64 n, unsigned width_ulps,
                                double& inv_d_out) {
    long double d;
    if (shift == 0.0L) {
        u128 r = x;
        u128 c = static_cast<u128>(0) - x;
        if (c < r) r = c;
        if (r <= static_cast<u128>(n) * (width_ulps + 2))
            throw PrecisionExhaustedError("cannot certify |n alpha| away from the integers");
        d = u128_frac_to_ld(r);
    } else {
        long double f = u128_frac_to_ld(x) + shift;
        while (f >= 1.0L) f -= 1.0L;
        while (f < 0.0L) f += 1.0L;
        d = f <= 0.5L ? f : 1.0L - f;
        if (d < kSingularTolFast)
            throw SingularArgumentError("shifted argument is an integer within tolerance");
    }
    inv_d_out = static_cast<double>(1.0L / d);
    return std::log(2.0L * std::sin(kPi * d));
}

// Error bound for an accumulated run of fast terms.
//   - 2^-128-scale argument error from the alpha enclosure, amplified by
//     pi*cot(pi d) <= 1/d per term;
//   - libm slack per term (sinl/logl are a few ulp, not certified);
//   - long double accumulation rounding.
inline double fast_error_bound(const TermAccum& acc, u64 n_terms, u64 n_max, unsigned width_ulps,
                               bool shifted) {
    double arg_err = (static_cast<double>(n_max) * (width_ulps + 2)) * 2.939e-39; // * 2^-128
    if (shifted) arg_err += 1.1e-19;                                              // ld reduction
    double per_term = 2.2e-18 * (static_cast<double>(n_terms) + static_cast<double>(acc.sum_abs));
    double accum = 1.1e-19 * static_cast<double>(n_terms) * (acc.max_run + 1.0);
    return acc.sum_inv_d * arg_err + per_term + accum;
}

template <class Visit>
inline void accumulate_fast(const FastAlpha& fa, long double shift, u64 n_lo, u64 n_hi,
                            TermAccum& acc, Visit&& visit) {
    u128 x = static_cast<u128>(fa.lo) * static_cast<u128>(n_lo);
    for (u64 n = n_lo + 1; n <= n_hi; ++n) {
        x += fa.lo;
        double inv_d;
        long double v = term_log2sin(x, shift, n, fa.width_ulps, inv_d);
        acc.sum += v;
        acc.sum_abs += v < 0 ? -v : v;
        acc.sum_inv_d += inv_d;
        acc.max_run = std::max(acc.max_run, std::fabs(static_cast<double>(acc.sum)));
        visit(n, acc);
    }
}

} // namespace detail

// ---- fast evaluation --------------------------------------------------------

inline LogValue log_shifted_product_fast(const FastAlpha& fa, std::uint64_t N, long double shift,
                                         const Budget& budget = {}) {
    if (N > budget.max_terms) throw BudgetExceededError("fast product: N exceeds budget");
    detail::TermAccum acc;
    detail::accumulate_fast(fa, shift, 0, N, acc, [](detail::u64, const detail::TermAccum&) {});
    return LogValue{acc.sum, detail::fast_error_bound(acc, N, N, fa.width_ulps, shift != 0.0L),
                    Rigor::heuristic};
}

inline LogValue log_product_direct_fast(const FastAlpha& fa, std::uint64_t N,
                                        const Budget& budget = {}) {
    return log_shifted_product_fast(fa, N, 0.0L, budget);
}

// Deterministic block-structured streaming scan: calls
// vis.visit(N, logP_N, err) for N = 1..n_hi in increasing order.  The
// accumulator resets at fixed block boundaries, so the emitted values are
// identical whether blocks run serially or on a thread pool.  The visitor
// must start with empty tallies: parallel runs shard it by copying the
// initial state and fold the shards back with vis.merge in block order.
template <class Visitor>
void scan_log_products(const FastAlpha& fa, std::uint64_t n_hi, Visitor& vis, int threads = 1) {
    using namespace detail;
    constexpr u64 B = 1u << 20;
    if (n_hi == 0) return;
    u64 nblocks = (n_hi + B - 1) / B;

    if (threads <= 1 || nblocks == 1) {
        long double prefix = 0;
        TermAccum prefix_acc;
        for (u64 blk = 0; blk < nblocks; ++blk) {
            u64 lo = blk * B;
            u64 hi = std::min(n_hi, lo + B);
            TermAccum acc;
            u64 upto_max = hi;
            accumulate_fast(fa, 0.0L, lo, hi, acc, [&](u64 n, const TermAccum& a) {
                TermAccum total = prefix_acc;
                total.add(a);
                vis.visit(n, prefix + a.sum,
                          fast_error_bound(total, n, upto_max, fa.width_ulps, false));
            });
            prefix = prefix + acc.sum;
            prefix_acc.add(acc);
        }
        return;
    }

    // Phase 1: block partials in parallel.
    std::vector<TermAccum> parts(nblocks);
    auto run_range = [&](u64 b0, u64 b1) {
        for (u64 blk = b0; blk < b1; ++blk) {
            u64 lo = blk * B;
            u64 hi = std::min(n_hi, lo + B);
            accumulate_fast(fa, 0.0L, lo, hi, parts[blk], [](u64, const TermAccum&) {});
        }
    };
    {
        std::vector<std::thread> pool;
        u64 per = (nblocks + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            u64 b0 = std::min<u64>(nblocks, t * per);
            u64 b1 = std::min<u64>(nblocks, b0 + per);
            if (b0 < b1) pool.emplace_back(run_range, b0, b1);
        }
        for (auto& th : pool) th.join();
    }
    // Prefixes in block order.
    std::vector<long double> prefix(nblocks, 0);
    std::vector<TermAccum> prefix_acc(nblocks);
    for (u64 blk = 1; blk < nblocks; ++blk) {
        prefix[blk] = prefix[blk - 1] + parts[blk - 1].sum;
        prefix_acc[blk] = prefix_acc[blk - 1];
        prefix_acc[blk].add(parts[blk - 1]);
    }
    // Phase 2: per-block visitor shards, merged in order.
    std::vector<Visitor> shards(nblocks, vis);
    auto run_visit = [&](u64 b0, u64 b1) {
        for (u64 blk = b0; blk < b1; ++blk) {
            u64 lo = blk * B;
            u64 hi = std::min(n_hi, lo + B);
            TermAccum acc;
            accumulate_fast(fa, 0.0L, lo, hi, acc, [&](u64 n, const TermAccum& a) {
                TermAccum total = prefix_acc[blk];
                total.add(a);
                shards[blk].visit(n, prefix[blk] + a.sum,
                                  fast_error_bound(total, n, hi, fa.width_ulps, false));
            });
        }
    };
    {
        std::vector<std::thread> pool;
        u64 per = (nblocks + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            u64 b0 = std::min<u64>(nblocks, t * per);
            u64 b1 = std::min<u64>(nblocks, b0 + per);
            if (b0 < b1) pool.emplace_back(run_visit, b0, b1);
        }
        for (auto& th : pool) th.join();
    }
    for (u64 blk = 0; blk < nblocks; ++blk) vis.merge(std::move(shards[blk]));
}

// ---- certified evaluation ---------------------------------------------------

class CertifiedEval {
public:
    explicit CertifiedEval(const ConvergentTable& t, Budget budget = {})
        : t_(&t), budget_(budget), alpha_(t.alpha_enclosure()) {}

    // log P_N(alpha, x); shift == nullptr means the plain product (the
    // x = 0 case follows the identical code path with an exact zero).
    Ival log_product_ival(std::uint64_t N, const Ival* shift = nullptr) const {
        if (N > budget_.max_terms_certified)
            throw BudgetExceededError("certified product: N exceeds budget");
        mpfr_prec_t p = alpha_.prec();
        Ival acc(p);
        Ival y(p); // frac(n alpha)
        for (std::uint64_t n = 1; n <= N; ++n) {
            y = iv_reduce_mod1(iv_add(y, alpha_));
            Ival arg = shift ? iv_reduce_mod1(iv_add(y, *shift)) : y;
            acc = iv_add(acc, term(arg, shift != nullptr));
        }
        return acc;
    }

    LogValue log_product(std::uint64_t N, const Ival* shift = nullptr) const {
        if (N == 0) return LogValue{0.0L, 0.0, Rigor::certified};
        Ival v = log_product_ival(N, shift);
        return LogValue{v.mid(), v.rad(), Rigor::certified};
    }

    // Streaming prefix: fn(N, Ival of log P_N) for N = 1..n_hi.
    template <class Fn>
    void stream(std::uint64_t n_hi, Fn&& fn) const {
        if (n_hi > budget_.max_terms_certified)
            throw BudgetExceededError("certified stream: range exceeds budget");
        mpfr_prec_t p = alpha_.prec();
        Ival acc(p), y(p);
        for (std::uint64_t n = 1; n <= n_hi; ++n) {
            y = iv_reduce_mod1(iv_add(y, alpha_));
            acc = iv_add(acc, term(y));
            fn(n, acc);
        }
    }

    // Shifted arguments are declared singular when within 1e-13 of an
    // integer, matching the precondition of P_N(alpha, x); the plain
    // product has no such tolerance, only certification.
    Ival term(const Ival& arg, bool shifted = false) const {
        if (arg.lo.sgn() <= 0 || arg.hi.cmp_ui(1) >= 0) {
            if (arg.width() <= 1e-12)
                throw SingularArgumentError("product argument is an integer within tolerance");
            throw PrecisionExhaustedError("cannot certify distance of argument from integers");
        }
        if (shifted) {
            Real one_minus(arg.prec());
            mpfr_ui_sub(one_minus.raw(), 1, arg.lo.raw(), MPFR_RNDU);
            double dist_hi =
                std::min(arg.hi.to_double(MPFR_RNDU), one_minus.to_double(MPFR_RNDU));
            if (dist_hi < 1e-13)
                throw SingularArgumentError("shifted argument is an integer within tolerance");
        }
        return iv_log_2sin_pi(arg);
    }

private:
    const ConvergentTable* t_;
    Budget budget_;
    Ival alpha_;
};

// ---- spec operations --------------------------------------------------------

inline LogValue log_product_direct(const ConvergentTable& t, std::uint64_t N,
                                   Rigor rigor = Rigor::certified, const Budget& budget = {}) {
    if (N == 0) return LogValue{0.0L, 0.0, rigor};
    if (rigor == Rigor::certified) return CertifiedEval(t, budget).log_product(N);
    return log_product_direct_fast(FastAlpha::from_table(t), N, budget);
}

inline LogValue log_shifted_product(const ConvergentTable& t, std::uint64_t N, long double x,
                                    Rigor rigor = Rigor::certified, const Budget& budget = {}) {
    if (N == 0) return LogValue{0.0L, 0.0, rigor};
    if (rigor == Rigor::certified) {
        CertifiedEval ev(t, budget);
        Ival xv = Ival::exact_ld(x, t.precision());
        return ev.log_product(N, &xv);
    }
    return log_shifted_product_fast(FastAlpha::from_table(t), N, x, budget);
}

// eps_l(N) = q_l * sum_{k=l+1}^{K-1} (-1)^{k+l} b_k delta_k, for l = 0..K-1.
// eps_{K-1} is the empty sum and is exactly zero.
struct EpsilonVector {
    std::vector<Ival> eps;

    const Ival& at(int l) const {
        if (l < 0 || l >= static_cast<int>(eps.size()))
            throw OutOfRangeError("epsilon index out of range");
        return eps[l];
    }
};

inline EpsilonVector epsilon_vector(const OstrowskiDigits& d) {
    const ConvergentTable& t = d.table();
    int K = d.depth();
    mpfr_prec_t p = t.precision();
    EpsilonVector ev;
    ev.eps.reserve(K);
    for (int l = 0; l < K; ++l) {
        Ival s(p); // exact zero
        for (int k = K - 1; k > l; --k) {
            Ival term = iv_mul_z(t.delta(k), d.digit(k));
            s = ((k - l) % 2 == 1) ? iv_sub(s, term) : iv_add(s, term);
        }
        ev.eps.push_back(iv_mul_z(s, t.q(l)));
    }
    return ev;
}

inline std::vector<long double> epsilon_vector_ld(const OstrowskiDigits& d) {
    EpsilonVector ev = epsilon_vector(d);
    std::vector<long double> r;
    r.reserve(ev.eps.size());
    for (const auto& e : ev.eps) r.push_back(e.mid());
    return r;
}

// Modified cotangent sum
//   V_l(x) = sum_{n=1}^{q_l - 1} sin(pi n delta_l / q_l)
//            * cot(pi (n (-1)^l p_l + x) / q_l).
// n (-1)^l p_l is reduced mod q_l up front (cot has period pi), which keeps
// every argument inside (0, pi).
struct CotValue {
    long double value = 0;
    double abs_error = 0;
};

inline CotValue cotangent_sum(const ConvergentTable& t, int l, long double x,
                              const Budget& budget = {}) {
    using namespace detail;
    if (l < 1 || l > t.depth() - 1) throw OutOfRangeError("cotangent_sum: need 1 <= l <= K-1");
    if (!(x > -1.0L && x < 1.0L)) throw DomainError("cotangent_sum: x must be in (-1,1)");
    u64 q = to_u64(t.q(l), "q_l");
    if (q > budget.cot_cap) throw BudgetExceededError("cotangent_sum: q_l exceeds cap");
    if (q == 1) return CotValue{0.0L, 0.0};

    mpz_class pmodq_z = t.p(l) % t.q(l);
    u64 pmodq = to_u64(pmodq_z, "p_l mod q_l");
    bool odd = (l % 2) != 0;
    long double dl = t.delta(l).mid();
    long double qld = static_cast<long double>(q);

    long double sum = 0, comp = 0;
    double abs_cot = 0;
    u64 m = 0;
    for (u64 n = 1; n < q; ++n) {
        m += pmodq;
        if (m >= q) m -= q;
        u64 mm = odd ? q - m : m;
        long double arg = kPi * (static_cast<long double>(mm) + x) / qld;
        long double s = std::sin(arg);
        long double c = std::cos(arg);
        long double w = std::sin(kPi * static_cast<long double>(n) * dl / qld);
        long double term = w * (c / s);
        abs_cot += std::fabs(static_cast<double>(c / s));
        // compensated accumulation
        long double yk = term - comp;
        long double tk = sum + yk;
        comp = (tk - sum) - yk;
        sum = tk;
    }
    double err = (abs_cot + std::fabs(static_cast<double>(sum))) * 3e-18 + 1e-18 * q;
    return CotValue{sum, err};
}

// ---- decomposition ----------------------------------------------------------

inline long double decomposition_shift(int l, long double b_qdelta_eps, long double q_l) {
    long double s = b_qdelta_eps / q_l;
    return (l % 2 == 0) ? s : -s;
}

// log P_N via the shifted-product decomposition, evaluated literally:
//   sum over l, b < b_l of log P_{q_l}(alpha, (-1)^l (b q_l delta_l + eps_l)/q_l).
inline LogValue log_product_decomposed(const OstrowskiDigits& d, Rigor rigor = Rigor::certified,
                                       const Budget& budget = {}) {
    const ConvergentTable& t = d.table();
    int K = d.depth();
    if (rigor == Rigor::certified) {
        CertifiedEval ev(t, budget);
        EpsilonVector eps = epsilon_vector(d);
        mpfr_prec_t p = t.precision();
        Ival acc(p);
        for (int l = 0; l < K; ++l) {
            detail::u64 bl = detail::to_u64(d.digit(l), "digit");
            if (bl == 0) continue;
            detail::u64 ql = detail::to_u64(t.q(l), "q_l");
            Ival qdelta = iv_mul_z(t.delta(l), t.q(l));
            for (detail::u64 b = 0; b < bl; ++b) {
                Ival shift = iv_add(iv_mul_ui(qdelta, b), eps.at(l));
                shift = iv_div_z(shift, t.q(l));
                if (l % 2 == 1) shift = iv_neg(shift);
                acc = iv_add(acc, ev.log_product_ival(ql, &shift));
            }
        }
        return LogValue{acc.mid(), acc.rad(), Rigor::certified};
    }
    FastAlpha fa = FastAlpha::from_table(t);
    std::vector<long double> eps = epsilon_vector_ld(d);
    long double acc = 0;
    double err = 0;
    for (int l = 0; l < K; ++l) {
        detail::u64 bl = detail::to_u64(d.digit(l), "digit");
        if (bl == 0) continue;
        detail::u64 ql = detail::to_u64(t.q(l), "q_l");
        long double qdelta = iv_mul_z(t.delta(l), t.q(l)).mid();
        long double qld = static_cast<long double>(ql);
        for (detail::u64 b = 0; b < bl; ++b) {
            long double shift = decomposition_shift(l, b * qdelta + eps[l], qld);
            LogValue inner = log_shifted_product_fast(fa, ql, shift, budget);
            acc += inner.value;
            err += inner.abs_error + 6e-19;
        }
    }
    return LogValue{acc, err, Rigor::heuristic};
}

// Reflection defect: log P_N + log P_{q_K - N - 1} - log q_K.
inline LogValue reflection_defect(const ConvergentTable& t, int K, const mpz_class& N,
                                  Rigor rigor = Rigor::heuristic, const Budget& budget = {}) {
    if (K < 1 || K > t.depth()) throw OutOfRangeError("reflection_defect: bad K");
    if (N < 0 || N >= t.q(K)) throw OutOfRangeError("reflection_defect: need 0 <= N < q_K");
    mpz_class mirror = t.q(K) - N - 1;
    detail::u64 n1 = detail::to_u64(N, "N");
    detail::u64 n2 = detail::to_u64(mirror, "q_K - N - 1");
    LogValue a = log_product_direct(t, n1, rigor, budget);
    LogValue b = log_product_direct(t, n2, rigor, budget);
    Ival lq = iv_log(Ival::exact_z(t.q(K), t.has_deltas() ? t.precision() : 128));
    return LogValue{a.value + b.value - lq.mid(), a.abs_error + b.abs_error + lq.rad() + 1e-18,
                    rigor == Rigor::certified && a.rigor == Rigor::certified ? Rigor::certified
                                                                             : Rigor::heuristic};
}

// ---- decomposed scan --------------------------------------------------------
//
// Emits (N, log P_N by decomposition) for every N < n_limit in increasing
// order.  Digits are enumerated most-significant-first, so sibling
// subtrees share the perturbation eps and the per-digit block prefix sums
// are evaluated once per (level, eps) context:
//   eps_{l-1} = -q_{l-1} (b_l delta_l + eps_l / q_l).

namespace detail {

template <class Fn>
struct CertDecompScan {
    const ConvergentTable& t;
    CertifiedEval ev;
    mpz_class n_limit;
    Fn& emit;

    CertDecompScan(const ConvergentTable& tt, const mpz_class& lim, const Budget& budget, Fn& f)
        : t(tt), ev(tt, budget), n_limit(lim), emit(f) {}

    void run() {
        mpfr_prec_t p = t.precision();
        Ival eps0(p);
        rec(t.depth() - 1, eps0, false, Ival(p), mpz_class(0));
    }

    void rec(int l, const Ival& eps, bool saturated_above, const Ival& acc, const mpz_class& partial) {
        if (l < 0) {
            emit(partial, LogValue{acc.mid(), acc.rad(), Rigor::certified});
            return;
        }
        mpz_class cap = (l == 0) ? mpz_class(t.a(1) - 1) : t.a(l + 1);
        if (saturated_above) cap = 0;
        u64 ql = to_u64(t.q(l), "q_l");
        Ival qdelta = iv_mul_z(t.delta(l), t.q(l));
        Ival block_prefix = acc;
        for (mpz_class v = 0; v <= cap; ++v) {
            mpz_class child_partial = partial + v * t.q(l);
            if (child_partial >= n_limit) break;
            if (v > 0) {
                // extend prefix with the b = v-1 inner product
                Ival shift = iv_add(iv_mul_z(qdelta, mpz_class(v - 1)), eps);
                shift = iv_div_z(shift, t.q(l));
                if (l % 2 == 1) shift = iv_neg(shift);
                block_prefix = iv_add(block_prefix, ev.log_product_ival(ql, &shift));
            }
            Ival child_eps(eps.prec());
            if (l > 0) {
                child_eps = iv_add(iv_mul_z(t.delta(l), v), iv_div_z(eps, t.q(l)));
                child_eps = iv_neg(iv_mul_z(child_eps, t.q(l - 1)));
            }
            bool sat = (l > 0) && (v == t.a(l + 1));
            rec(l - 1, child_eps, sat, block_prefix, child_partial);
        }
    }
};

template <class Fn>
struct FastDecompScan {
    const ConvergentTable& t;
    FastAlpha fa;
    Budget budget;
    mpz_class n_limit;
    Fn& emit;
    std::vector<long double> delta_ld;
    std::vector<long double> q_ld;

    FastDecompScan(const ConvergentTable& tt, const mpz_class& lim, const Budget& b, Fn& f)
        : t(tt), fa(FastAlpha::from_table(tt)), budget(b), n_limit(lim), emit(f) {
        int K = t.depth();
        delta_ld.resize(K + 1);
        q_ld.resize(K + 1);
        for (int k = 0; k <= K; ++k) {
            delta_ld[k] = t.delta(k).mid();
            q_ld[k] = static_cast<long double>(to_u64(t.q(k), "q_k"));
        }
    }

    void run() { rec(t.depth() - 1, 0.0L, false, 0.0L, 0.0, mpz_class(0)); }

    void rec(int l, long double eps, bool saturated_above, long double acc, double err,
             const mpz_class& partial) {
        if (l < 0) {
            emit(partial, LogValue{acc, err, Rigor::heuristic});
            return;
        }
        mpz_class cap = (l == 0) ? mpz_class(t.a(1) - 1) : t.a(l + 1);
        if (saturated_above) cap = 0;
        u64 ql = to_u64(t.q(l), "q_l");
        long double qdelta = delta_ld[l] * q_ld[l];
        long double block_prefix = acc;
        double block_err = err;
        for (mpz_class v = 0; v <= cap; ++v) {
            mpz_class child_partial = partial + v * t.q(l);
            if (child_partial >= n_limit) break;
            if (v > 0) {
                long double b_val = static_cast<long double>(v.get_d()) - 1.0L;
                long double shift = decomposition_shift(l, b_val * qdelta + eps, q_ld[l]);
                LogValue inner = log_shifted_product_fast(fa, ql, shift, budget);
                block_prefix += inner.value;
                block_err += inner.abs_error + 6e-19;
            }
            long double child_eps = 0.0L;
            if (l > 0)
                child_eps = -q_ld[l - 1] *
                            (static_cast<long double>(v.get_d()) * delta_ld[l] + eps / q_ld[l]);
            bool sat = (l > 0) && (v == t.a(l + 1));
            rec(l - 1, child_eps, sat, block_prefix, block_err, child_partial);
        }
    }
};

} // namespace detail

template <class Fn>
void decomposed_scan(const ConvergentTable& t, const mpz_class& n_limit, Rigor rigor, Fn&& emit,
                     const Budget& budget = {}) {
    if (n_limit > t.q(t.depth()))
        throw OutOfRangeError("decomposed_scan: n_limit exceeds q_K");
    if (rigor == Rigor::certified) {
        detail::CertDecompScan<Fn> s(t, n_limit, budget, emit);
        s.run();
    } else {
        detail::FastDecompScan<Fn> s(t, n_limit, budget, emit);
        s.run();
    }
}

} // namespace sudler
