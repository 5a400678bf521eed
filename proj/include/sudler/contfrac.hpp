#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "sudler/alpha.hpp"
#include "sudler/bigfloat.hpp"
#include "sudler/errors.hpp"

namespace sudler {

namespace detail {

inline mpfr_prec_t env_min_precision() {
    static mpfr_prec_t cached = [] {
        const char* s = std::getenv("SUDLER_LAB_PRECISION_BITS");
        if (!s) return static_cast<mpfr_prec_t>(0);
        long v = std::atol(s);
        return static_cast<mpfr_prec_t>(v > 0 ? v : 0);
    }();
    return cached;
}

// Quotient source normalized to alpha - a0 in (0,1); emits a_1, a_2, ...
class QuotientStream {
public:
    virtual ~QuotientStream() = default;
    virtual const mpz_class& a0() const = 0;
    // Returns false when the next quotient cannot be certified.
    virtual bool next(mpz_class& a) = 0;
};

// Exact expansion of (P0 + sqrt(D)) / Q0 via the standard P,Q iteration.
// All arithmetic is integral; D is fixed after an initial rescale that
// ensures Q | D - P^2.
class SurdStream final : public QuotientStream {
public:
    explicit SurdStream(const QuadraticAlpha& qa) {
        if (qa.d <= 0 || mpz_perfect_square_p(qa.d.get_mpz_t()))
            throw InvalidSpecError("quadratic alpha is not irrational");
        if (qa.b == 0 || qa.c == 0) throw InvalidSpecError("quadratic alpha: b, c must be nonzero");
        if (qa.b > 0) {
            P_ = qa.a;
            Q_ = qa.c;
        } else {
            P_ = -qa.a;
            Q_ = -qa.c;
        }
        D_ = qa.d * qa.b * qa.b;
        mpz_class rem = (D_ - P_ * P_) % Q_;
        if (rem != 0) {
            mpz_class t = abs(Q_);
            P_ *= t;
            D_ *= t * t;
            Q_ *= t;
        }
        mpz_sqrt(s_.get_mpz_t(), D_.get_mpz_t());
        a0_ = floor_value();
        P_ -= a0_ * Q_; // now x in (0,1)
        step_reciprocal();
    }

    const mpz_class& a0() const override { return a0_; }

    bool next(mpz_class& a) override {
        a = floor_value();
        P_ -= a * Q_;
        step_reciprocal();
        return true;
    }

private:
    // sign of (P + sqrt(D))/Q - m
    int cmp_with_int(const mpz_class& m) const {
        mpz_class r = P_ - m * Q_;
        int sign_num;
        if (r >= 0) {
            sign_num = +1;
        } else {
            mpz_class t = -r;
            sign_num = (D_ > t * t) ? +1 : -1;
        }
        return (Q_ > 0) ? sign_num : -sign_num;
    }

    mpz_class floor_value() const {
        mpz_class f;
        mpz_class num = (Q_ > 0) ? mpz_class(P_ + s_) : mpz_class(P_ - s_ - 1);
        mpz_fdiv_q(f.get_mpz_t(), num.get_mpz_t(), Q_.get_mpz_t());
        // Candidate is within one of the truth; verify exactly.
        while (cmp_with_int(f) < 0) f -= 1;
        while (cmp_with_int(f + 1) >= 0) f += 1;
        return f;
    }

    // x <- 1/x for x = (P + sqrt(D))/Q in (0,1).
    void step_reciprocal() {
        P_ = -P_;
        mpz_class nq = (D_ - P_ * P_) / Q_;
        Q_ = nq;
    }

    mpz_class P_, Q_, D_, s_, a0_;
};

// Quotients straight off the preperiod/period lists.  An infinite
// continued fraction with all entries >= 1 is canonical, so the lists are
// the expansion verbatim.
class PeriodicStream final : public QuotientStream {
public:
    explicit PeriodicStream(const PeriodicCfAlpha& pc) : pc_(pc) {
        fold_periodic_cf(pc_); // validates
        a0_ = pc_.preperiod[0];
    }
    const mpz_class& a0() const override { return a0_; }
    bool next(mpz_class& a) override {
        if (idx_ + 1 < pc_.preperiod.size()) {
            a = pc_.preperiod[++idx_];
        } else {
            a = pc_.period[per_idx_ % pc_.period.size()];
            ++per_idx_;
        }
        return true;
    }

private:
    PeriodicCfAlpha pc_;
    mpz_class a0_;
    std::size_t idx_ = 0;
    std::size_t per_idx_ = 0;
};

// Interval Gauss map on a rational enclosure (lo, hi).  A quotient is
// emitted only when both endpoints agree on it; otherwise the enclosure
// straddles an integer of the reciprocal and the stream is exhausted.
class IntervalStream final : public QuotientStream {
public:
    IntervalStream(const mpz_class& num_lo, const mpz_class& den) {
        nlo_ = num_lo;
        dlo_ = den;
        nhi_ = num_lo + 1;
        dhi_ = den;
        // a0 over the open interval.
        mpz_class flo, fhi;
        mpz_fdiv_q(flo.get_mpz_t(), nlo_.get_mpz_t(), dlo_.get_mpz_t());
        if (mpz_divisible_p(nhi_.get_mpz_t(), dhi_.get_mpz_t()))
            fhi = nhi_ / dhi_ - 1;
        else
            mpz_fdiv_q(fhi.get_mpz_t(), nhi_.get_mpz_t(), dhi_.get_mpz_t());
        if (flo != fhi)
            throw PrecisionExhaustedError("interval alpha straddles an integer at a_0");
        a0_ = flo;
        nlo_ -= a0_ * dlo_;
        nhi_ -= a0_ * dhi_;
    }

    const mpz_class& a0() const override { return a0_; }

    bool next(mpz_class& a) override {
        // x in (nlo/dlo, nhi/dhi) subset of (0,1); 1/x in (dhi/nhi, dlo/nlo).
        if (nlo_ == 0 || nhi_ == 0) return false;
        mpz_class alo, rhi, ahi, rlo;
        mpz_fdiv_qr(alo.get_mpz_t(), rhi.get_mpz_t(), dhi_.get_mpz_t(), nhi_.get_mpz_t());
        mpz_fdiv_qr(ahi.get_mpz_t(), rlo.get_mpz_t(), dlo_.get_mpz_t(), nlo_.get_mpz_t());
        if (rlo == 0) {
            // sup is an excluded endpoint exactly at an integer
            ahi -= 1;
            rlo = nlo_;
        }
        if (alo != ahi || alo < 1) return false;
        a = alo;
        // x' = 1/x - a in (rhi/nhi, rlo/nlo); roles swap.
        mpz_class new_nlo = rhi, new_dlo = nhi_;
        mpz_class new_nhi = rlo, new_dhi = nlo_;
        nlo_ = new_nlo;
        dlo_ = new_dlo;
        nhi_ = new_nhi;
        dhi_ = new_dhi;
        return true;
    }

private:
    mpz_class nlo_, dlo_, nhi_, dhi_, a0_;
};

inline std::unique_ptr<QuotientStream> make_stream(const AlphaSpec& alpha) {
    if (const auto* qa = std::get_if<QuadraticAlpha>(&alpha.kind()))
        return std::make_unique<SurdStream>(*qa);
    if (const auto* pc = std::get_if<PeriodicCfAlpha>(&alpha.kind()))
        return std::make_unique<PeriodicStream>(*pc);
    mpz_class num, den;
    alpha.rational_enclosure(num, den);
    return std::make_unique<IntervalStream>(num, den);
}

} // namespace detail

struct ExpandOptions {
    bool with_pq = true;
    bool with_deltas = true;
    mpfr_prec_t min_prec = 0;
};

// Partial quotients a_1..a_K, convergents p_k/q_k (k = 0..K, with
// p_0/q_0 = 0/1 for the normalized alpha in (0,1)), and enclosures of
// delta_k = |q_k alpha - p_k| computed by the recurrence
// delta_{k+1} = delta_{k-1} - a_{k+1} delta_k in interval arithmetic.
class ConvergentTable {
public:
    static ConvergentTable expand(const AlphaSpec& alpha, int K, ExpandOptions opts = {}) {
        if (K < 1) throw OutOfRangeError("expand: K must be >= 1");
        ConvergentTable t(alpha);
        auto stream = detail::make_stream(alpha);
        t.a0_ = stream->a0();
        t.a_.reserve(K);
        for (int k = 1; k <= K; ++k) {
            mpz_class a;
            if (!stream->next(a))
                throw PrecisionExhaustedError("expand: cannot certify a_" + std::to_string(k));
            t.a_.push_back(a);
        }
        if (opts.with_pq || opts.with_deltas) {
            t.p_.resize(K + 1);
            t.q_.resize(K + 1);
            t.p_[0] = 0;
            t.q_[0] = 1;
            mpz_class pm = 1, qm = 0; // p_{-1}, q_{-1}
            for (int k = 1; k <= K; ++k) {
                t.p_[k] = t.a_[k - 1] * t.p_[k - 1] + pm;
                t.q_[k] = t.a_[k - 1] * t.q_[k - 1] + qm;
                pm = t.p_[k - 1];
                qm = t.q_[k - 1];
            }
            t.has_pq_ = true;
        }
        if (opts.with_deltas) {
            mpfr_prec_t p = static_cast<mpfr_prec_t>(mpz_sizeinbase(t.q_[K].get_mpz_t(), 2)) + 96;
            p = std::max<mpfr_prec_t>({p, 128, opts.min_prec, detail::env_min_precision()});
            t.prec_ = p;
            Ival raw = alpha.enclosure(p);
            Ival a0iv = Ival::exact_z(t.a0_, p);
            t.alpha_iv_ = std::make_shared<Ival>(iv_sub(raw, a0iv));
            t.delta_.reserve(K + 1);
            Ival dm1 = Ival::exact_ui(1, p); // delta_{-1}
            t.delta_.push_back(*t.alpha_iv_); // delta_0 = alpha
            for (int k = 1; k <= K; ++k) {
                Ival dk = iv_sub(dm1, iv_mul_z(t.delta_[k - 1], t.a_[k - 1]));
                dm1 = t.delta_[k - 1];
                if (dk.lo.sgn() <= 0)
                    throw PrecisionExhaustedError(
                        "expand: delta_" + std::to_string(k) + " enclosure touches zero");
                t.delta_.push_back(std::move(dk));
            }
            t.has_deltas_ = true;
        }
        return t;
    }

    int depth() const { return static_cast<int>(a_.size()); }
    const AlphaSpec& alpha() const { return alpha_; }
    const mpz_class& a0() const { return a0_; }

    const mpz_class& a(int k) const {
        if (k < 1 || k > depth()) throw OutOfRangeError("a(k): index out of range");
        return a_[k - 1];
    }
    const mpz_class& p(int k) const {
        require_pq();
        if (k < 0 || k > depth()) throw OutOfRangeError("p(k): index out of range");
        return p_[k];
    }
    const mpz_class& q(int k) const {
        require_pq();
        if (k < 0 || k > depth()) throw OutOfRangeError("q(k): index out of range");
        return q_[k];
    }
    // The [OP] delta accessor: |q_k alpha - p_k| with its error bound.
    const Ival& delta(int k) const {
        require_deltas();
        if (k < 0 || k > depth()) throw OutOfRangeError("delta(k): index out of range");
        return delta_[k];
    }
    long double delta_ld(int k) const { return delta(k).mid(); }

    const Ival& alpha_enclosure() const {
        require_deltas();
        return *alpha_iv_;
    }
    mpfr_prec_t precision() const { return prec_; }
    bool has_pq() const { return has_pq_; }
    bool has_deltas() const { return has_deltas_; }

    mpz_class sum_a(int upto = -1) const {
        if (upto < 0) upto = depth();
        mpz_class s = 0;
        for (int k = 1; k <= upto; ++k) s += a(k);
        return s;
    }
    // Smallest index l0 in [1, upto] attaining max a_l.
    int argmax_a(int upto = -1) const {
        if (upto < 0) upto = depth();
        int best = 1;
        for (int k = 2; k <= upto; ++k)
            if (a_[k - 1] > a_[best - 1]) best = k;
        return best;
    }

private:
    explicit ConvergentTable(const AlphaSpec& a) : alpha_(a) {}
    void require_pq() const {
        if (!has_pq_) throw OutOfRangeError("table built without convergents");
    }
    void require_deltas() const {
        if (!has_deltas_) throw OutOfRangeError("table built without deltas");
    }

    AlphaSpec alpha_;
    mpz_class a0_;
    std::vector<mpz_class> a_, p_, q_;
    std::vector<Ival> delta_;
    std::shared_ptr<Ival> alpha_iv_;
    mpfr_prec_t prec_ = 0;
    bool has_pq_ = false;
    bool has_deltas_ = false;
};

// Certified check of the table invariants.  Recursions are exact by
// construction; the inequality facts are checked with interval bounds and
// reported as violated only when certain.
struct TableCheck {
    bool recursions_ok = true;
    int inequality_violations = 0; // certified violations
    int unverifiable = 0;          // enclosures too wide to decide
    bool q_increasing = true;
};

inline TableCheck check_table(const ConvergentTable& t) {
    TableCheck r;
    int K = t.depth();
    mpz_class pm = 1, qm = 0;
    for (int k = 1; k <= K; ++k) {
        if (t.p(k) != t.a(k) * t.p(k - 1) + pm || t.q(k) != t.a(k) * t.q(k - 1) + qm)
            r.recursions_ok = false;
        pm = t.p(k - 1);
        qm = t.q(k - 1);
    }
    for (int k = 3; k <= K; ++k)
        if (!(t.q(k) > t.q(k - 1))) r.q_increasing = false;
    if (t.has_deltas()) {
        mpfr_prec_t p = t.precision();
        for (int k = 1; k <= K; ++k) {
            // 1/(q_{k+1}+q_k) <= delta_k <= 1/q_{k+1}, for k with q_{k+1} known
            if (k + 1 <= K) {
                Ival lo = Ival::ratio_z(1, t.q(k + 1) + t.q(k), p);
                Ival hi = Ival::ratio_z(1, t.q(k + 1), p);
                int c1 = iv_cmp(t.delta(k), lo);
                int c2 = iv_cmp(t.delta(k), hi);
                if (c1 < 0 || c2 > 0) ++r.inequality_violations;
                else if (c1 == 0 || c2 == 0) ++r.unverifiable;
            }
            // 1/(a_{k+1}+2) <= q_k delta_k <= 1/a_{k+1}
            if (k + 1 <= K) {
                Ival qd = iv_mul_z(t.delta(k), t.q(k));
                Ival lo = Ival::ratio_z(1, t.a(k + 1) + 2, p);
                Ival hi = Ival::ratio_z(1, t.a(k + 1), p);
                int c1 = iv_cmp(qd, lo);
                int c2 = iv_cmp(qd, hi);
                if (c1 < 0 || c2 > 0) ++r.inequality_violations;
                else if (c1 == 0 || c2 == 0) ++r.unverifiable;
            }
            // delta strictly decreasing for k >= 1
            if (k >= 2) {
                int c = iv_cmp(t.delta(k), t.delta(k - 1));
                if (c > 0) ++r.inequality_violations;
                else if (c == 0) ++r.unverifiable;
            }
        }
    }
    return r;
}

// Khintchine-Levy statistic (log q_K)/K for this table.
inline double log_qk_over_k(const ConvergentTable& t) {
    int K = t.depth();
    Real lq(64);
    mpfr_set_z(lq.raw(), t.q(K).get_mpz_t(), MPFR_RNDN);
    mpfr_log(lq.raw(), lq.raw(), MPFR_RNDN);
    return lq.to_double() / K;
}

} // namespace sudler
