#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sudler/sudler.hpp"

namespace sudler {

// Outcome of an inequality sweep.  worst_margin is the smallest certified
// lower bound of (RHS - LHS) over the instances; a violation is counted
// only when an inequality is certainly false.  Fitted constants
// operationalize the paper-style "<<" claims: the minimal constant making
// the bound hold over the corpus, reported as data.
struct InequalityReport {
    std::string name;
    std::uint64_t instances_checked = 0;
    std::uint64_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<double> fitted_constant;
    std::uint64_t hypothesis_unmet = 0;
    std::uint64_t indeterminate = 0;

    // lo/hi bracket the true margin (RHS - LHS); the inequality is counted
    // violated only when even the upper bound is negative.
    void note_margin(double lo, double hi) {
        worst_margin = std::min(worst_margin, lo);
        if (hi < 0) ++violations;
    }
    void note_margin(double m) { note_margin(m, m); }
    void fit(double c) {
        fitted_constant = fitted_constant ? std::max(*fitted_constant, c) : c;
    }
    void merge(const InequalityReport& o) {
        instances_checked += o.instances_checked;
        violations += o.violations;
        worst_margin = std::min(worst_margin, o.worst_margin);
        if (o.fitted_constant) fit(*o.fitted_constant);
        hypothesis_unmet += o.hypothesis_unmet;
        indeterminate += o.indeterminate;
    }
};

namespace detail {

// Certified bracket of b - a.
inline std::pair<double, double> margin_of(const Ival& a, const Ival& b) {
    Ival d = iv_sub(b, a);
    return {d.lo.to_double(MPFR_RNDD), d.hi.to_double(MPFR_RNDU)};
}

} // namespace detail

// Inequality chain around eps_l(N), checked at every l with b_l >= 1:
//   -1 < -q_l d_l + q_l d_{l+1}
//      <= -q_l d_l + q_l (a_{l+2} - b_{l+1}) d_{l+1}   (for l <= K-2)
//      <= eps_l(N) <= q_l d_{l+1} <= 1/2,
// plus part (i):  -1/a_{l+1} <= -q_l d_l <= eps_l(N) <= 1/a_{l+1}.
inline InequalityReport check_epsilon_chain(const OstrowskiDigits& d) {
    const ConvergentTable& t = d.table();
    int K = d.depth();
    mpfr_prec_t p = t.precision();
    InequalityReport rep;
    rep.name = "eps_chain";
    EpsilonVector ev = epsilon_vector(d);
    Ival one = Ival::exact_ui(1, p);
    Ival half = Ival::ratio_z(1, 2, p);
    for (int l = 0; l <= K - 1; ++l) {
        if (d.digit(l) < 1) continue;
        ++rep.instances_checked;
        const Ival& eps = ev.at(l);
        Ival qdl = iv_mul_z(t.delta(l), t.q(l));
        Ival qdl1 = iv_mul_z(t.delta(l + 1), t.q(l));
        Ival lower1 = iv_sub(qdl1, qdl); // -q d_l + q d_{l+1}
        rep.note_margin(detail::margin_lo(iv_neg(one), lower1));
        if (l <= K - 2) {
            mpz_class coef = t.a(l + 2) - d.digit(l + 1);
            Ival lower2 = iv_sub(iv_mul_z(qdl1, coef), qdl);
            rep.note_margin(detail::margin_lo(lower1, lower2));
            rep.note_margin(detail::margin_lo(lower2, eps));
        } else {
            rep.note_margin(detail::margin_lo(lower1, eps));
        }
        rep.note_margin(detail::margin_lo(eps, qdl1));
        rep.note_margin(detail::margin_lo(qdl1, half));
        // part (i)
        Ival inv_a = Ival::ratio_z(1, t.a(l + 1), p);
        rep.note_margin(detail::margin_lo(iv_neg(inv_a), iv_neg(qdl)));
        rep.note_margin(detail::margin_lo(iv_neg(qdl), eps));
        rep.note_margin(detail::margin_lo(eps, inv_a));
    }
    return rep;
}

// Exhaustive sweep over N in [0, n_limit).
inline InequalityReport check_epsilon_chain_exhaustive(const ConvergentTable& t,
                                                       const mpz_class& n_limit) {
    InequalityReport rep;
    rep.name = "eps_chain";
    OstrowskiEnumerator en(t, t.depth());
    do {
        if (en.value() >= n_limit) break;
        OstrowskiDigits d(en.digits(), t);
        rep.merge(check_epsilon_chain(d));
    } while (en.next());
    rep.name = "eps_chain";
    return rep;
}

struct VkReport {
    InequalityReport monotone;   // part (i): V' < 0 across the grid
    InequalityReport bound_x;    // part (ii): |V(x)| <= c (log a_max + 1/(1-|x|))
    InequalityReport bound_zero; // part (i): |V(0)| <= c (1 + log a_max)/a_{l+1}

    InequalityReport merged() const {
        InequalityReport r = monotone;
        r.name = "vk";
        r.fitted_constant = bound_x.fitted_constant;
        return r;
    }
};

inline VkReport check_vk_bounds(const ConvergentTable& t, int l, int grid_size,
                                double x_lo = -0.9, double x_hi = 0.9, const Budget& budget = {}) {
    VkReport rep;
    rep.monotone.name = "vk_monotone";
    rep.bound_x.name = "vk_bound_x";
    rep.bound_zero.name = "vk_bound_zero";
    if (grid_size < 2) throw UsageError("check_vk_bounds: grid_size must be >= 2");

    double log_amax = 0;
    {
        mpz_class amax = t.a(t.argmax_a());
        log_amax = std::log(amax.get_d());
    }
    std::vector<CotValue> vals(grid_size);
    std::vector<long double> xs(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        long double x = x_lo + (static_cast<long double>(i) * (x_hi - x_lo)) / (grid_size - 1);
        xs[i] = x;
        vals[i] = cotangent_sum(t, l, x, budget);
        ++rep.bound_x.instances_checked;
        double denom = log_amax + 1.0 / (1.0 - std::fabs(static_cast<double>(x)));
        rep.bound_x.fit(std::fabs(static_cast<double>(vals[i].value)) / denom);
    }
    for (int i = 0; i + 1 < grid_size; ++i) {
        ++rep.monotone.instances_checked;
        double m = static_cast<double>(vals[i].value - vals[i + 1].value) -
                   (vals[i].abs_error + vals[i + 1].abs_error);
        rep.monotone.note_margin(m);
    }
    CotValue v0 = cotangent_sum(t, l, 0.0L, budget);
    ++rep.bound_zero.instances_checked;
    rep.bound_zero.fit(std::fabs(static_cast<double>(v0.value)) * t.a(l + 1).get_d() /
                       (1.0 + log_amax));
    return rep;
}

// The shifted-product upper bound of the decomposition step, for one
// instance (N, l) with b_l >= 1 and l >= 1:
//   sum_{b<b_l} log P_{q_l}(a, (-1)^l (b q_l d_l + eps_l)/q_l)
//     <= sum_{b=1}^{b_l-1} log|2 sin(pi(b q_l d_l + eps_l))|
//        + sum_{b<b_l} V_l(b q_l d_l + eps_l)
//        + log(2 pi (b_l q_l d_l + eps_l)) + C/(a_{l+1} q_l).
// Reports the minimal C making it hold, and violations against C_candidate.
inline InequalityReport check_prop12(const OstrowskiDigits& d, int l, double C_candidate,
                                     Rigor rigor = Rigor::heuristic, const Budget& budget = {}) {
    const ConvergentTable& t = d.table();
    if (l < 1 || l >= d.depth()) throw OutOfRangeError("check_prop12: need 1 <= l <= K-1");
    if (d.digit(l) < 1) throw OutOfRangeError("check_prop12: b_l must be >= 1");
    InequalityReport rep;
    rep.name = "prop12";
    ++rep.instances_checked;

    detail::u64 bl = detail::to_u64(d.digit(l), "b_l");
    detail::u64 ql = detail::to_u64(t.q(l), "q_l");
    long double qld = static_cast<long double>(ql);
    long double qdelta = iv_mul_z(t.delta(l), t.q(l)).mid();
    std::vector<long double> eps = epsilon_vector_ld(d);

    long double lhs = 0;
    double lhs_err = 0;
    FastAlpha fa = FastAlpha::from_table(t);
    CertifiedEval cert(t, budget);
    for (detail::u64 b = 0; b < bl; ++b) {
        long double arg = b * qdelta + eps[l];
        long double shift = decomposition_shift(l, arg, qld);
        if (rigor == Rigor::certified) {
            Ival sh = Ival::exact_ld(shift, t.precision());
            Ival v = cert.log_product_ival(ql, &sh);
            lhs += v.mid();
            lhs_err += v.rad();
        } else {
            LogValue v = log_shifted_product_fast(fa, ql, shift, budget);
            lhs += v.value;
            lhs_err += v.abs_error;
        }
    }

    long double rhs = 0;
    double rhs_err = 0;
    for (detail::u64 b = 1; b < bl; ++b) {
        long double arg = b * qdelta + eps[l];
        rhs += std::log(std::fabs(2.0L * std::sin(detail::kPi * arg)));
        rhs_err += 1e-17;
    }
    for (detail::u64 b = 0; b < bl; ++b) {
        CotValue v = cotangent_sum(t, l, b * qdelta + eps[l], budget);
        rhs += v.value;
        rhs_err += v.abs_error;
    }
    rhs += std::log(2.0L * detail::kPi * (bl * qdelta + eps[l]));
    rhs_err += 1e-17;

    double aq = t.a(l + 1).get_d() * static_cast<double>(ql);
    double c_min = static_cast<double>(lhs - rhs) * aq;
    rep.fit(c_min);
    double margin = static_cast<double>(rhs - lhs) + C_candidate / aq - (lhs_err + rhs_err);
    rep.note_margin(margin);
    return rep;
}

// Hypotheses and excess of the key upper-bound lemma.  The instance is
// skipped (hypothesis_unmet) unless a_{l0} >= 2, b_{l0-1} <= a_{l0}/2 and
// a_{l0} <= K^2; the trimmed-sum constant of
// sum_{k != l0} a_k <= c K log K is recorded, never assumed.
struct LemmaInstance {
    bool applicable = false;
    double normalized_excess = 0; // (log P_N - sine sum) / (K log K)
    double trim_constant = 0;
};

inline LemmaInstance check_upper_bound_lemma_instance(const OstrowskiDigits& d,
                                                      const LogValue& logP) {
    const ConvergentTable& t = d.table();
    int K = d.depth();
    LemmaInstance inst;
    int l0 = t.argmax_a(K);
    const mpz_class& amax = t.a(l0);
    if (amax < 2) return inst;
    if (2 * d.digit(l0 - 1) > amax) return inst;
    if (amax > mpz_class(K) * K) return inst;
    inst.applicable = true;

    double klogk = K * std::log(static_cast<double>(K));
    mpz_class trimmed = t.sum_a(K) - amax;
    inst.trim_constant = klogk > 0 ? trimmed.get_d() / klogk : 0;

    long double qdelta = iv_mul_z(t.delta(l0 - 1), t.q(l0 - 1)).mid();
    std::vector<long double> eps = epsilon_vector_ld(d);
    long double sine_sum = 0;
    detail::u64 b_top = detail::to_u64(d.digit(l0 - 1), "b_{l0-1}");
    for (detail::u64 b = 1; b < b_top; ++b)
        sine_sum += std::log(std::fabs(2.0L * std::sin(detail::kPi * (b * qdelta + eps[l0 - 1]))));
    inst.normalized_excess =
        klogk > 0 ? static_cast<double>(logP.value - sine_sum) / klogk : 0;
    return inst;
}

inline InequalityReport check_upper_bound_lemma(const OstrowskiDigits& d, const LogValue& logP) {
    InequalityReport rep;
    rep.name = "lemma4";
    LemmaInstance inst = check_upper_bound_lemma_instance(d, logP);
    if (!inst.applicable) {
        ++rep.hypothesis_unmet;
        return rep;
    }
    ++rep.instances_checked;
    rep.fit(inst.normalized_excess);
    return rep;
}

inline InequalityReport check_upper_bound_lemma(const OstrowskiDigits& d,
                                                Rigor rigor = Rigor::heuristic,
                                                const Budget& budget = {}) {
    mpz_class N = d.decode();
    LogValue lp = log_product_direct(d.table(), detail::to_u64(N, "N"), rigor, budget);
    return check_upper_bound_lemma(d, lp);
}

} // namespace sudler
