#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "sudler/density.hpp"
#include "sudler/quadrature.hpp"
#include "sudler/sudler.hpp"

namespace sudler {

// V = integral over [0, 5/6] of log|2 sin(pi x)| dx, about 0.1615.
inline double constant_V(double tolerance = 1e-8) {
    if (!(tolerance > 0)) throw DomainError("constant_V: tolerance must be positive");
    return integral_log2sin(5.0 / 6.0, tolerance);
}

// pi^2 / (1440 V^2), about 0.2627.
inline double theorem_a_constant() {
    static const double v = constant_V(1e-8);
    const double pi = 3.14159265358979323846;
    return pi * pi / (1440.0 * v * v);
}

inline double khintchine_levy(const ConvergentTable& t) {
    if (t.depth() < 2) throw OutOfRangeError("khintchine_levy: need depth >= 2");
    return log_qk_over_k(t);
}

inline double khintchine_levy_reference() {
    const double pi = 3.14159265358979323846;
    return pi * pi / (12.0 * std::log(2.0));
}

// (sum of a_l up to K minus the largest) / (K log K / log 2).
inline double trimmed_sum_ratio(const ConvergentTable& t) {
    int K = t.depth();
    if (K < 3) throw OutOfRangeError("trimmed_sum_ratio: need depth >= 3");
    mpz_class trimmed = t.sum_a(K) - t.a(t.argmax_a(K));
    double denom = K * std::log(static_cast<double>(K)) / std::log(2.0);
    return trimmed.get_d() / denom;
}

inline std::uint64_t bernstein_count(const ConvergentTable& t, const PsiSpec& psi) {
    std::uint64_t c = 0;
    for (int k = 1; k <= t.depth(); ++k) {
        double thr = psi.eval(static_cast<double>(k));
        if (mpz_cmp_d(t.a(k).get_mpz_t(), thr) > 0) ++c;
    }
    return c;
}

// All K <= depth with psi(K) < a_K < K^2 and sum_{l<K} a_l <= c_bound K log K.
inline std::vector<int> find_good_K(const ConvergentTable& t, const PsiSpec& psi, double c_bound) {
    std::vector<int> out;
    mpz_class partial = 0; // sum_{l < K} a_l
    for (int K = 1; K <= t.depth(); ++K) {
        const mpz_class& aK = t.a(K);
        bool ok = mpz_cmp_d(aK.get_mpz_t(), psi.eval(static_cast<double>(K))) > 0 &&
                  aK < mpz_class(K) * K &&
                  partial.get_d() <= c_bound * K * std::log(static_cast<double>(K));
        if (ok) out.push_back(K);
        partial += aK;
    }
    return out;
}

struct MaxOverPeriod {
    long double max_log_p = 0; // max over 0 <= N < q_K (N = 0 contributes 0)
    std::uint64_t argmax = 0;
    double sum_a = 0;
    double ratio = 0; // max / (V * sum a_l)
};

namespace detail {

struct MaxVisitor {
    long double best = 0;
    u64 best_n = 0;
    u64 limit;
    explicit MaxVisitor(u64 lim) : limit(lim) {}
    void visit(u64 n, long double v, double) {
        if (n >= limit) return;
        if (v > best) {
            best = v;
            best_n = n;
        }
    }
    void merge(MaxVisitor&& o) {
        if (o.best > best) {
            best = o.best;
            best_n = o.best_n;
        }
    }
};

struct VarianceVisitor {
    long double sumsq = 0;
    long double best = 0;
    u64 m;
    explicit VarianceVisitor(u64 m_) : m(m_) {}
    void visit(u64 n, long double v, double) {
        if (n <= m) sumsq += v * v;
        if (n < m && v > best) best = v;
    }
    void merge(VarianceVisitor&& o) {
        sumsq += o.sumsq;
        best = std::max(best, o.best);
    }
};

} // namespace detail

inline MaxOverPeriod max_over_period(const ConvergentTable& t, int K, int threads = 1,
                                     const Budget& budget = {}) {
    if (K < 0 || K > t.depth()) throw OutOfRangeError("max_over_period: bad K");
    MaxOverPeriod r;
    r.sum_a = t.sum_a(K).get_d();
    mpz_class qk = t.q(K);
    if (qk > mpz_class(static_cast<unsigned long>(budget.max_terms)))
        throw BudgetExceededError("max_over_period: q_K exceeds scan budget");
    std::uint64_t lim = detail::to_u64(qk, "q_K");
    if (lim > 1) {
        FastAlpha fa = FastAlpha::from_table(t);
        detail::MaxVisitor vis(lim);
        scan_log_products(fa, lim - 1, vis, threads);
        r.max_log_p = std::max<long double>(vis.best, 0.0L);
        r.argmax = vis.best > 0.0L ? vis.best_n : 0;
    }
    double denom = constant_V(1e-8) * r.sum_a;
    r.ratio = denom != 0 ? static_cast<double>(r.max_log_p) / denom : 0.0;
    return r;
}

struct VarianceRatio {
    double rms = 0;        // sqrt((1/M) sum_{N<=M} log^2 P_N)
    double max_log_p = 0;  // max over 0 <= N < M
    double ratio = 0;
    bool degenerate = false;
    double reference = 0; // pi / (sqrt(720) V)
};

inline VarianceRatio variance_ratio(const ConvergentTable& t, std::uint64_t M, int threads = 1,
                                    const Budget& budget = {}) {
    if (M < 1) throw OutOfRangeError("variance_ratio: M must be >= 1");
    if (M > budget.max_terms) throw BudgetExceededError("variance_ratio: M exceeds budget");
    FastAlpha fa = FastAlpha::from_table(t);
    detail::VarianceVisitor vis(M);
    scan_log_products(fa, M, vis, threads);
    VarianceRatio r;
    r.rms = std::sqrt(static_cast<double>(vis.sumsq) / static_cast<double>(M));
    r.max_log_p = std::max(static_cast<double>(vis.best), 0.0);
    const double pi = 3.14159265358979323846;
    r.reference = pi / (std::sqrt(720.0) * constant_V(1e-8));
    if (r.max_log_p <= 0) {
        r.degenerate = true;
        r.ratio = 0;
    } else {
        r.ratio = r.rms / r.max_log_p;
    }
    return r;
}

// c(t) = integral_0^t exp(-1/(2x)) / (sqrt(2 pi) x^{3/2}) dx.  The
// integrand vanishes to all orders at 0; everything below x0 is absorbed
// into a certified tail bound, the rest split into dyadic panels for the
// adaptive rule.
inline double c_of_t(double t, double tolerance = 1e-9) {
    if (t < 0) throw DomainError("c_of_t: t must be >= 0");
    if (t == 0) return 0.0;
    const double pi = 3.14159265358979323846;
    auto f = [pi](double x) {
        return std::exp(-1.0 / (2.0 * x)) / (std::sqrt(2.0 * pi) * std::pow(x, 1.5));
    };
    // tail: integral_0^{x0} f <= exp(-1/(2 x0)) * 2 / (sqrt(2 pi) sqrt(x0))
    double x0 = std::min(t, 1.0 / 220.0); // exp(-110) ~ 1.7e-48
    double result = 0.0;
    double lo = x0;
    while (lo < t) {
        double hi = std::min(t, lo * 2.0);
        result += adaptive_simpson(f, lo, hi, tolerance / 64.0);
        lo = hi;
    }
    return result;
}

// ---- seeded ensembles --------------------------------------------------------

struct EnsembleResult {
    std::vector<double> values; // per-sample statistic, index order
    double median = 0;
    std::uint64_t base_seed = 0;
    int n = 0;
    int depth = 0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return 0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Expands sample i of the ensemble, retrying with doubled precision when
// the interval Gauss map runs out of certified quotients.
inline ConvergentTable ensemble_table(std::uint64_t base_seed, int i, int K, bool with_pq) {
    long bits = 4L * K + 1024;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            AlphaSpec a = sample_alpha(base_seed + static_cast<std::uint64_t>(i), bits);
            ExpandOptions opts;
            opts.with_pq = with_pq;
            opts.with_deltas = false;
            return ConvergentTable::expand(a, K, opts);
        } catch (const PrecisionExhaustedError&) {
            bits *= 2;
        }
    }
    AlphaSpec a = sample_alpha(base_seed + 1000003ULL, bits);
    ExpandOptions opts;
    opts.with_pq = with_pq;
    opts.with_deltas = false;
    return ConvergentTable::expand(a, K, opts);
}

template <class Stat>
EnsembleResult run_ensemble(int n, int K, std::uint64_t seed, int threads, bool with_pq,
                            Stat&& stat) {
    EnsembleResult r;
    r.base_seed = seed;
    r.n = n;
    r.depth = K;
    r.values.assign(n, 0.0);
    auto work = [&](int i0, int i1) {
        for (int i = i0; i < i1; ++i) {
            ConvergentTable t = ensemble_table(seed, i, K, with_pq);
            r.values[i] = stat(t);
        }
    };
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        int per = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int i0 = std::min(n, t * per), i1 = std::min(n, i0 + per);
            if (i0 < i1) pool.emplace_back(work, i0, i1);
        }
        for (auto& th : pool) th.join();
    }
    r.median = median_of(r.values);
    return r;
}

} // namespace detail

inline EnsembleResult kl_ensemble(int n, int K, std::uint64_t seed, int threads = 1) {
    return detail::run_ensemble(n, K, seed, threads, true,
                                [](const ConvergentTable& t) { return khintchine_levy(t); });
}

inline EnsembleResult trimmed_ensemble(int n, int K, std::uint64_t seed, int threads = 1) {
    return detail::run_ensemble(n, K, seed, threads, false,
                                [](const ConvergentTable& t) { return trimmed_sum_ratio(t); });
}

} // namespace sudler
