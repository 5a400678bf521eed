#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "sudler/contfrac.hpp"
#include "sudler/errors.hpp"

namespace sudler {

// Digit string (b_0, ..., b_{K-1}) of N = sum b_l q_l relative to a table.
// Digit bounds: 0 <= b_l <= a_{l+1}, b_0 <= a_1 - 1, and b_{l-1} = 0
// whenever b_l = a_{l+1}.  Leading zeros are allowed so that a fixed depth
// K scans the whole range [0, q_K).
class OstrowskiDigits {
public:
    OstrowskiDigits(std::vector<mpz_class> digits, const ConvergentTable& table)
        : b_(std::move(digits)), table_(&table) {
        std::string why;
        if (!valid(&why)) throw InvalidDigitsError("invalid Ostrowski digits: " + why);
    }

    static OstrowskiDigits encode(const mpz_class& N, const ConvergentTable& table) {
        return encode(N, table, table.depth());
    }

    static OstrowskiDigits encode(const mpz_class& N, const ConvergentTable& table, int K) {
        if (K < 1 || K > table.depth()) throw OutOfRangeError("encode: bad depth");
        if (N < 0 || N >= table.q(K))
            throw OutOfRangeError("encode: N must satisfy 0 <= N < q_K");
        std::vector<mpz_class> b(K);
        mpz_class rem = N;
        for (int l = K - 1; l >= 0; --l) {
            mpz_class d, r;
            mpz_fdiv_qr(d.get_mpz_t(), r.get_mpz_t(), rem.get_mpz_t(), table.q(l).get_mpz_t());
            b[l] = d;
            rem = r;
        }
        return OstrowskiDigits(std::move(b), table);
    }

    int depth() const { return static_cast<int>(b_.size()); }
    const mpz_class& digit(int l) const {
        if (l < 0 || l >= depth()) throw OutOfRangeError("digit index out of range");
        return b_[l];
    }
    const std::vector<mpz_class>& digits() const { return b_; }
    const ConvergentTable& table() const { return *table_; }

    mpz_class decode() const {
        mpz_class n = 0;
        for (int l = 0; l < depth(); ++l) n += b_[l] * table_->q(l);
        return n;
    }

    bool valid(std::string* why = nullptr) const {
        int K = depth();
        if (K < 1 || K > table_->depth()) {
            if (why) *why = "depth does not fit table";
            return false;
        }
        for (int l = 0; l < K; ++l) {
            if (b_[l] < 0) {
                if (why) *why = "negative digit at " + std::to_string(l);
                return false;
            }
            if (b_[l] > table_->a(l + 1)) {
                if (why) *why = "digit exceeds a_{l+1} at " + std::to_string(l);
                return false;
            }
        }
        if (b_[0] > table_->a(1) - 1) {
            if (why) *why = "b_0 must be <= a_1 - 1";
            return false;
        }
        for (int l = 1; l < K; ++l) {
            if (b_[l] == table_->a(l + 1) && b_[l - 1] != 0) {
                if (why)
                    *why = "carry rule: b_{l-1} must vanish when b_l = a_{l+1}, l=" +
                           std::to_string(l);
                return false;
            }
        }
        return true;
    }

private:
    std::vector<mpz_class> b_;
    const ConvergentTable* table_;
};

inline mpz_class decode(const OstrowskiDigits& d) { return d.decode(); }

// Odometer over all valid digit strings of fixed depth K, in increasing
// order of the decoded integer (0 .. q_K - 1).  Amortized O(1) digit work
// per step; no repeated greedy encoding.
class OstrowskiEnumerator {
public:
    OstrowskiEnumerator(const ConvergentTable& table, int K) : table_(&table), K_(K) {
        if (K < 1 || K > table.depth()) throw OutOfRangeError("enumerate: bad depth");
        b_.assign(K, 0);
        n_ = 0;
    }

    const std::vector<mpz_class>& digits() const { return b_; }
    const mpz_class& value() const { return n_; }
    int depth() const { return K_; }

    // Advance to the successor; returns false after the last string.
    bool next() {
        for (int l = 0; l < K_; ++l) {
            const mpz_class cap = (l == 0) ? mpz_class(table_->a(1) - 1) : table_->a(l + 1);
            const bool above_saturated = (l + 1 < K_) && (b_[l + 1] == table_->a(l + 2));
            if (b_[l] < cap && !above_saturated) {
                b_[l] += 1;
                for (int j = 0; j < l; ++j) b_[j] = 0;
                n_ += 1;
                return true;
            }
        }
        return false;
    }

private:
    const ConvergentTable* table_;
    int K_;
    std::vector<mpz_class> b_;
    mpz_class n_;
};

namespace detail {

// free_any[l]: number of valid digit strings on positions 0..l-1 subject
// to b_pos <= tmax; free_sat[l]: the same but with b_{l-1} forced to 0
// (the completion count under a saturated digit at position l).
// Without the pos-constraint, free_any[l] = q_l and free_sat[l] = q_{l-1}.
struct DigitCounts {
    std::vector<mpz_class> free_any, free_sat;

    DigitCounts(const ConvergentTable& t, int K, int pos, const mpz_class& tmax) {
        free_any.assign(K + 1, 0);
        free_sat.assign(K + 1, 0);
        free_any[0] = 1;
        free_sat[0] = 1;
        for (int l = 1; l <= K; ++l) {
            const mpz_class cap = (l - 1 == 0) ? mpz_class(t.a(1) - 1) : t.a(l);
            mpz_class lim = cap;
            if (l - 1 == pos && tmax < lim) lim = tmax;
            if (lim < 0) {
                free_any[l] = 0;
            } else {
                const bool has_sat = (l - 1 >= 1) && (lim == t.a(l));
                mpz_class nonsat = has_sat ? lim : mpz_class(lim + 1);
                free_any[l] = nonsat * free_any[l - 1];
                if (has_sat) free_any[l] += free_sat[l - 1];
            }
            const bool zero_ok = !(l - 1 == pos && tmax < 0);
            free_sat[l] = zero_ok ? free_any[l - 1] : mpz_class(0);
        }
    }
};

} // namespace detail

// #{0 <= N <= M : b_pos(N) <= tmax}, digits taken at depth K (requires
// M < q_K).  Walks the digits of M most-significant-first; digit choices
// strictly below M's are completed by the free counts.  Choices v < m_l
// never saturate position l (v < m_l <= a_{l+1}), so only free_any enters.
inline mpz_class count_le_with_digit_at_most(const ConvergentTable& t, const mpz_class& M, int K,
                                             int pos, const mpz_class& tmax) {
    if (M < 0) return 0;
    if (K < 1 || K > t.depth()) throw OutOfRangeError("count: bad depth");
    if (M >= t.q(K)) throw OutOfRangeError("count: M must be < q_K");
    detail::DigitCounts dp(t, K, pos, tmax);
    OstrowskiDigits md = OstrowskiDigits::encode(M, t, K);

    mpz_class total = 0;
    bool tight_ok = true;
    for (int l = K - 1; l >= 0; --l) {
        mpz_class vmax = md.digit(l) - 1;
        if (l == pos && tmax < vmax) vmax = tmax;
        if (vmax >= 0) total += (vmax + 1) * dp.free_any[l];
        if (l == pos && md.digit(l) > tmax) {
            tight_ok = false;
            break;
        }
    }
    if (tight_ok) total += 1; // M itself
    return total;
}

} // namespace sudler
